//! Test images, measurement noise and image quality metrics.

mod noise;
mod phantom;
mod ssim;

pub use noise::{add_noise, add_noise_data, add_noise_slice, NoiseSpec};
pub use phantom::{shepp_logan, MIN_PHANTOM_SIZE};
pub use ssim::{mssim, SSIM_WINDOW};
