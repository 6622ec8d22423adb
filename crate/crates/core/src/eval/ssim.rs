use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Side of the Gaussian SSIM window.
pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn window() -> Vec<f64> {
    let c = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|k| (-((k as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Separable weighted sums over every position where the window fits.
fn filter_valid(values: &[f64], width: usize, height: usize, w: &[f64]) -> Vec<f64> {
    let k = w.len();
    let (ow, oh) = (width + 1 - k, height + 1 - k);
    let mut rows = vec![0.0; ow * height];
    for i in 0..height {
        for j in 0..ow {
            rows[i * ow + j] = (0..k).map(|t| w[t] * values[i * width + j + t]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for i in 0..oh {
        for j in 0..ow {
            out[i * ow + j] = (0..k).map(|t| w[t] * rows[(i + t) * ow + j]).sum();
        }
    }
    out
}

/// Mean structural similarity with an 11×11 Gaussian window (`σ = 1.5`),
/// dynamic range 1, inputs clamped to `[0, 1]`.
pub fn mssim<T: Scalar>(x: &Image<T>, y: &Image<T>) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let (w, h) = x.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::param("image", format!("both sides must be at least {SSIM_WINDOW}")));
    }
    let clamp = |img: &Image<T>| -> Vec<f64> { img.values().iter().map(|v| v.to_f64_lossy().clamp(0.0, 1.0)).collect() };
    let (a, b) = (clamp(x), clamp(y));
    let win = window();
    let prod = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| u * v).collect() };
    let mu_a = filter_valid(&a, w, h, &win);
    let mu_b = filter_valid(&b, w, h, &win);
    let aa = filter_valid(&prod(&a, &a), w, h, &win);
    let bb = filter_valid(&prod(&b, &b), w, h, &win);
    let ab = filter_valid(&prod(&a, &b), w, h, &win);
    let (c1, c2) = (K1 * K1, K2 * K2);
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}
