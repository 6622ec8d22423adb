use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

pub const MIN_PHANTOM_SIZE: usize = 16;

/// `(A, a, b, x₀, y₀, φ in degrees)` of the high-contrast variant.
const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Modified Shepp-Logan phantom sampled at the centres of an `n × n` grid
/// over `[−1, 1]²`, `y` pointing up. Values lie in `[0, 1]`.
pub fn shepp_logan<T: Scalar>(n: usize) -> Result<Image<T>> {
    if n < MIN_PHANTOM_SIZE {
        return Err(Error::param("n", format!("phantom size must be at least {MIN_PHANTOM_SIZE}")));
    }
    let nf = n as f64;
    Ok(Image::from_fn(n, n, |i, j| {
        let x = (2.0 * j as f64 + 1.0) / nf - 1.0;
        let y = 1.0 - (2.0 * i as f64 + 1.0) / nf;
        let v: f64 = ELLIPSES
            .iter()
            .filter(|&&(_, a, b, x0, y0, phi)| {
                let (s, c) = phi.to_radians().sin_cos();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * c + dy * s;
                let w = -dx * s + dy * c;
                (u / a).powi(2) + (w / b).powi(2) <= 1.0
            })
            .map(|e| e.0)
            .sum();
        T::of(v.clamp(0.0, 1.0))
    }))
}
