//! Filtered backprojection with the Ram-Lak filter.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::RadonGeometry;
use crate::error::{Error, Result};
use crate::image::{DataVector, Image};
use crate::scalar::Scalar;

/// Spatial Ram-Lak taps for spacing `d`, laid out circularly over `len` samples.
fn ram_lak<T: Scalar>(len: usize, d: f64) -> Vec<Complex<T>> {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    (0..len)
        .map(|k| {
            let n = if k <= len / 2 { k as i64 } else { k as i64 - len as i64 };
            let v = if n == 0 {
                1.0 / (4.0 * d * d)
            } else if n % 2 != 0 {
                -1.0 / ((n * n) as f64 * pi2 * d * d)
            } else {
                0.0
            };
            Complex::new(T::of(v), T::zero())
        })
        .collect()
}

/// Reconstructs a `width × height` image from a parallel-beam sinogram
/// (rows = angles, cols = detectors) by ramp filtering each projection in
/// the frequency domain and backprojecting with linear interpolation.
pub fn fbp<T: Scalar>(
    sinogram: &DataVector<T>,
    geometry: &RadonGeometry,
    width: usize,
    height: usize,
) -> Result<Image<T>> {
    let (na, nd) = (geometry.num_angles, geometry.num_detectors);
    if sinogram.shape() != (na, nd) {
        return Err(Error::dims(
            format!("{na}x{nd} sinogram"),
            format!("{}x{} sinogram", sinogram.rows(), sinogram.cols()),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::param("dimensions", "width and height must be positive"));
    }
    let d = geometry.detector_spacing;
    // zero padding limits circular wraparound of the filter
    let padded = (2 * nd).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(padded);
    let inv = planner.plan_fft_inverse(padded);
    let mut kernel = ram_lak::<T>(padded, d);
    fwd.process(&mut kernel);

    let scale = T::of(d) / T::of_usize(padded);
    let filtered: Vec<Vec<T>> = sinogram
        .values()
        .par_chunks(nd)
        .map(|proj| {
            let mut buf: Vec<Complex<T>> = proj
                .iter()
                .map(|&v| Complex::new(v, T::zero()))
                .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
                .take(padded)
                .collect();
            fwd.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(&kernel) {
                *b = *b * *k;
            }
            inv.process(&mut buf);
            buf[..nd].iter().map(|c| c.re * scale).collect()
        })
        .collect();

    let trig: Vec<(f64, f64)> = geometry.angles().iter().map(|a| (a.cos(), a.sin())).collect();
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    let centre = (nd as f64 - 1.0) / 2.0;
    let weight = T::of(std::f64::consts::PI / na as f64);
    let mut out = Image::zeros(width, height);
    out.values_mut()
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| {
            let y = i as f64 - cy;
            for (j, o) in row.iter_mut().enumerate() {
                let x = j as f64 - cx;
                let mut acc = T::zero();
                for ((c, s), q) in trig.iter().zip(&filtered) {
                    let pos = (x * c + y * s) / d + centre;
                    let p0 = pos.floor();
                    let frac = pos - p0;
                    let p0 = p0 as i64;
                    let sample = |k: i64| {
                        if k >= 0 && (k as usize) < nd {
                            q[k as usize]
                        } else {
                            T::zero()
                        }
                    };
                    acc += sample(p0) * T::of(1.0 - frac) + sample(p0 + 1) * T::of(frac);
                }
                *o = acc * weight;
            }
        });
    Ok(out)
}
