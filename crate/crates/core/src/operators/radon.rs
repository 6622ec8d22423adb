//! Parallel-beam ray-driven Radon projector with bilinear sampling.

use rayon::prelude::*;

use super::{LinearOperator, NormCache};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Angles are `k·π/num_angles`, detectors centred on the rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadonGeometry {
    pub num_angles: usize,
    pub num_detectors: usize,
    pub detector_spacing: f64,
}

impl RadonGeometry {
    pub fn new(num_angles: usize, num_detectors: usize, detector_spacing: f64) -> Result<Self> {
        if num_angles == 0 || num_detectors == 0 {
            return Err(Error::param("geometry", "angle and detector counts must be positive"));
        }
        if !(detector_spacing > 0.0) || !detector_spacing.is_finite() {
            return Err(Error::param("detector_spacing", "must be positive"));
        }
        Ok(Self {
            num_angles,
            num_detectors,
            detector_spacing,
        })
    }

    /// Unit spacing with `⌈√2·max(w, h)⌉` detectors so the image diagonal is covered.
    pub fn for_image(width: usize, height: usize, num_angles: usize) -> Result<Self> {
        let detectors = (std::f64::consts::SQRT_2 * width.max(height) as f64).ceil() as usize;
        Self::new(num_angles, detectors, 1.0)
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.num_angles)
            .map(|k| k as f64 * std::f64::consts::PI / self.num_angles as f64)
            .collect()
    }

    /// Signed offset of detector bin `j` from the rotation axis.
    #[inline]
    pub fn detector_offset(&self, j: usize) -> f64 {
        (j as f64 - (self.num_detectors as f64 - 1.0) / 2.0) * self.detector_spacing
    }
}

/// Sinogram rows are angles, columns are detector bins.
///
/// The bilinear weights are assembled once into a sparse matrix and its
/// transpose, so both directions are gathers and the adjoint is the exact
/// transpose of the forward map.
#[derive(Debug, Clone)]
pub struct RadonOperator<T> {
    width: usize,
    height: usize,
    geometry: RadonGeometry,
    rays: Csr<T>,
    pixels: Csr<T>,
    norm: NormCache<T>,
}

/// Compressed rows; row `r` owns `index[ptr[r]..ptr[r + 1]]`.
#[derive(Debug, Clone)]
struct Csr<T> {
    ptr: Vec<usize>,
    index: Vec<u32>,
    weight: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    #[inline]
    fn dot(&self, row: usize, x: &[T]) -> T {
        let (a, b) = (self.ptr[row], self.ptr[row + 1]);
        self.index[a..b]
            .iter()
            .zip(&self.weight[a..b])
            .fold(T::zero(), |acc, (&i, &w)| acc + w * x[i as usize])
    }

    fn transpose(&self, columns: usize) -> Self {
        let mut ptr = vec![0usize; columns + 1];
        for &i in &self.index {
            ptr[i as usize + 1] += 1;
        }
        for k in 0..columns {
            ptr[k + 1] += ptr[k];
        }
        let mut next = ptr.clone();
        let mut index = vec![0u32; self.index.len()];
        let mut weight = vec![T::zero(); self.index.len()];
        for row in 0..self.ptr.len() - 1 {
            for k in self.ptr[row]..self.ptr[row + 1] {
                let c = self.index[k] as usize;
                index[next[c]] = row as u32;
                weight[next[c]] = self.weight[k];
                next[c] += 1;
            }
        }
        Self { ptr, index, weight }
    }
}

impl<T: Scalar> RadonOperator<T> {
    pub fn new(width: usize, height: usize, geometry: RadonGeometry) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("dimensions", "width and height must be positive"));
        }
        let npix = width * height;
        let rays_total = geometry.num_angles * geometry.num_detectors;
        if npix > u32::MAX as usize || rays_total > u32::MAX as usize {
            return Err(Error::param("dimensions", "problem too large for 32-bit indices"));
        }
        let trig: Vec<(f64, f64)> = geometry.angles().iter().map(|a| (a.cos(), a.sin())).collect();
        let diag = ((width * width + height * height) as f64).sqrt();
        let num_samples = diag.ceil() as usize + 1;
        let per_ray: Vec<Vec<(u32, f64)>> = (0..rays_total)
            .into_par_iter()
            .map(|r| {
                let (a, j) = (r / geometry.num_detectors, r % geometry.num_detectors);
                let mut entries = Vec::new();
                ray_weights(width, height, &geometry, trig[a], j, num_samples, |p, w| {
                    entries.push((p as u32, w))
                });
                entries.sort_unstable_by_key(|e| e.0);
                // samples revisit pixels; merge in sorted order
                let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
                for (p, w) in entries {
                    match merged.last_mut() {
                        Some(last) if last.0 == p => last.1 += w,
                        _ => merged.push((p, w)),
                    }
                }
                merged
            })
            .collect();
        let mut ptr = Vec::with_capacity(rays_total + 1);
        ptr.push(0);
        let mut index = Vec::new();
        let mut weight = Vec::new();
        for entries in per_ray {
            for (p, w) in entries {
                index.push(p);
                weight.push(T::of(w));
            }
            ptr.push(index.len());
        }
        let rays = Csr { ptr, index, weight };
        let pixels = rays.transpose(npix);
        Ok(Self {
            width,
            height,
            geometry,
            rays,
            pixels,
            norm: NormCache::default(),
        })
    }

    pub fn geometry(&self) -> &RadonGeometry {
        &self.geometry
    }

    /// Stored nonzero weights.
    pub fn nnz(&self) -> usize {
        self.rays.index.len()
    }
}

/// Visits the bilinear footprint of ray `(angle, detector)` as `(pixel, weight)`,
/// sampling the ray at unit spacing across the image diagonal.
fn ray_weights(
    width: usize,
    height: usize,
    geometry: &RadonGeometry,
    (c, s): (f64, f64),
    detector: usize,
    num_samples: usize,
    mut visit: impl FnMut(usize, f64),
) {
    let offset = geometry.detector_offset(detector);
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    let half = (num_samples as f64 - 1.0) / 2.0;
    let (w, h) = (width as i64, height as i64);
    for k in 0..num_samples {
        let t = k as f64 - half;
        // point = offset·θ + t·θ⊥ with θ = (cos, sin), θ⊥ = (−sin, cos)
        let x = offset * c - t * s + cx;
        let y = offset * s + t * c + cy;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        if x0 < -1 || y0 < -1 || x0 >= w || y0 >= h {
            continue;
        }
        let corners = [
            (y0, x0, (1.0 - fx) * (1.0 - fy)),
            (y0, x0 + 1, fx * (1.0 - fy)),
            (y0 + 1, x0, (1.0 - fx) * fy),
            (y0 + 1, x0 + 1, fx * fy),
        ];
        for (r, col, wgt) in corners {
            if r >= 0 && col >= 0 && r < h && col < w && wgt != 0.0 {
                visit((r * w + col) as usize, wgt);
            }
        }
    }
}

impl<T: Scalar> LinearOperator<T> for RadonOperator<T> {
    fn input_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.geometry.num_angles, self.geometry.num_detectors)
    }

    fn forward(&self, u: &[T], out: &mut [T]) {
        out.par_iter_mut().enumerate().for_each(|(r, o)| *o = self.rays.dot(r, u));
    }

    fn backward(&self, v: &[T], out: &mut [T]) {
        out.par_iter_mut().enumerate().for_each(|(p, o)| *o = self.pixels.dot(p, v));
    }

    fn norm(&self) -> T {
        self.norm.get_or_estimate(self)
    }
}
