//! Separable convolutions with half-sample symmetric (mirror) boundary extension.

use rayon::prelude::*;

use super::{LinearOperator, NormCache};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index into `0..n` of position `m` of the 2n-periodic mirror extension.
#[inline]
fn reflect(m: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let r = m.rem_euclid(period);
    if r >= n as i64 {
        (period - 1 - r) as usize
    } else {
        r as usize
    }
}

/// Per-output gather lists for a 1D convolution and its transpose.
#[derive(Debug, Clone)]
struct AxisTaps<T> {
    forward: Vec<Vec<(usize, T)>>,
    adjoint: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> AxisTaps<T> {
    /// `out[i] = Σ_k kernel[k] · x[reflect(i + k − origin)]`
    fn new(n: usize, kernel: &[T], origin: usize) -> Self {
        let mut forward = vec![Vec::with_capacity(kernel.len()); n];
        let mut adjoint = vec![Vec::new(); n];
        for (i, taps) in forward.iter_mut().enumerate() {
            for (k, &w) in kernel.iter().enumerate() {
                let m = reflect(i as i64 + k as i64 - origin as i64, n);
                taps.push((m, w));
                adjoint[m].push((i, w));
            }
        }
        Self { forward, adjoint }
    }

    fn is_identity(&self) -> bool {
        self.forward
            .iter()
            .enumerate()
            .all(|(i, t)| t.len() == 1 && t[0].0 == i && t[0].1 == T::one())
    }
}

fn filter_rows<T: Scalar>(taps: &[Vec<(usize, T)>], width: usize, input: &[T], out: &mut [T]) {
    out.par_chunks_mut(width)
        .zip(input.par_chunks(width))
        .for_each(|(o, x)| {
            for (oj, t) in o.iter_mut().zip(taps) {
                *oj = t.iter().fold(T::zero(), |acc, &(m, w)| acc + w * x[m]);
            }
        });
}

fn filter_cols<T: Scalar>(taps: &[Vec<(usize, T)>], width: usize, input: &[T], out: &mut [T]) {
    out.par_chunks_mut(width).enumerate().for_each(|(i, o)| {
        o.fill(T::zero());
        for &(m, w) in &taps[i] {
            let src = &input[m * width..(m + 1) * width];
            for (oj, &x) in o.iter_mut().zip(src) {
                *oj += w * x;
            }
        }
    });
}

/// `A u = k_col ⊛ (k_row ⊛ u)` on a fixed grid; the data grid has the image layout.
#[derive(Debug, Clone)]
pub struct ConvolutionOperator<T> {
    width: usize,
    height: usize,
    row_kernel: Vec<T>,
    col_kernel: Vec<T>,
    rows: AxisTaps<T>,
    cols: AxisTaps<T>,
    norm: NormCache<T>,
}

impl<T: Scalar> ConvolutionOperator<T> {
    /// Separable convolution. `row_kernel` acts along each image row (columns
    /// index), `col_kernel` along each column. Origins are the kernel taps
    /// aligned with the output pixel.
    pub fn separable(
        width: usize,
        height: usize,
        row_kernel: Vec<T>,
        row_origin: usize,
        col_kernel: Vec<T>,
        col_origin: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("dimensions", "width and height must be positive"));
        }
        if row_kernel.is_empty() || col_kernel.is_empty() {
            return Err(Error::param("kernel", "kernel must not be empty"));
        }
        if row_origin >= row_kernel.len() || col_origin >= col_kernel.len() {
            return Err(Error::param("origin", "kernel origin outside kernel"));
        }
        let rows = AxisTaps::new(width, &row_kernel, row_origin);
        let cols = AxisTaps::new(height, &col_kernel, col_origin);
        Ok(Self {
            width,
            height,
            row_kernel,
            col_kernel,
            rows,
            cols,
            norm: NormCache::default(),
        })
    }

    /// Normalized truncated Gaussian of standard deviation `sigma`, side `⌊6σ⌋ + 1` (forced odd).
    pub fn gaussian(width: usize, height: usize, sigma: f64) -> Result<Self> {
        let kernel = gaussian_kernel::<T>(sigma)?;
        let origin = kernel.len() / 2;
        Self::separable(width, height, kernel.clone(), origin, kernel, origin)
    }

    /// Horizontal `1 × length` box blur of weight `1/length`.
    pub fn motion_blur(width: usize, height: usize, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::param("length", "motion blur length must be at least 1"));
        }
        let w = T::one() / T::of_usize(length);
        Self::separable(
            width,
            height,
            vec![w; length],
            (length - 1) / 2,
            vec![T::one()],
            0,
        )
    }

    pub fn row_kernel(&self) -> &[T] {
        &self.row_kernel
    }

    pub fn col_kernel(&self) -> &[T] {
        &self.col_kernel
    }
}

/// 1D normalized Gaussian used by [`ConvolutionOperator::gaussian`].
pub fn gaussian_kernel<T: Scalar>(sigma: f64) -> Result<Vec<T>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", "must be positive"));
    }
    let mut side = (6.0 * sigma).floor() as usize + 1;
    if side % 2 == 0 {
        side += 1;
    }
    let c = (side / 2) as f64;
    let raw: Vec<f64> = (0..side)
        .map(|k| {
            let x = k as f64 - c;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| T::of(v / total)).collect())
}

impl<T: Scalar> LinearOperator<T> for ConvolutionOperator<T> {
    fn input_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn forward(&self, u: &[T], out: &mut [T]) {
        if self.cols.is_identity() {
            filter_rows(&self.rows.forward, self.width, u, out);
            return;
        }
        let mut tmp = vec![T::zero(); u.len()];
        filter_rows(&self.rows.forward, self.width, u, &mut tmp);
        filter_cols(&self.cols.forward, self.width, &tmp, out);
    }

    fn backward(&self, v: &[T], out: &mut [T]) {
        if self.cols.is_identity() {
            filter_rows(&self.rows.adjoint, self.width, v, out);
            return;
        }
        let mut tmp = vec![T::zero(); v.len()];
        filter_cols(&self.cols.adjoint, self.width, v, &mut tmp);
        filter_rows(&self.rows.adjoint, self.width, &tmp, out);
    }

    fn norm(&self) -> T {
        self.norm.get_or_estimate(self)
    }
}
