//! Forward operators `A` with exact adjoints.

mod convolution;
mod fbp;
mod identity;
mod iterative;
mod matrix;
mod radon;

use std::sync::OnceLock;

pub use convolution::{gaussian_kernel, ConvolutionOperator};
pub use fbp::fbp;
pub use identity::IdentityOperator;
pub use iterative::{estimate_norm, estimate_norm_history, landweber};
pub use matrix::MatrixOperator;
pub use radon::{RadonGeometry, RadonOperator};

use crate::error::{Error, Result};
use crate::image::{DataVector, Image};
use crate::scalar::Scalar;

/// Power-iteration settings used when an operator caches its own norm.
pub const NORM_ITERATIONS: usize = 100;
pub const NORM_SEED: u64 = 0x5eed;

/// Linear map from `width × height` images to a `rows × cols` data grid.
///
/// Implementors provide slice-level `forward`/`backward`; `backward` must be
/// the exact transpose of `forward`.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    /// `(width, height)` of the image space.
    fn input_dims(&self) -> (usize, usize);

    /// `(rows, cols)` of the data space.
    fn output_shape(&self) -> (usize, usize);

    fn forward(&self, u: &[T], out: &mut [T]);

    fn backward(&self, v: &[T], out: &mut [T]);

    /// Spectral norm `‖A‖`, estimated once and cached.
    fn norm(&self) -> T;

    fn apply(&self, u: &Image<T>) -> Result<DataVector<T>> {
        let (w, h) = self.input_dims();
        if u.dims() != (w, h) {
            return Err(Error::dims(
                format!("{w}x{h} image"),
                format!("{}x{} image", u.width(), u.height()),
            ));
        }
        let (rows, cols) = self.output_shape();
        let mut out = DataVector::zeros(rows, cols);
        self.forward(u.values(), out.values_mut());
        Ok(out)
    }

    fn adjoint(&self, v: &DataVector<T>) -> Result<Image<T>> {
        let (rows, cols) = self.output_shape();
        if v.shape() != (rows, cols) {
            return Err(Error::dims(
                format!("{rows}x{cols} data"),
                format!("{}x{} data", v.rows(), v.cols()),
            ));
        }
        let (w, h) = self.input_dims();
        let mut out = Image::zeros(w, h);
        self.backward(v.values(), out.values_mut());
        Ok(out)
    }

    /// `AᵀA u` into `out`, using `scratch` for the data-space intermediate.
    fn normal(&self, u: &[T], scratch: &mut [T], out: &mut [T]) {
        self.forward(u, scratch);
        self.backward(scratch, out);
    }

    fn input_len(&self) -> usize {
        let (w, h) = self.input_dims();
        w * h
    }

    fn output_len(&self) -> usize {
        let (r, c) = self.output_shape();
        r * c
    }
}

/// Lazily computed operator norm.
#[derive(Debug, Default)]
pub(crate) struct NormCache<T>(OnceLock<T>);

impl<T: Scalar> NormCache<T> {
    pub(crate) fn get_or_estimate<A: LinearOperator<T> + ?Sized>(&self, op: &A) -> T {
        *self
            .0
            .get_or_init(|| estimate_norm(op, NORM_ITERATIONS, NORM_SEED))
    }
}

impl<T: Clone> Clone for NormCache<T> {
    fn clone(&self) -> Self {
        let cell = OnceLock::new();
        if let Some(v) = self.0.get() {
            let _ = cell.set(v.clone());
        }
        Self(cell)
    }
}

/// Checks that a data vector fits the operator's output grid.
pub fn check_data<T: Scalar, A: LinearOperator<T> + ?Sized>(op: &A, f: &DataVector<T>) -> Result<()> {
    let shape = op.output_shape();
    if f.shape() != shape {
        return Err(Error::dims(
            format!("{}x{} data", shape.0, shape.1),
            format!("{}x{} data", f.rows(), f.cols()),
        ));
    }
    Ok(())
}
