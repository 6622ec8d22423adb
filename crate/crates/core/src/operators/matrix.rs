use super::{LinearOperator, NormCache};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense matrix acting on row-major flattened images.
#[derive(Debug, Clone)]
pub struct MatrixOperator<T> {
    width: usize,
    height: usize,
    out_rows: usize,
    out_cols: usize,
    /// `(out_rows·out_cols) × (width·height)`, row-major.
    entries: Vec<T>,
    norm: NormCache<T>,
}

impl<T: Scalar> MatrixOperator<T> {
    pub fn new(
        width: usize,
        height: usize,
        out_rows: usize,
        out_cols: usize,
        entries: Vec<T>,
    ) -> Result<Self> {
        let n = width * height;
        let m = out_rows * out_cols;
        if n == 0 || m == 0 {
            return Err(Error::param("dimensions", "operator spaces must be non-empty"));
        }
        if entries.len() != n * m {
            return Err(Error::dims(format!("{} entries", n * m), format!("{} entries", entries.len())));
        }
        Ok(Self {
            width,
            height,
            out_rows,
            out_cols,
            entries,
            norm: NormCache::default(),
        })
    }

    /// Square operator `factor · I` on `width × height` images.
    pub fn scaled_identity(width: usize, height: usize, factor: T) -> Self {
        let n = width * height;
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = factor;
        }
        Self::new(width, height, height, width, entries).expect("consistent dimensions")
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }
}

impl<T: Scalar> LinearOperator<T> for MatrixOperator<T> {
    fn input_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.out_rows, self.out_cols)
    }

    fn forward(&self, u: &[T], out: &mut [T]) {
        let n = u.len();
        for (o, row) in out.iter_mut().zip(self.entries.chunks(n)) {
            *o = row.iter().zip(u).fold(T::zero(), |acc, (&a, &x)| acc + a * x);
        }
    }

    fn backward(&self, v: &[T], out: &mut [T]) {
        let n = out.len();
        out.fill(T::zero());
        for (&vi, row) in v.iter().zip(self.entries.chunks(n)) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
    }

    fn norm(&self) -> T {
        self.norm.get_or_estimate(self)
    }
}
