use super::LinearOperator;
use crate::scalar::Scalar;

/// `A = id` on `width × height` images; the data grid has the image layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityOperator {
    width: usize,
    height: usize,
}

impl IdentityOperator {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }
}

impl<T: Scalar> LinearOperator<T> for IdentityOperator {
    fn input_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn forward(&self, u: &[T], out: &mut [T]) {
        out.copy_from_slice(u);
    }

    fn backward(&self, v: &[T], out: &mut [T]) {
        out.copy_from_slice(v);
    }

    fn norm(&self) -> T {
        T::one()
    }
}
