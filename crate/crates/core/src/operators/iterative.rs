//! Power iteration for `‖A‖` and Landweber iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_data, LinearOperator};
use crate::error::{Error, Result};
use crate::image::{dot, norm, DataVector, Image};
use crate::scalar::Scalar;

/// Power iteration on `AᵀA` from a seeded random start. Entry `k` holds
/// `√(Rayleigh quotient)` after `k + 1` steps.
pub fn estimate_norm_history<T, A>(op: &A, iters: usize, seed: u64) -> Vec<T>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<T> = (0..op.input_len())
        .map(|_| T::of(rng.random_range(-1.0..1.0)))
        .collect();
    let mut scratch = vec![T::zero(); op.output_len()];
    let mut y = vec![T::zero(); x.len()];
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        let nx = norm(&x);
        if nx == T::zero() {
            history.push(T::zero());
            continue;
        }
        for v in &mut x {
            *v /= nx;
        }
        op.normal(&x, &mut scratch, &mut y);
        // x is unit, so xᵀAᵀAx is the Rayleigh quotient
        let rq = dot(&x, &y).max(T::zero());
        history.push(rq.sqrt());
        std::mem::swap(&mut x, &mut y);
    }
    history
}

/// `√(Rayleigh quotient)` of `AᵀA` after `iters` power steps; deterministic per seed.
pub fn estimate_norm<T, A>(op: &A, iters: usize, seed: u64) -> T
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    estimate_norm_history(op, iters, seed)
        .last()
        .copied()
        .unwrap_or_else(T::zero)
}

/// `steps` Landweber iterations `u ← u + ‖A‖⁻² Aᵀ(f − Au)` from `u = 0`.
pub fn landweber<T, A>(op: &A, f: &DataVector<T>, steps: usize) -> Result<Image<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    check_data(op, f)?;
    let (w, h) = op.input_dims();
    let mut u = Image::zeros(w, h);
    if steps == 0 {
        return Ok(u);
    }
    let norm_a = op.norm();
    if norm_a == T::zero() {
        return Ok(u);
    }
    if !norm_a.is_finite() {
        return Err(Error::param("operator", "norm estimate is not finite"));
    }
    let tau = T::one() / (norm_a * norm_a);
    let mut residual = vec![T::zero(); op.output_len()];
    let mut grad = vec![T::zero(); op.input_len()];
    for _ in 0..steps {
        op.forward(u.values(), &mut residual);
        for (r, &fi) in residual.iter_mut().zip(f.values()) {
            *r = fi - *r;
        }
        op.backward(&residual, &mut grad);
        for (ui, &g) in u.values_mut().iter_mut().zip(&grad) {
            *ui += tau * g;
        }
    }
    Ok(u)
}
