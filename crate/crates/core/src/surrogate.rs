//! Forward and backward steps of the surrogate iteration, shared by both
//! algorithms. Residuals `Au_s − f` are carried between steps so every
//! iteration applies `A` and `Aᵀ` once per component.

use rayon::prelude::*;

use crate::coupling::CouplingScheme;
use crate::direction::DirectionModel;
use crate::directional::{extract_lines, solve_directional_on, LinePath};
use crate::energy::{split_weighted_jumps, RelaxedEnergy};
use crate::error::{Error, Result};
use crate::image::{distance, squared_distance, DataVector, Image, SplitStack};
use crate::operators::{check_data, LinearOperator};
use crate::scalar::Scalar;

pub(crate) struct Surrogate<'a, T: Scalar, A: LinearOperator<T> + ?Sized> {
    op: &'a A,
    f: &'a DataVector<T>,
    gamma: f64,
    model: &'a DirectionModel,
    scheme: &'a CouplingScheme,
    lines: Vec<Vec<LinePath>>,
    pairs: Vec<(usize, usize, f64)>,
}

impl<'a, T: Scalar, A: LinearOperator<T> + ?Sized> Surrogate<'a, T, A> {
    pub(crate) fn new(
        op: &'a A,
        f: &'a DataVector<T>,
        gamma: f64,
        model: &'a DirectionModel,
        scheme: &'a CouplingScheme,
    ) -> Result<Self> {
        check_data(op, f)?;
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", "must be positive and finite"));
        }
        if scheme.size() != model.len() {
            return Err(Error::dims(
                format!("coupling of size {}", model.len()),
                format!("coupling of size {}", scheme.size()),
            ));
        }
        let (w, h) = op.input_dims();
        let lines = model.directions().iter().map(|&a| extract_lines(w, h, a)).collect();
        Ok(Self {
            op,
            f,
            gamma,
            model,
            scheme,
            lines,
            pairs: scheme.pairs(),
        })
    }

    pub(crate) fn size(&self) -> usize {
        self.model.len()
    }

    pub(crate) fn check(&self, stack: &SplitStack<T>) -> Result<()> {
        if stack.len() != self.size() {
            return Err(Error::dims(
                format!("{} components", self.size()),
                format!("{} components", stack.len()),
            ));
        }
        if stack.dims() != self.op.input_dims() {
            let (w, h) = self.op.input_dims();
            let (sw, sh) = stack.dims();
            return Err(Error::dims(format!("{w}x{h} components"), format!("{sw}x{sh} components")));
        }
        Ok(())
    }

    /// `Au_s − f` for every component.
    pub(crate) fn residuals(&self, stack: &SplitStack<T>) -> Vec<Vec<T>> {
        let fv = self.f.values();
        stack
            .components()
            .par_iter()
            .map(|u| {
                let mut r = vec![T::zero(); self.op.output_len()];
                self.op.forward(u.values(), &mut r);
                for (ri, &fi) in r.iter_mut().zip(fv) {
                    *ri -= fi;
                }
                r
            })
            .collect()
    }

    /// `h_s = u_s − (1/(S L²)) Aᵀ(Au_s − f) − Σ_{s'≠s} (ρc_{s,s'}/L²)(u_s − u_{s'})`
    pub(crate) fn forward(&self, stack: &SplitStack<T>, residuals: &[Vec<T>], rho: f64, l: f64) -> SplitStack<T> {
        let s_count = self.size();
        let data_step = T::of(1.0 / (s_count as f64 * l * l));
        let comps = stack.components();
        let out: Vec<Image<T>> = (0..s_count)
            .into_par_iter()
            .map(|s| {
                let mut h = comps[s].clone();
                let mut grad = vec![T::zero(); h.len()];
                self.op.backward(&residuals[s], &mut grad);
                for (hi, &gi) in h.values_mut().iter_mut().zip(&grad) {
                    *hi -= data_step * gi;
                }
                for t in 0..s_count {
                    let c = self.scheme.weight(s, t);
                    if t == s || c == 0.0 {
                        continue;
                    }
                    let k = T::of(rho * c / (l * l));
                    let us = comps[s].values();
                    for ((hi, &a), &b) in h.values_mut().iter_mut().zip(us).zip(comps[t].values()) {
                        *hi -= k * (a - b);
                    }
                }
                h
            })
            .collect();
        SplitStack::new(out).expect("components share dimensions")
    }

    /// Component `s` becomes the directional Potts minimizer of `h_s` with
    /// penalty `γω_s/L²`.
    pub(crate) fn backward(&self, h: &SplitStack<T>, l: f64) -> SplitStack<T> {
        let out: Vec<Image<T>> = h
            .components()
            .par_iter()
            .enumerate()
            .map(|(s, hs)| {
                let gp = self.gamma * self.model.weight(s) / (l * l);
                solve_directional_on(hs, &self.lines[s], gp).expect("penalty validated at construction")
            })
            .collect();
        SplitStack::new(out).expect("components share dimensions")
    }

    pub(crate) fn energy(&self, stack: &SplitStack<T>, residuals: &[Vec<T>], rho: f64) -> RelaxedEnergy {
        let data: f64 = residuals
            .iter()
            .map(|r| r.iter().fold(0.0, |acc, &x| acc + x.to_f64_lossy().powi(2)))
            .sum::<f64>()
            / self.size() as f64;
        RelaxedEnergy {
            data,
            jumps: self.gamma * split_weighted_jumps(stack, self.model),
            coupling: rho * self.coupling_defect(stack),
        }
    }

    /// `Σ_{s<s'} c_{s,s'}‖u_s − u_{s'}‖²`
    pub(crate) fn coupling_defect(&self, stack: &SplitStack<T>) -> f64 {
        self.pairs
            .iter()
            .map(|&(s, t, c)| {
                c * squared_distance(stack.component(s).values(), stack.component(t).values()).to_f64_lossy()
            })
            .sum()
    }

    /// `max_{c_{s,s'}>0} ‖u_s − u_{s'}‖`
    pub(crate) fn max_pair_distance(&self, stack: &SplitStack<T>) -> f64 {
        self.pairs
            .iter()
            .map(|&(s, t, _)| distance(stack.component(s).values(), stack.component(t).values()).to_f64_lossy())
            .fold(0.0, f64::max)
    }

    /// `max_{c_{s,s'}>0} √c_{s,s'}‖u_s − u_{s'}‖`
    pub(crate) fn max_weighted_pair_distance(&self, stack: &SplitStack<T>) -> f64 {
        self.pairs
            .iter()
            .map(|&(s, t, c)| {
                c.sqrt() * distance(stack.component(s).values(), stack.component(t).values()).to_f64_lossy()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }
}

/// `L^λ = L[λ + (1 − (n+1)^{−1/2})(1 − λ)]`, growing from `λL` towards `L`.
pub fn relaxed_step(l: f64, lambda: f64, n: usize) -> f64 {
    let decay = 1.0 - 1.0 / ((n + 1) as f64).sqrt();
    l * (lambda + decay * (1.0 - lambda))
}

/// `‖u − v‖` per component.
pub(crate) fn increments<T: Scalar>(a: &SplitStack<T>, b: &SplitStack<T>) -> Vec<f64> {
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| distance(x.values(), y.values()).to_f64_lossy())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxed_step_schedule() {
        assert_eq!(relaxed_step(2.0, 1.0, 0), 2.0);
        assert_eq!(relaxed_step(2.0, 1.0, 17), 2.0);
        assert!((relaxed_step(2.0, 0.4, 0) - 0.8).abs() < 1e-15);
        // n = 3: 1 − 1/2 = 1/2, so λ + (1 − λ)/2 = 0.7
        assert!((relaxed_step(2.0, 0.4, 3) - 1.4).abs() < 1e-15);
        let mut prev = 0.0;
        for n in 0..100 {
            let l = relaxed_step(1.0, 0.11, n);
            assert!(l >= prev && l <= 1.0);
            prev = l;
        }
    }
}
