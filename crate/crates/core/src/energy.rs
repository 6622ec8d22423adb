//! Potts energy and its quadratic-penalty relaxation over split variables.

use crate::coupling::CouplingScheme;
use crate::direction::{jump_count, weighted_jumps, DirectionModel};
use crate::error::{Error, Result};
use crate::image::{squared_distance, DataVector, Image, SplitStack};
use crate::operators::{check_data, LinearOperator};
use crate::scalar::Scalar;

/// `‖Au − f‖² + γ Σ_s ω_s ‖∇_{a_s} u‖₀`
pub fn potts_energy<T, A>(
    op: &A,
    f: &DataVector<T>,
    u: &Image<T>,
    gamma: f64,
    model: &DirectionModel,
) -> Result<f64>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    check_data(op, f)?;
    let au = op.apply(u)?;
    let fit = squared_distance(au.values(), f.values()).to_f64_lossy();
    Ok(fit + gamma * weighted_jumps(u, model))
}

/// `Σ_s ω_s ‖∇_{a_s} u_s‖₀`
pub fn split_weighted_jumps<T: Scalar>(stack: &SplitStack<T>, model: &DirectionModel) -> f64 {
    stack
        .components()
        .iter()
        .zip(model.directions().iter().zip(model.weights()))
        .map(|(u, (&a, &w))| w * jump_count(u, a) as f64)
        .sum()
}

/// `Σ_{s<s'} c_{s,s'} ‖u_s − u_{s'}‖²`
pub fn coupling_defect<T: Scalar>(stack: &SplitStack<T>, scheme: &CouplingScheme) -> f64 {
    scheme
        .pairs()
        .into_iter()
        .map(|(s, t, c)| {
            c * squared_distance(stack.component(s).values(), stack.component(t).values())
                .to_f64_lossy()
        })
        .sum()
}

/// Components of the relaxed energy, kept apart for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedEnergy {
    /// `Σ_s S⁻¹‖Au_s − f‖²`
    pub data: f64,
    /// `γ Σ_s ω_s ‖∇_{a_s} u_s‖₀`
    pub jumps: f64,
    /// `ρ Σ_{s<s'} c_{s,s'}‖u_s − u_{s'}‖²`
    pub coupling: f64,
}

impl RelaxedEnergy {
    pub fn total(&self) -> f64 {
        self.data + self.jumps + self.coupling
    }
}

pub(crate) fn check_stack<T: Scalar>(
    stack: &SplitStack<T>,
    model: &DirectionModel,
    scheme: &CouplingScheme,
) -> Result<()> {
    if stack.len() != model.len() || scheme.size() != model.len() {
        return Err(Error::dims(
            format!("{} split variables", model.len()),
            format!("{} components / coupling size {}", stack.len(), scheme.size()),
        ));
    }
    Ok(())
}

/// Relaxed energy with its three parts.
pub fn relaxed_energy_parts<T, A>(
    op: &A,
    f: &DataVector<T>,
    stack: &SplitStack<T>,
    gamma: f64,
    rho: f64,
    scheme: &CouplingScheme,
    model: &DirectionModel,
) -> Result<RelaxedEnergy>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    check_stack(stack, model, scheme)?;
    check_data(op, f)?;
    let mut data = 0.0;
    for u in stack.components() {
        let au = op.apply(u)?;
        data += squared_distance(au.values(), f.values()).to_f64_lossy();
    }
    data /= stack.len() as f64;
    Ok(RelaxedEnergy {
        data,
        jumps: gamma * split_weighted_jumps(stack, model),
        coupling: rho * coupling_defect(stack, scheme),
    })
}

/// `Σ_s S⁻¹‖Au_s − f‖² + γ Σ_s ω_s‖∇_{a_s}u_s‖₀ + ρ Σ_{s<s'} c_{s,s'}‖u_s − u_{s'}‖²`
pub fn relaxed_energy<T, A>(
    op: &A,
    f: &DataVector<T>,
    stack: &SplitStack<T>,
    gamma: f64,
    rho: f64,
    scheme: &CouplingScheme,
    model: &DirectionModel,
) -> Result<f64>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    relaxed_energy_parts(op, f, stack, gamma, rho, scheme, model).map(|e| e.total())
}
