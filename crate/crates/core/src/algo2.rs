//! Increasing-penalty method for the constrained problem `u₁ = … = u_S`.
//!
//! Outer step `k` runs surrogate iterations at `ρ_k = τᵏρ₀` until
//!
//! ```text
//! ‖u_s − u_{s'}‖ ≤ t/(ρ_k√c_{s,s'})   and   ‖u_sⁿ − u_sⁿ⁻¹‖ ≤ δ_k/L_ρ,   δ_k = 1/(ηρ_k),
//! ```
//!
//! and the final stack is projected onto a feasible piecewise-constant image.

use std::io::Write;

use crate::algo1::Initialization;
use crate::coupling::{choose_t, l_rho, CouplingKind, CouplingScheme};
use crate::direction::DirectionModel;
use crate::error::{Error, Result};
use crate::image::{relative_change, DataVector, Image, SplitStack};
use crate::operators::LinearOperator;
use crate::projection::{project, Partition};
use crate::scalar::Scalar;
use crate::surrogate::{increments, relaxed_step, Surrogate};

/// Step relaxation `λ` tuned per application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaPreset {
    GaussianBlur,
    MotionBlur,
    Radon,
    Segmentation,
}

impl LambdaPreset {
    pub fn lambda(self) -> f64 {
        match self {
            Self::GaussianBlur => 0.35,
            Self::MotionBlur => 0.25,
            Self::Radon => 0.11,
            Self::Segmentation => 0.55,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Algo2Config {
    pub gamma: f64,
    pub scheme: CouplingScheme,
    pub model: DirectionModel,
    pub rho0: f64,
    pub tau: f64,
    pub eta: f64,
    pub lambda: f64,
    pub outer_max: usize,
    pub inner_max: usize,
    pub final_tol: f64,
    /// Scales `t` above its smallest admissible value; at least 1.
    pub t_multiplier: f64,
}

impl Algo2Config {
    pub fn new(gamma: f64, scheme: CouplingScheme, model: DirectionModel) -> Self {
        let eta = match scheme.kind() {
            CouplingKind::Cyclic => 0.98,
            CouplingKind::Full | CouplingKind::General => 0.95,
        };
        Self {
            gamma,
            scheme,
            model,
            rho0: 1e-3,
            tau: 1.05,
            eta,
            lambda: LambdaPreset::GaussianBlur.lambda(),
            outer_max: 1000,
            inner_max: 100_000,
            final_tol: 1e-6,
            t_multiplier: 1.0,
        }
    }

    pub fn with_preset(mut self, preset: LambdaPreset) -> Self {
        self.lambda = preset.lambda();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::param("gamma", "must be positive and finite"));
        }
        if !(self.rho0 > 0.0) || !self.rho0.is_finite() {
            return Err(Error::param("rho0", "must be positive and finite"));
        }
        if !(self.tau > 1.0) || !self.tau.is_finite() {
            return Err(Error::param("tau", "must exceed 1"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::param("eta", "must lie in (0, 1)"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param("lambda", "must lie in (0, 1]"));
        }
        if !(self.final_tol >= 0.0) {
            return Err(Error::param("final_tol", "must be nonnegative"));
        }
        if !(self.t_multiplier >= 1.0) || !self.t_multiplier.is_finite() {
            return Err(Error::param("t_multiplier", "must be at least 1"));
        }
        if self.scheme.size() != self.model.len() {
            return Err(Error::dims(
                format!("coupling of size {}", self.model.len()),
                format!("coupling of size {}", self.scheme.size()),
            ));
        }
        Ok(())
    }
}

/// Summary of one outer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterRecord {
    pub k: usize,
    pub n_inner: usize,
    pub rho: f64,
    pub delta: f64,
    pub l_rho: f64,
    /// Relaxed energy at `ρ_k` of the inner-loop result.
    pub energy: f64,
    pub max_pair_distance: f64,
    /// `max √c_{s,s'}‖u_s − u_{s'}‖` at return.
    pub max_weighted_pair_distance: f64,
    /// `max_s ‖u_sⁿ − u_sⁿ⁻¹‖` of the last inner step.
    pub max_increment: f64,
    /// `‖u₁ − u₂‖/(‖u₁‖ + ‖u₂‖)`
    pub rel_distance: f64,
    /// The inner loop stopped at `inner_max` without meeting its bounds.
    pub inner_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Algo2Trace {
    pub records: Vec<OuterRecord>,
}

impl Algo2Trace {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,n_inner,rho,delta,energy,max_pair_distance")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{:e},{:e},{:e},{:e}",
                r.k, r.n_inner, r.rho, r.delta, r.energy, r.max_pair_distance
            )?;
        }
        Ok(())
    }

    pub fn inner_exhausted(&self) -> bool {
        self.records.iter().any(|r| r.inner_exhausted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo2Status {
    Converged,
    OuterMaxReached,
}

#[derive(Debug, Clone)]
pub struct Algo2Result<T> {
    /// Projected, exactly piecewise-constant output.
    pub image: Image<T>,
    pub partition: Partition,
    /// Components before projection.
    pub stack: SplitStack<T>,
    pub trace: Algo2Trace,
    pub status: Algo2Status,
    pub t: f64,
    pub norm_a: f64,
}

/// Result of one inner loop.
#[derive(Debug, Clone)]
pub struct InnerOutcome<T> {
    pub stack: SplitStack<T>,
    pub iterations: usize,
    pub exhausted: bool,
    /// `‖u_sⁿ − u_sⁿ⁻¹‖` of the last step taken, or the carried-in values.
    pub increments: Option<Vec<f64>>,
}

struct InnerParams {
    rho: f64,
    delta: f64,
    t: f64,
    l: f64,
    lambda: f64,
    inner_max: usize,
}

fn inner_loop_on<T, A>(
    engine: &Surrogate<'_, T, A>,
    mut stack: SplitStack<T>,
    mut residuals: Vec<Vec<T>>,
    mut incs: Option<Vec<f64>>,
    p: &InnerParams,
) -> (InnerOutcome<T>, Vec<Vec<T>>)
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    let pair_bound = p.t / p.rho;
    let inc_bound = p.delta / p.l;
    let mut n = 0;
    let exhausted = loop {
        let pairs_ok = engine.max_weighted_pair_distance(&stack) <= pair_bound;
        let inc_ok = incs.as_ref().is_some_and(|v| v.iter().all(|&d| d <= inc_bound));
        if pairs_ok && inc_ok {
            break false;
        }
        if n == p.inner_max {
            break true;
        }
        let step_l = relaxed_step(p.l, p.lambda, n);
        let h = engine.forward(&stack, &residuals, p.rho, step_l);
        let next = engine.backward(&h, step_l);
        incs = Some(increments(&next, &stack));
        stack = next;
        residuals = engine.residuals(&stack);
        n += 1;
    };
    (
        InnerOutcome {
            stack,
            iterations: n,
            exhausted,
            increments: incs,
        },
        residuals,
    )
}

/// Surrogate iterations at fixed `ρ_k` until both termination bounds hold.
/// `previous` carries the increments of the step that produced `state`;
/// without it at least one step is taken.
#[allow(clippy::too_many_arguments)]
pub fn inner_loop<T, A>(
    op: &A,
    f: &DataVector<T>,
    cfg: &Algo2Config,
    state: SplitStack<T>,
    rho_k: f64,
    delta_k: f64,
    t: f64,
    previous: Option<Vec<f64>>,
) -> Result<InnerOutcome<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    cfg.validate()?;
    let engine = Surrogate::new(op, f, cfg.gamma, &cfg.model, &cfg.scheme)?;
    engine.check(&state)?;
    let l = l_rho(op.norm().to_f64_lossy(), rho_k, &cfg.scheme);
    let residuals = engine.residuals(&state);
    let params = InnerParams {
        rho: rho_k,
        delta: delta_k,
        t,
        l,
        lambda: cfg.lambda,
        inner_max: cfg.inner_max,
    };
    Ok(inner_loop_on(&engine, state, residuals, previous, &params).0)
}

/// Runs the method from `Aᵀf` in every component.
pub fn run_algo2<T, A>(op: &A, f: &DataVector<T>, cfg: &Algo2Config) -> Result<Algo2Result<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    run_algo2_with(op, f, cfg, &Initialization::Adjoint, |_| {})
}

/// Runs the method from `init`, calling `observe` after every outer step.
pub fn run_algo2_with<T, A, F>(
    op: &A,
    f: &DataVector<T>,
    cfg: &Algo2Config,
    init: &Initialization<T>,
    mut observe: F,
) -> Result<Algo2Result<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
    F: FnMut(&OuterRecord),
{
    cfg.validate()?;
    let engine = Surrogate::new(op, f, cfg.gamma, &cfg.model, &cfg.scheme)?;
    let norm_a = op.norm().to_f64_lossy();
    let t = choose_t(&cfg.scheme, norm_a, f.norm().to_f64_lossy())? * cfg.t_multiplier;

    let mut stack = init.materialize(op, f, cfg.model.len())?;
    engine.check(&stack)?;
    let mut residuals = engine.residuals(&stack);
    let mut incs = None;
    let mut rho = cfg.rho0;
    let mut trace = Algo2Trace::default();
    let mut status = Algo2Status::OuterMaxReached;

    for k in 0..cfg.outer_max {
        let delta = 1.0 / (cfg.eta * rho);
        let l = l_rho(norm_a, rho, &cfg.scheme);
        let params = InnerParams {
            rho,
            delta,
            t,
            l,
            lambda: cfg.lambda,
            inner_max: cfg.inner_max,
        };
        let (outcome, res) = inner_loop_on(&engine, stack, residuals, incs, &params);
        residuals = res;
        stack = outcome.stack;
        incs = outcome.increments;
        let second = 1.min(stack.len() - 1);
        let rel = relative_change(stack.component(0).values(), stack.component(second).values()).to_f64_lossy();
        trace.records.push(OuterRecord {
            k,
            n_inner: outcome.iterations,
            rho,
            delta,
            l_rho: l,
            energy: engine.energy(&stack, &residuals, rho).total(),
            max_pair_distance: engine.max_pair_distance(&stack),
            max_weighted_pair_distance: engine.max_weighted_pair_distance(&stack),
            max_increment: incs.as_ref().map_or(f64::INFINITY, |v| v.iter().copied().fold(0.0, f64::max)),
            rel_distance: rel,
            inner_exhausted: outcome.exhausted,
        });
        observe(trace.records.last().expect("just pushed"));
        if rel < cfg.final_tol {
            status = Algo2Status::Converged;
            break;
        }
        rho *= cfg.tau;
    }
    let (image, partition) = project(&stack, &cfg.model)?;
    Ok(Algo2Result {
        image,
        partition,
        stack,
        trace,
        status,
        t,
        norm_a,
    })
}
