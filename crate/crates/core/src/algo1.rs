//! Surrogate (forward-backward) iteration for the quadratic penalty
//! relaxation
//!
//! ```text
//! min Σ_s S⁻¹‖Au_s − f‖² + γω_s‖∇_{a_s}u_s‖₀ + ρ Σ_{s<s'} c_{s,s'}‖u_s − u_{s'}‖².
//! ```

use std::io::Write;

use crate::coupling::{choose_rho, l_rho, CouplingScheme};
use crate::direction::DirectionModel;
use crate::error::{Error, Result};
use crate::image::{relative_change, DataVector, Image, SplitStack};
use crate::operators::{landweber, LinearOperator};
use crate::scalar::Scalar;
use crate::surrogate::{increments, relaxed_step, Surrogate};

/// `λ` used for deblurring with full coupling.
pub const DEFAULT_LAMBDA: f64 = 0.4;
/// Landweber steps of the default initialization.
pub const LANDWEBER_STEPS: usize = 1000;
/// Factor applied to the estimated `‖A‖` in strict mode; power iteration
/// approaches the norm from below.
pub const STRICT_NORM_MARGIN: f64 = 1.01;

/// Starting point of an iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization<T> {
    /// `landweber(A, f, steps)` in every component.
    Landweber(usize),
    Zero,
    /// `Aᵀf` in every component.
    Adjoint,
    Image(Image<T>),
    Stack(SplitStack<T>),
}

impl<T: Scalar> Initialization<T> {
    pub(crate) fn materialize<A: LinearOperator<T> + ?Sized>(
        &self,
        op: &A,
        f: &DataVector<T>,
        s: usize,
    ) -> Result<SplitStack<T>> {
        let (w, h) = op.input_dims();
        let stack = match self {
            Self::Landweber(steps) => SplitStack::broadcast(&landweber(op, f, *steps)?, s),
            Self::Zero => SplitStack::broadcast(&Image::zeros(w, h), s),
            Self::Adjoint => SplitStack::broadcast(&op.adjoint(f)?, s),
            Self::Image(img) => SplitStack::broadcast(img, s),
            Self::Stack(st) => st.clone(),
        };
        Ok(stack)
    }
}

/// How the closeness of the components is judged at termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Nearness {
    /// `Σ_{s<s'} c_{s,s'}‖u_s − u_{s'}‖² ≤ ε²`
    #[default]
    Aggregate,
    /// `c_{s,s'}‖u_s − u_{s'}‖² < ε²` for each coupled pair.
    PerPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Algo1Config {
    pub gamma: f64,
    pub epsilon: f64,
    pub scheme: CouplingScheme,
    pub model: DirectionModel,
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_change_tol: f64,
    /// `λ = 1` and an inflated `‖A‖`, so each step provably decreases the
    /// relaxed energy.
    pub strict_mode: bool,
    pub nearness: Nearness,
}

impl Algo1Config {
    pub fn new(gamma: f64, epsilon: f64, scheme: CouplingScheme, model: DirectionModel) -> Self {
        Self {
            gamma,
            epsilon,
            scheme,
            model,
            lambda: DEFAULT_LAMBDA,
            max_iters: 5000,
            rel_change_tol: 1e-6,
            strict_mode: false,
            nearness: Nearness::Aggregate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::param("gamma", "must be positive and finite"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::param("epsilon", "must be positive and finite"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param("lambda", "must lie in (0, 1]"));
        }
        if !(self.rel_change_tol >= 0.0) {
            return Err(Error::param("rel_change_tol", "must be nonnegative"));
        }
        if self.scheme.size() != self.model.len() {
            return Err(Error::dims(
                format!("coupling of size {}", self.model.len()),
                format!("coupling of size {}", self.scheme.size()),
            ));
        }
        Ok(())
    }

    fn effective_lambda(&self) -> f64 {
        if self.strict_mode {
            1.0
        } else {
            self.lambda
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Relaxed energy of the new iterate.
    pub energy: f64,
    pub max_pair_distance: f64,
    /// `Σ_{s<s'} c_{s,s'}‖u_s − u_{s'}‖²`
    pub coupling_defect: f64,
    /// `‖u₁ⁿ − u₁ⁿ⁻¹‖/(‖u₁ⁿ‖ + ‖u₁ⁿ⁻¹‖)`, and the same for `u₂`.
    pub rel_change: [f64; 2],
    /// Largest `‖u_sⁿ − u_sⁿ⁻¹‖`.
    pub max_increment: f64,
    /// Step normalization used for this iteration.
    pub step_l: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub initial_energy: f64,
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Energies with the initial value first.
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.initial_energy)
            .chain(self.records.iter().map(|r| r.energy))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,energy,max_pair_distance")?;
        writeln!(out, "0,{:e},", self.initial_energy)?;
        for r in &self.records {
            writeln!(out, "{},{:e},{:e}", r.iteration, r.energy, r.max_pair_distance)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct Algo1Result<T> {
    pub stack: SplitStack<T>,
    pub trace: IterationTrace,
    pub status: Status,
    pub rho: f64,
    pub l_rho: f64,
    /// `‖A‖` as used for `ρ` and `L_ρ`.
    pub norm_a: f64,
}

/// State after one backward step, handed to observers.
pub struct StepView<'a, T> {
    pub iteration: usize,
    pub stack: &'a SplitStack<T>,
    pub step_l: f64,
}

/// One forward step `h_s` with explicit `ρ` and `L`.
pub fn forward_step<T, A>(
    stack: &SplitStack<T>,
    op: &A,
    f: &DataVector<T>,
    scheme: &CouplingScheme,
    rho: f64,
    l: f64,
) -> Result<SplitStack<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    // gamma and model are irrelevant to the forward step
    let model = DirectionModel::new(
        vec![crate::direction::Direction::new(0, 1)?; scheme.size()],
        vec![1.0; scheme.size()],
    )?;
    let engine = Surrogate::new(op, f, 1.0, &model, scheme)?;
    engine.check(stack)?;
    let res = engine.residuals(stack);
    Ok(engine.forward(stack, &res, rho, l))
}

/// Component `s` replaced by the minimizer of `‖u − h_s‖² + (γω_s/L²)‖∇_{a_s}u‖₀`.
pub fn backward_step<T: Scalar>(h: &SplitStack<T>, gamma: f64, model: &DirectionModel, l: f64) -> Result<SplitStack<T>> {
    if h.len() != model.len() {
        return Err(Error::dims(
            format!("{} components", model.len()),
            format!("{} components", h.len()),
        ));
    }
    let out = h
        .components()
        .iter()
        .enumerate()
        .map(|(s, hs)| crate::directional::solve_directional(hs, model.direction(s), gamma * model.weight(s) / (l * l)))
        .collect::<Result<Vec<_>>>()?;
    SplitStack::new(out)
}

/// Runs the iteration from the default Landweber initialization.
pub fn run_algo1<T, A>(op: &A, f: &DataVector<T>, cfg: &Algo1Config) -> Result<Algo1Result<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    run_algo1_with(op, f, cfg, &Initialization::Landweber(LANDWEBER_STEPS), |_| {})
}

/// Runs the iteration from `init`, calling `observe` after every step.
pub fn run_algo1_with<T, A, F>(
    op: &A,
    f: &DataVector<T>,
    cfg: &Algo1Config,
    init: &Initialization<T>,
    mut observe: F,
) -> Result<Algo1Result<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
    F: FnMut(&StepView<'_, T>),
{
    cfg.validate()?;
    let engine = Surrogate::new(op, f, cfg.gamma, &cfg.model, &cfg.scheme)?;
    let mut norm_a = op.norm().to_f64_lossy();
    if cfg.strict_mode {
        norm_a *= STRICT_NORM_MARGIN;
    }
    let norm_f = f.norm().to_f64_lossy();
    let rho = choose_rho(cfg.epsilon, &cfg.scheme, norm_a, norm_f)?;
    let l = l_rho(norm_a, rho, &cfg.scheme);
    let lambda = cfg.effective_lambda();

    let mut stack = init.materialize(op, f, cfg.model.len())?;
    engine.check(&stack)?;
    let mut res = engine.residuals(&stack);
    let mut trace = IterationTrace {
        initial_energy: engine.energy(&stack, &res, rho).total(),
        records: Vec::new(),
    };
    let mut status = Status::MaxIterations;
    let eps2 = cfg.epsilon * cfg.epsilon;

    for n in 0..cfg.max_iters {
        let step_l = relaxed_step(l, lambda, n);
        let h = engine.forward(&stack, &res, rho, step_l);
        let next = engine.backward(&h, step_l);
        observe(&StepView {
            iteration: n + 1,
            stack: &next,
            step_l,
        });
        let rel = [
            relative_change(next.component(0).values(), stack.component(0).values()).to_f64_lossy(),
            relative_change(
                next.component(1.min(next.len() - 1)).values(),
                stack.component(1.min(stack.len() - 1)).values(),
            )
            .to_f64_lossy(),
        ];
        let max_increment = increments(&next, &stack).into_iter().fold(0.0, f64::max);
        stack = next;
        res = engine.residuals(&stack);
        let energy = engine.energy(&stack, &res, rho);
        let defect = energy.coupling / rho;
        trace.records.push(IterationRecord {
            iteration: n + 1,
            energy: energy.total(),
            max_pair_distance: engine.max_pair_distance(&stack),
            coupling_defect: defect,
            rel_change: rel,
            max_increment,
            step_l,
        });
        let near = match cfg.nearness {
            Nearness::Aggregate => defect <= eps2,
            Nearness::PerPair => engine
                .pairs()
                .iter()
                .all(|&(s, t, c)| {
                    let d = crate::image::squared_distance(stack.component(s).values(), stack.component(t).values());
                    c * d.to_f64_lossy() < eps2
                }),
        };
        if near && rel[0] < cfg.rel_change_tol && rel[1] < cfg.rel_change_tol {
            status = Status::Converged;
            break;
        }
    }
    Ok(Algo1Result {
        stack,
        trace,
        status,
        rho,
        l_rho: l,
        norm_a,
    })
}

/// `c = √(γ min_s ω_s / (L²W))`: every jump of a backward-step output is at
/// least this large, `W` being the longest image side.
pub fn minimal_jump_height(gamma: f64, model: &DirectionModel, l: f64, width: usize, height: usize) -> f64 {
    let w = width.max(height) as f64;
    (gamma * model.min_weight() / (l * l * w)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::{directional_difference, DirectionKind};
    use crate::operators::{ConvolutionOperator, IdentityOperator};

    #[test]
    fn forward_step_single_pixel() {
        let op = IdentityOperator::new(1, 1);
        let f = Image::<f64>::zeros(1, 1).as_data();
        let stack = SplitStack::new(vec![Image::filled(1, 1, 1.0), Image::filled(1, 1, 0.0)]).unwrap();
        let scheme = CouplingScheme::full(2).unwrap();
        let h = forward_step(&stack, &op, &f, &scheme, 1.0, 2.0).unwrap();
        // scalar oracle: h = u − (u − f)/(S L²) − (ρ/L²)(u − u')
        let oracle = |u: f64, other: f64| u - u / (2.0 * 4.0) - (u - other) / 4.0;
        assert!((h.component(0).values()[0] - oracle(1.0, 0.0)).abs() < 1e-15);
        assert!((h.component(1).values()[0] - oracle(0.0, 1.0)).abs() < 1e-15);
        assert!((h.component(0).values()[0] - 0.625).abs() < 1e-15);
        assert!((h.component(1).values()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn forward_step_is_fixed_on_exact_equal_data() {
        let u = Image::from_fn(5, 4, |i, j| (i + 2 * j) as f64 / 7.0);
        let op = IdentityOperator::new(5, 4);
        let stack = SplitStack::broadcast(&u, 4);
        let scheme = CouplingScheme::cyclic(4).unwrap();
        let h = forward_step(&stack, &op, &u.as_data(), &scheme, 3.0, 5.0).unwrap();
        assert_eq!(h, stack);
    }

    #[test]
    fn forward_step_decouples_without_rho() {
        let op = IdentityOperator::new(3, 2);
        let f = Image::from_fn(3, 2, |i, j| (i * 3 + j) as f64).as_data();
        let a = Image::filled(3, 2, 1.0);
        let b = Image::filled(3, 2, -4.0);
        let scheme = CouplingScheme::full(2).unwrap();
        let both = forward_step(&SplitStack::new(vec![a.clone(), b]).unwrap(), &op, &f, &scheme, 0.0, 1.5).unwrap();
        let alone = forward_step(&SplitStack::new(vec![a.clone(), a]).unwrap(), &op, &f, &scheme, 0.0, 1.5).unwrap();
        assert_eq!(both.component(0), alone.component(0));
    }

    #[test]
    fn backward_step_extremes() {
        let model = DirectionModel::build(DirectionKind::Compass4);
        let h = SplitStack::broadcast(&Image::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 5) as f64), 4);
        let tiny = backward_step(&h, 1e-12, &model, 1.0).unwrap();
        assert_eq!(tiny, h);
        let huge = backward_step(&h, 1e9, &model, 1.0).unwrap();
        for (s, u) in huge.components().iter().enumerate() {
            assert!(directional_difference(u, model.direction(s)).iter().all(|&(_, d)| d.abs() < 1e-12));
        }
    }

    #[test]
    fn constant_data_converges_to_constant() {
        let op = IdentityOperator::new(6, 5);
        let f = Image::filled(6, 5, 0.3).as_data();
        let cfg = Algo1Config::new(
            0.5,
            0.01 * f.norm(),
            CouplingScheme::full(4).unwrap(),
            DirectionModel::build(DirectionKind::Compass4),
        );
        let res = run_algo1(&op, &f, &cfg).unwrap();
        assert_eq!(res.status, Status::Converged);
        for u in res.stack.components() {
            assert!(u.values().iter().all(|&v| (v - 0.3).abs() < 1e-9));
        }
    }

    #[test]
    fn strict_mode_descends_and_respects_jump_floor() {
        let (w, h) = (10, 8);
        let truth = Image::from_fn(w, h, |i, j| if i + j < 9 { 0.2 } else { 0.8 });
        let op = ConvolutionOperator::gaussian(w, h, 1.0).unwrap();
        let f = op.apply(&truth).unwrap();
        let mut cfg = Algo1Config::new(
            0.05,
            0.05 * f.norm(),
            CouplingScheme::full(4).unwrap(),
            DirectionModel::build(DirectionKind::Compass4),
        );
        cfg.strict_mode = true;
        cfg.max_iters = 300;
        let mut floor_ok = true;
        let model = cfg.model.clone();
        let res = run_algo1_with(&op, &f, &cfg, &Initialization::Landweber(100), |view| {
            let c = minimal_jump_height(cfg.gamma, &model, view.step_l, w, h) * (1.0 - 1e-6);
            for (s, u) in view.stack.components().iter().enumerate() {
                for (_, d) in directional_difference(u, model.direction(s)) {
                    if d.abs() > 1e-12 && d.abs() < c {
                        floor_ok = false;
                    }
                }
            }
        })
        .unwrap();
        assert!(floor_ok);
        let e = res.trace.energies();
        for pair in e.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-8 * (1.0 + pair[0].abs()), "{} > {}", pair[1], pair[0]);
        }
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = Algo1Config::new(
            1.0,
            1.0,
            CouplingScheme::full(2).unwrap(),
            DirectionModel::build(DirectionKind::Axes2),
        );
        cfg.lambda = 0.0;
        assert!(cfg.validate().is_err());
        cfg.lambda = 0.5;
        cfg.scheme = CouplingScheme::full(4).unwrap();
        assert!(cfg.validate().is_err());
    }
}
