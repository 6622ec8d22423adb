//! Coupling weights `c_{s,s'}` between splitting variables and the parameter
//! formulas that depend on them: the step normalisation `L_ρ`, the spectral
//! gap `σ₁` of `CᵀC`, the penalty `ρ` for a prescribed tolerance and the
//! inner-loop threshold `t`.
//!
//! All "strictly greater than" bounds are realised with a fixed relative slack
//! ([`L_RHO_SLACK`], [`PARAMETER_SLACK`]).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative margin applied to `L_ρ` above its spectral bound.
pub const L_RHO_SLACK: f64 = 1e-9;
/// Relative margin applied to `ρ` and `t` above their lower bounds.
pub const PARAMETER_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// Every pair coupled with weight 1.
    Full,
    /// Consecutive variables coupled, `S` wraps to 1.
    Cyclic,
    /// Arbitrary nonnegative weights.
    General,
}

/// Symmetric nonnegative pair weights over `S ≥ 2` splitting variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingScheme {
    kind: CouplingKind,
    size: usize,
    /// Row-major `S × S`, symmetric, zero diagonal.
    weights: Vec<f64>,
}

impl CouplingScheme {
    pub fn full(size: usize) -> Result<Self> {
        Self::check_size(size)?;
        let mut weights = vec![1.0; size * size];
        for s in 0..size {
            weights[s * size + s] = 0.0;
        }
        Ok(Self {
            kind: CouplingKind::Full,
            size,
            weights,
        })
    }

    pub fn cyclic(size: usize) -> Result<Self> {
        Self::check_size(size)?;
        let mut weights = vec![0.0; size * size];
        for s in 0..size {
            let next = (s + 1) % size;
            weights[s * size + next] = 1.0;
            weights[next * size + s] = 1.0;
        }
        Ok(Self {
            kind: CouplingKind::Cyclic,
            size,
            weights,
        })
    }

    /// General weights from a symmetric `S × S` row-major matrix; the diagonal is ignored.
    pub fn general(size: usize, matrix: &[f64]) -> Result<Self> {
        Self::check_size(size)?;
        if matrix.len() != size * size {
            return Err(Error::dims(
                format!("{} weights", size * size),
                format!("{} weights", matrix.len()),
            ));
        }
        let mut weights = matrix.to_vec();
        for s in 0..size {
            weights[s * size + s] = 0.0;
            for t in 0..s {
                let (a, b) = (matrix[s * size + t], matrix[t * size + s]);
                if !(a >= 0.0) || !a.is_finite() || a != b {
                    return Err(Error::param("weights", "must be symmetric, finite and nonnegative"));
                }
            }
        }
        let scheme = Self {
            kind: CouplingKind::General,
            size,
            weights,
        };
        if !scheme.is_connected() {
            return Err(Error::DisconnectedCoupling);
        }
        Ok(scheme)
    }

    fn check_size(size: usize) -> Result<()> {
        if size < 2 {
            return Err(Error::param("S", "coupling needs at least two variables"));
        }
        Ok(())
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    /// Number of coupled variables `S`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn weight(&self, s: usize, t: usize) -> f64 {
        self.weights[s * self.size + t]
    }

    /// Pairs `(s, s', c_{s,s'})` with `s < s'` and positive weight.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for s in 0..self.size {
            for t in s + 1..self.size {
                let c = self.weight(s, t);
                if c > 0.0 {
                    out.push((s, t, c));
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.size];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for t in 0..self.size {
                if !seen[t] && self.weight(s, t) > 0.0 {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.into_iter().all(|v| v)
    }

    /// `CᵀC` on the `S × S` block pattern: each row of `C` is `c_{s,s'}(e_s − e_{s'})`.
    pub fn constraint_gram(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (s, t, c) in self.pairs() {
            let c2 = c * c;
            m[(s, s)] += c2;
            m[(t, t)] += c2;
            m[(s, t)] -= c2;
            m[(t, s)] -= c2;
        }
        m
    }
}

/// Smallest admissible `L_ρ`: `√(‖A‖²/S + κρ)·(1 + 10⁻⁹)` where `κ` is
/// `S` (full), `α` (cyclic) or `2·max_s Σ_{s'} c_{s,s'}` (general).
pub fn l_rho(norm_a: f64, rho: f64, scheme: &CouplingScheme) -> f64 {
    let s = scheme.size();
    let sf = s as f64;
    let coupling = match scheme.kind() {
        CouplingKind::Full => sf * rho,
        CouplingKind::Cyclic => {
            let alpha = if s % 2 == 0 {
                4.0
            } else {
                2.0 - 2.0 * (std::f64::consts::PI * (sf - 1.0) / sf).cos()
            };
            alpha * rho
        }
        CouplingKind::General => 2.0 * max_row_sum(scheme) * rho,
    };
    (norm_a * norm_a / sf + coupling).sqrt() * (1.0 + L_RHO_SLACK)
}

fn max_row_sum(scheme: &CouplingScheme) -> f64 {
    (0..scheme.size())
        .map(|s| (0..scheme.size()).map(|t| scheme.weight(s, t)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest non-zero eigenvalue of `CᵀC`.
pub fn sigma1(scheme: &CouplingScheme) -> Result<f64> {
    let s = scheme.size() as f64;
    match scheme.kind() {
        CouplingKind::Full => Ok(s),
        // S = 2 couples a single pair: CᵀC = [[1, −1], [−1, 1]]
        CouplingKind::Cyclic if scheme.size() == 2 => Ok(2.0),
        CouplingKind::Cyclic => Ok(2.0 - 2.0 * (2.0 * std::f64::consts::PI / s).cos()),
        CouplingKind::General => sigma1_numeric(scheme),
    }
}

/// `σ₁` from a dense symmetric eigensolve of the `S × S` pattern matrix.
pub fn sigma1_numeric(scheme: &CouplingScheme) -> Result<f64> {
    let gram = scheme.constraint_gram();
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let tol = 1e-10 * max.max(1.0);
    let mut nonzero: Vec<f64> = eig.eigenvalues.iter().copied().filter(|&v| v > tol).collect();
    // a connected graph has exactly one zero eigenvalue (the constants)
    if nonzero.len() + 1 != scheme.size() {
        return Err(Error::DisconnectedCoupling);
    }
    nonzero.sort_by(f64::total_cmp);
    Ok(nonzero[0])
}

/// `ρ = (1 + 10⁻⁶)·2ε⁻¹σ₁^{−1/2}S^{−1/2}‖A‖‖f‖`, giving components within `ε`
/// of each other at convergence.
pub fn choose_rho(epsilon: f64, scheme: &CouplingScheme, norm_a: f64, norm_f: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::param("epsilon", "must be positive"));
    }
    Ok(choose_t(scheme, norm_a, norm_f)? / epsilon)
}

/// `t = (1 + 10⁻⁶)·2σ₁^{−1/2}S^{−1/2}‖A‖‖f‖`, the inner-loop distance threshold.
pub fn choose_t(scheme: &CouplingScheme, norm_a: f64, norm_f: f64) -> Result<f64> {
    if !(norm_a >= 0.0) || !(norm_f >= 0.0) {
        return Err(Error::param("norms", "must be nonnegative"));
    }
    let sigma = sigma1(scheme)?;
    let s = scheme.size() as f64;
    Ok((1.0 + PARAMETER_SLACK) * 2.0 / (sigma.sqrt() * s.sqrt()) * norm_a * norm_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_rho_full_and_cyclic() {
        let full = CouplingScheme::full(4).unwrap();
        let l = l_rho(1.0, 1.0, &full);
        assert!(l * l > 4.25 && l * l < 4.25 * (1.0 + 1e-8));
        let cyc = CouplingScheme::cyclic(4).unwrap();
        let l = l_rho(0.0, 1.0, &cyc);
        assert!(l * l > 4.0 && l * l < 4.0 * (1.0 + 1e-8));
        let cyc5 = CouplingScheme::cyclic(5).unwrap();
        let expect = 2.0 - 2.0 * (std::f64::consts::PI * 4.0 / 5.0).cos();
        assert!((l_rho(0.0, 1.0, &cyc5).powi(2) - expect).abs() < 1e-8);
    }

    #[test]
    fn general_bound_is_looser_than_full() {
        let s = 4;
        let ones: Vec<f64> = (0..s * s).map(|k| if k % (s + 1) == 0 { 0.0 } else { 1.0 }).collect();
        let general = CouplingScheme::general(s, &ones).unwrap();
        let full = CouplingScheme::full(s).unwrap();
        let lg = l_rho(1.0, 0.5, &general);
        let lf = l_rho(1.0, 0.5, &full);
        assert!(lg >= lf);
        assert!((lg * lg / (1.0 + L_RHO_SLACK).powi(2) - (0.25 + 2.0 * 3.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn sigma1_closed_forms() {
        assert_eq!(sigma1(&CouplingScheme::full(4).unwrap()).unwrap(), 4.0);
        assert!((sigma1(&CouplingScheme::cyclic(4).unwrap()).unwrap() - 2.0).abs() < 1e-12);
        for s in 2..=9 {
            for scheme in [CouplingScheme::full(s).unwrap(), CouplingScheme::cyclic(s).unwrap()] {
                let closed = sigma1(&scheme).unwrap();
                let numeric = sigma1_numeric(&scheme).unwrap();
                assert!((closed - numeric).abs() < 1e-9, "S={s} {:?}", scheme.kind());
            }
        }
    }

    #[test]
    fn sigma1_two_by_two() {
        // CᵀC = [[1,-1],[-1,1]] has eigenvalues 0 and 2
        let full = CouplingScheme::full(2).unwrap();
        assert_eq!(sigma1(&full).unwrap(), 2.0);
        assert!((sigma1_numeric(&full).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_general_rejected() {
        let mut m = vec![0.0; 16];
        m[1] = 1.0;
        m[4] = 1.0;
        m[11] = 1.0;
        m[14] = 1.0;
        assert_eq!(CouplingScheme::general(4, &m), Err(Error::DisconnectedCoupling));
        assert!(CouplingScheme::full(1).is_err());
    }

    #[test]
    fn rho_formula() {
        let full = CouplingScheme::full(4).unwrap();
        let rho = choose_rho(0.1, &full, 1.0, 10.0).unwrap();
        assert!((rho - 50.0 * (1.0 + PARAMETER_SLACK)).abs() < 1e-9);
        assert!(rho > 50.0);
        let doubled = choose_rho(0.1, &full, 1.0, 20.0).unwrap();
        assert!((doubled - 2.0 * rho).abs() < 1e-9);
        let cyc = CouplingScheme::cyclic(4).unwrap();
        let rc = choose_rho(0.1, &cyc, 1.0, 10.0).unwrap();
        assert!((rc / rho - 2f64.sqrt()).abs() < 1e-12);
        assert!(choose_rho(0.0, &full, 1.0, 1.0).is_err());
        assert!(choose_rho(-1.0, &full, 1.0, 1.0).is_err());
    }

    #[test]
    fn rho_times_epsilon_is_constant() {
        let cyc = CouplingScheme::cyclic(4).unwrap();
        let base = choose_rho(1.0, &cyc, 0.7, 3.0).unwrap();
        for eps in [0.01, 0.3, 2.0, 17.0] {
            let r = choose_rho(eps, &cyc, 0.7, 3.0).unwrap();
            assert!((r * eps - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn t_formula() {
        let full = CouplingScheme::full(4).unwrap();
        let t = choose_t(&full, 1.0, 10.0).unwrap();
        assert!(t > 5.0 && t < 5.0 * (1.0 + 2.0 * PARAMETER_SLACK));
        assert_eq!(choose_t(&full, 1.0, 0.0).unwrap(), 0.0);
        let cyc = CouplingScheme::cyclic(4).unwrap();
        let t = choose_t(&cyc, 1.0, 10.0).unwrap();
        assert!((t - 7.0710678).abs() < 1e-4);
    }
}
