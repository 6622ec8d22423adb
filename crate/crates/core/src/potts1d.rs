//! Exact univariate Potts solver: `min_x ‖x − g‖² + γ‖∇x‖₀`.
//!
//! Bellman recursion over the last segment start,
//!
//! ```text
//! P(r) = min_{1 ≤ l ≤ r} P(l − 1) + γ + E(l..r),   P(0) = −γ,
//! ```
//!
//! where `E(l..r)` is the squared deviation of `g[l..=r]` from its mean,
//! evaluated in O(1) from prefix sums of the first and second moments. The
//! whole solve is O(n²). On exact ties the smaller `l` (the longer final
//! segment) wins.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest signal accepted by [`brute_force_univariate`].
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Piecewise-constant fit of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation1D<T> {
    /// Index of the first sample of every segment after the first, strictly increasing.
    /// A break `b` means a jump between samples `b − 1` and `b` (0-based).
    pub breaks: Vec<usize>,
    /// One level per segment.
    pub levels: Vec<T>,
    /// `‖x − g‖² + γ·(number of segments − 1)`.
    pub energy: f64,
    len: usize,
}

impl<T: Scalar> Segmentation1D<T> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn jumps(&self) -> usize {
        self.breaks.len()
    }

    /// Half-open `(start, end)` ranges of the segments.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let starts = std::iter::once(0).chain(self.breaks.iter().copied());
        let ends = self.breaks.iter().copied().chain(std::iter::once(self.len));
        starts.zip(ends)
    }

    /// The piecewise-constant signal `x`.
    pub fn reconstruct(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len);
        for ((start, end), &level) in self.segments().zip(&self.levels) {
            out.extend(std::iter::repeat_n(level, end - start));
        }
        out
    }
}

/// Prefix sums of `g` and `g²`, accumulated in `f64`.
#[derive(Debug, Clone)]
pub struct PrefixMoments {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl PrefixMoments {
    pub fn new<T: Scalar>(g: &[T]) -> Self {
        let mut first = Vec::with_capacity(g.len() + 1);
        let mut second = Vec::with_capacity(g.len() + 1);
        first.push(0.0);
        second.push(0.0);
        let (mut m1, mut m2) = (0.0, 0.0);
        for &v in g {
            let v = v.to_f64_lossy();
            m1 += v;
            m2 += v * v;
            first.push(m1);
            second.push(m2);
        }
        Self { first, second }
    }

    pub fn len(&self) -> usize {
        self.first.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Squared deviation from the mean of samples `l..=r` (0-based), clamped at 0.
    pub fn interval_error(&self, l: usize, r: usize) -> Result<f64> {
        if l > r || r >= self.len() {
            return Err(Error::IndexOutOfRange(format!(
                "interval {l}..={r} of a length-{} signal",
                self.len()
            )));
        }
        Ok(self.error_unchecked(l, r + 1))
    }

    /// Half-open `[l, r)` deviation without bounds checks.
    #[inline]
    fn error_unchecked(&self, l: usize, r: usize) -> f64 {
        if r - l == 1 {
            return 0.0;
        }
        let m1 = self.first[r] - self.first[l];
        let m2 = self.second[r] - self.second[l];
        (m2 - m1 * m1 / (r - l) as f64).max(0.0)
    }

    /// Mean of the half-open range `[l, r)`.
    #[inline]
    pub fn mean(&self, l: usize, r: usize) -> f64 {
        (self.first[r] - self.first[l]) / (r - l) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnivariateOptions {
    /// Skip segment starts that provably cannot be optimal. Exact up to
    /// rounding; off gives the plain quadratic recursion.
    pub prune: bool,
}

impl Default for UnivariateOptions {
    fn default() -> Self {
        Self { prune: true }
    }
}

fn validate<T: Scalar>(g: &[T], gamma: f64) -> Result<()> {
    if g.is_empty() {
        return Err(Error::param("signal", "must contain at least one sample"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", "must be positive"));
    }
    if let Some(index) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Global minimizer of `‖x − g‖² + γ‖∇x‖₀`.
pub fn solve_univariate<T: Scalar>(g: &[T], gamma: f64) -> Result<Segmentation1D<T>> {
    solve_univariate_with(g, gamma, UnivariateOptions::default())
}

pub fn solve_univariate_with<T: Scalar>(
    g: &[T],
    gamma: f64,
    options: UnivariateOptions,
) -> Result<Segmentation1D<T>> {
    validate(g, gamma)?;
    Ok(solve_unchecked(g, gamma, options))
}

/// Bellman recursion; inputs already validated.
pub(crate) fn solve_unchecked<T: Scalar>(
    g: &[T],
    gamma: f64,
    options: UnivariateOptions,
) -> Segmentation1D<T> {
    let n = g.len();
    let moments = PrefixMoments::new(g);
    let inv: Vec<f64> = (0..=n).map(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 }).collect();
    let err = |l: usize, r: usize| {
        if r - l == 1 {
            return 0.0;
        }
        let m1 = moments.first[r] - moments.first[l];
        let m2 = moments.second[r] - moments.second[l];
        (m2 - m1 * m1 * inv[r - l]).max(0.0)
    };
    // value[r] = optimal energy of g[..r]; start[r] = first index of its last segment
    let mut value = vec![0.0; n + 1];
    let mut start = vec![0usize; n + 1];
    value[0] = -gamma;
    for r in 1..=n {
        let mut best = f64::INFINITY;
        let mut arg = r - 1;
        for l in (0..r).rev() {
            let e = err(l, r);
            // value[l] ≥ 0 for l ≥ 1 and err grows as l decreases, so only
            // l = 0 (value −γ) can still win
            if options.prune && l > 0 && e + gamma > best {
                let whole = err(0, r);
                if whole <= best {
                    best = whole;
                    arg = 0;
                }
                break;
            }
            let candidate = value[l] + gamma + e;
            if candidate <= best {
                best = candidate;
                arg = l;
            }
        }
        value[r] = best;
        start[r] = arg;
    }

    let mut breaks = Vec::new();
    let mut levels = Vec::new();
    let mut r = n;
    while r > 0 {
        let l = start[r];
        let seg = &g[l..r];
        let sum: f64 = seg.iter().map(|v| v.to_f64_lossy()).sum();
        let (lo, hi) = seg
            .iter()
            .fold((seg[0], seg[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        // rounding must not move the mean outside the segment's range
        levels.push(T::of(sum / seg.len() as f64).max(lo).min(hi));
        if l > 0 {
            breaks.push(l);
        }
        r = l;
    }
    breaks.reverse();
    levels.reverse();
    Segmentation1D {
        breaks,
        levels,
        energy: value[n],
        len: n,
    }
}

/// Exhaustive search over all `2^{n−1}` jump sets. Ties go to fewer jumps,
/// then to the lexicographically earliest break list.
pub fn brute_force_univariate<T: Scalar>(g: &[T], gamma: f64) -> Result<Segmentation1D<T>> {
    validate(g, gamma)?;
    let n = g.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SignalTooLong {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let data: Vec<f64> = g.iter().map(|v| v.to_f64_lossy()).collect();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for mask in 0u32..(1u32 << (n - 1)) {
        let breaks: Vec<usize> = (1..n).filter(|&b| mask & (1 << (b - 1)) != 0).collect();
        let mut levels = Vec::with_capacity(breaks.len() + 1);
        let mut energy = gamma * breaks.len() as f64;
        let bounds: Vec<usize> = std::iter::once(0)
            .chain(breaks.iter().copied())
            .chain(std::iter::once(n))
            .collect();
        for w in bounds.windows(2) {
            let seg = &data[w[0]..w[1]];
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            energy += seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            levels.push(mean);
        }
        let better = match &best {
            None => true,
            Some((e, b, _)) => {
                energy < *e
                    || (energy == *e
                        && (breaks.len() < b.len() || (breaks.len() == b.len() && breaks < *b)))
            }
        };
        if better {
            best = Some((energy, breaks, levels));
        }
    }
    let (energy, breaks, levels) = best.expect("at least one configuration");
    Ok(Segmentation1D {
        breaks,
        levels: levels.into_iter().map(T::of).collect(),
        energy,
        len: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn potts_value(x: &[f64], g: &[f64], gamma: f64) -> f64 {
        let fit: f64 = x.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum();
        let jumps = x.windows(2).filter(|w| (w[1] - w[0]).abs() > 1e-12).count();
        fit + gamma * jumps as f64
    }

    #[test]
    fn two_level_signal() {
        let g = [1.0, 1.0, 5.0, 5.0];
        let seg = solve_univariate(&g, 1.0).unwrap();
        assert_eq!(seg.breaks, vec![2]);
        assert_eq!(seg.levels, vec![1.0, 5.0]);
        assert!((seg.energy - 1.0).abs() < 1e-12);
        assert_eq!(seg.reconstruct(), g.to_vec());
    }

    #[test]
    fn large_penalty_merges() {
        let g = [1.0, 1.0, 5.0, 5.0];
        let seg = solve_univariate(&g, 20.0).unwrap();
        assert!(seg.breaks.is_empty());
        assert_eq!(seg.reconstruct(), vec![3.0; 4]);
        assert!((seg.energy - 16.0).abs() < 1e-12);
        let bf = brute_force_univariate(&g, 20.0).unwrap();
        assert!((bf.energy - 16.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_penalty_keeps_data() {
        let g = [0.3, -1.2, 4.0, 2.5, 2.6];
        let gamma = 1e-15;
        let seg = solve_univariate(&g, gamma).unwrap();
        assert_eq!(seg.reconstruct(), g.to_vec());
        assert!((seg.energy - gamma * 4.0).abs() < 1e-14);
    }

    #[test]
    fn constant_signal_needs_no_jump() {
        let g = [2.0; 7];
        for gamma in [1e-6, 1.0, 1e6] {
            let seg = solve_univariate(&g, gamma).unwrap();
            assert!(seg.breaks.is_empty());
            assert_eq!(seg.energy, 0.0);
        }
    }

    #[test]
    fn interval_errors() {
        let m = PrefixMoments::new(&[1.0, 5.0]);
        assert_eq!(m.interval_error(0, 0).unwrap(), 0.0);
        assert!((m.interval_error(0, 1).unwrap() - 8.0).abs() < 1e-12);
        let c = PrefixMoments::new(&[2.0, 2.0, 2.0]);
        assert_eq!(c.interval_error(0, 2).unwrap(), 0.0);
        assert!(c.interval_error(2, 1).is_err());
        assert!(c.interval_error(0, 3).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_univariate::<f64>(&[], 1.0).is_err());
        assert!(solve_univariate(&[1.0], 0.0).is_err());
        assert!(solve_univariate(&[1.0], -1.0).is_err());
        assert!(brute_force_univariate(&[0.0; 17], 1.0).is_err());
    }

    #[test]
    fn single_sample() {
        let seg = brute_force_univariate(&[0.0], 3.0).unwrap();
        assert!(seg.breaks.is_empty());
        assert_eq!(seg.levels, vec![0.0]);
        let seg = solve_univariate(&[0.0], 3.0).unwrap();
        assert_eq!(seg.energy, 0.0);
    }

    #[test]
    fn brute_force_tie_prefers_fewer_jumps() {
        // [0, 2] with γ = 2: one jump costs 2, merging costs 2
        let seg = brute_force_univariate(&[0.0, 2.0], 2.0).unwrap();
        assert!(seg.breaks.is_empty());
        let dp = solve_univariate(&[0.0, 2.0], 2.0).unwrap();
        assert!(dp.breaks.is_empty());
    }

    #[test]
    fn long_signal_is_fast() {
        let g: Vec<f64> = (0..10_000)
            .map(|i| ((i / 700) % 3) as f64 + 0.01 * ((i * 7919) % 13) as f64)
            .collect();
        let t = std::time::Instant::now();
        let seg = solve_univariate(&g, 0.5).unwrap();
        assert!(t.elapsed().as_secs_f64() < 10.0);
        assert!(seg.jumps() >= 10);
        let pruned = solve_univariate_with(&g, 0.5, UnivariateOptions { prune: true }).unwrap();
        assert!((pruned.energy - seg.energy).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(
            g in prop::collection::vec(-3.0f64..3.0, 1..=10),
            gamma in prop::sample::select(vec![0.01, 0.1, 1.0, 10.0]),
        ) {
            let dp = solve_univariate(&g, gamma).unwrap();
            let bf = brute_force_univariate(&g, gamma).unwrap();
            prop_assert!((dp.energy - bf.energy).abs() < 1e-9);
            let x = dp.reconstruct();
            prop_assert!((potts_value(&x, &g, gamma) - dp.energy).abs() < 1e-9);
            let pruned = solve_univariate_with(&g, gamma, UnivariateOptions { prune: true }).unwrap();
            prop_assert!((pruned.energy - dp.energy).abs() < 1e-12);
        }

        #[test]
        fn levels_are_segment_means(g in prop::collection::vec(-5.0f64..5.0, 1..40), gamma in 0.01f64..5.0) {
            let seg = solve_univariate(&g, gamma).unwrap();
            for ((l, r), &level) in seg.segments().zip(&seg.levels) {
                let mean = g[l..r].iter().sum::<f64>() / (r - l) as f64;
                prop_assert!((level - mean).abs() < 1e-12);
            }
        }

        #[test]
        fn jumps_non_increasing_in_gamma(g in prop::collection::vec(-2.0f64..2.0, 2..30)) {
            let mut last = usize::MAX;
            for gamma in [0.001, 0.01, 0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
                let j = solve_univariate(&g, gamma).unwrap().jumps();
                prop_assert!(j <= last);
                last = j;
            }
        }
    }
}
