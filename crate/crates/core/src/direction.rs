//! Finite direction systems and directional finite differences.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Integer grid offset `(di, dj)`: `di` steps rows, `dj` steps columns.
///
/// `(0, 1)` runs along image rows, `(1, 0)` along columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub di: i64,
    pub dj: i64,
}

impl Direction {
    pub fn new(di: i64, dj: i64) -> Result<Self> {
        if di == 0 && dj == 0 {
            return Err(Error::param("direction", "offset must be non-zero"));
        }
        Ok(Self { di, dj })
    }

    /// `(row, col) + self`, or `None` when it leaves a `width × height` grid.
    #[inline]
    pub fn step(&self, row: usize, col: usize, width: usize, height: usize) -> Option<(usize, usize)> {
        let r = row as i64 + self.di;
        let c = col as i64 + self.dj;
        if r < 0 || c < 0 || r >= height as i64 || c >= width as i64 {
            None
        } else {
            Some((r as usize, c as usize))
        }
    }

    /// `(row, col) − self`, or `None` when it leaves the grid.
    #[inline]
    pub fn step_back(&self, row: usize, col: usize, width: usize, height: usize) -> Option<(usize, usize)> {
        Direction {
            di: -self.di,
            dj: -self.dj,
        }
        .step(row, col, width, height)
    }
}

/// Built-in direction systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    /// Coordinate axes only, unit weights.
    Axes2,
    /// Axes and diagonals.
    Compass4,
    /// Axes, diagonals and knight moves.
    Knight8,
}

/// Ordered directions `a_s` with positive weights `ω_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionModel {
    directions: Vec<Direction>,
    weights: Vec<f64>,
}

impl DirectionModel {
    pub fn new(directions: Vec<Direction>, weights: Vec<f64>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::param("directions", "at least one direction required"));
        }
        if directions.len() != weights.len() {
            return Err(Error::dims(
                format!("{} weights", directions.len()),
                format!("{} weights", weights.len()),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::param("weights", "all weights must be positive and finite"));
        }
        Ok(Self {
            directions,
            weights,
        })
    }

    pub fn build(kind: DirectionKind) -> Self {
        let d = |di, dj| Direction { di, dj };
        let sqrt2 = std::f64::consts::SQRT_2;
        let sqrt5 = 5f64.sqrt();
        let (directions, weights) = match kind {
            DirectionKind::Axes2 => (vec![d(0, 1), d(1, 0)], vec![1.0, 1.0]),
            DirectionKind::Compass4 => {
                let axis = sqrt2 - 1.0;
                let diag = 1.0 - sqrt2 / 2.0;
                (
                    vec![d(0, 1), d(1, 0), d(1, 1), d(1, -1)],
                    vec![axis, axis, diag, diag],
                )
            }
            DirectionKind::Knight8 => {
                let axis = sqrt5 - 2.0;
                let diag = sqrt5 - 1.5 * sqrt2;
                let knight = 0.5 * (1.0 + sqrt2 - sqrt5);
                (
                    vec![
                        d(0, 1),
                        d(1, 0),
                        d(1, 1),
                        d(1, -1),
                        d(1, 2),
                        d(2, 1),
                        d(1, -2),
                        d(2, -1),
                    ],
                    vec![axis, axis, diag, diag, knight, knight, knight, knight],
                )
            }
        };
        Self {
            directions,
            weights,
        }
    }

    /// Number of directions `S`.
    #[inline]
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    #[inline]
    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn direction(&self, s: usize) -> Direction {
        self.directions[s]
    }

    #[inline]
    pub fn weight(&self, s: usize) -> f64 {
        self.weights[s]
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Directional differences `u[p + a] − u[p]` for every pixel `p` whose
/// neighbour `p + a` lies inside the grid. Entries are `(pixel index, difference)`.
pub fn directional_difference<T: Scalar>(u: &Image<T>, a: Direction) -> Vec<(usize, T)> {
    let (w, h) = u.dims();
    let mut out = Vec::new();
    for i in 0..h {
        for j in 0..w {
            if let Some((r, c)) = a.step(i, j, w, h) {
                out.push((u.index(i, j), u.get(r, c) - u.get(i, j)));
            }
        }
    }
    out
}

/// `‖∇_a u‖₀` with the scalar type's jump threshold.
pub fn jump_count<T: Scalar>(u: &Image<T>, a: Direction) -> usize {
    let (w, h) = u.dims();
    let thr = T::jump_threshold();
    let mut count = 0;
    for i in 0..h {
        for j in 0..w {
            if let Some((r, c)) = a.step(i, j, w, h) {
                if (u.get(r, c) - u.get(i, j)).abs() > thr {
                    count += 1;
                }
            }
        }
    }
    count
}

/// `Σ_s ω_s ‖∇_{a_s} u‖₀`
pub fn weighted_jumps<T: Scalar>(u: &Image<T>, model: &DirectionModel) -> f64 {
    model
        .directions()
        .iter()
        .zip(model.weights())
        .map(|(&a, &w)| w * jump_count(u, a) as f64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compass_weights() {
        let m = DirectionModel::build(DirectionKind::Compass4);
        assert_eq!(m.len(), 4);
        assert!((m.weight(0) - 0.414_213_562_373_095).abs() < 1e-12);
        assert!((m.weight(2) - 0.292_893_218_813_452).abs() < 1e-12);
        assert!(m.directions().contains(&Direction { di: 1, dj: -1 }));
    }

    #[test]
    fn knight_weights() {
        let m = DirectionModel::build(DirectionKind::Knight8);
        assert_eq!(m.len(), 8);
        assert!((m.weight(0) - 0.236_067_977_499_790).abs() < 1e-12);
        assert!((m.weight(2) - (5f64.sqrt() - 1.5 * 2f64.sqrt())).abs() < 1e-15);
        assert!((m.weight(7) - 0.5 * (1.0 + 2f64.sqrt() - 5f64.sqrt())).abs() < 1e-15);
        assert!(m.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rejects_zero_direction_and_bad_weights() {
        assert!(Direction::new(0, 0).is_err());
        let d = Direction::new(0, 1).unwrap();
        assert!(DirectionModel::new(vec![d], vec![0.0]).is_err());
        assert!(DirectionModel::new(vec![d], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn difference_of_pair() {
        let u = Image::from_rows(&[vec![3.0, 5.0]]).unwrap();
        let d = directional_difference(&u, Direction { di: 0, dj: 1 });
        assert_eq!(d, vec![(0, 2.0)]);
    }

    #[test]
    fn differences_match_nested_loop_oracle() {
        let u = Image::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        for a in [Direction { di: 1, dj: 0 }, Direction { di: 0, dj: 1 }] {
            let mut oracle = Vec::new();
            for p in 0..4usize {
                let (i, j) = ((p / 2) as i64, (p % 2) as i64);
                let (r, c) = (i + a.di, j + a.dj);
                if (0..2).contains(&r) && (0..2).contains(&c) {
                    oracle.push((p, u.values()[(r * 2 + c) as usize] - u.values()[p]));
                }
            }
            assert_eq!(directional_difference(&u, a), oracle);
        }
        let down = directional_difference(&u, Direction { di: 1, dj: 0 });
        assert_eq!(down.iter().filter(|(_, d)| *d == 1.0).count(), 2);
        assert_eq!(jump_count(&u, Direction { di: 0, dj: 1 }), 0);
    }

    #[test]
    fn constant_image_has_no_differences() {
        let u = Image::filled(5, 4, 0.7);
        for a in DirectionModel::build(DirectionKind::Knight8).directions() {
            assert!(directional_difference(&u, *a).iter().all(|(_, d)| *d == 0.0));
        }
    }
}
