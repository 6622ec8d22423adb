//! Directional Potts problems `min_u ‖u − h‖² + γ'‖∇_a u‖₀` split into
//! independent univariate problems along the discrete lines `v + aℤ`.

use rayon::prelude::*;

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::potts1d::{solve_unchecked, UnivariateOptions};
use crate::scalar::Scalar;

/// Maximal run of pixels `start, start + a, start + 2a, …` inside the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinePath {
    pub direction: Direction,
    /// `(row, col)` of the first pixel; it has no in-grid predecessor.
    pub start: (usize, usize),
    /// Row-major pixel indices in traversal order.
    pub pixels: Vec<usize>,
}

impl LinePath {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// All maximal lines of direction `a`, ordered by start pixel (row-major).
/// Every pixel lies on exactly one line.
pub fn extract_lines(width: usize, height: usize, a: Direction) -> Vec<LinePath> {
    let mut lines = Vec::new();
    for i in 0..height {
        for j in 0..width {
            if a.step_back(i, j, width, height).is_some() {
                continue;
            }
            let mut pixels = vec![i * width + j];
            let (mut r, mut c) = (i, j);
            while let Some((nr, nc)) = a.step(r, c, width, height) {
                pixels.push(nr * width + nc);
                r = nr;
                c = nc;
            }
            lines.push(LinePath {
                direction: a,
                start: (i, j),
                pixels,
            });
        }
    }
    lines
}

/// Exact minimizer of `‖u − h‖² + γ'‖∇_a u‖₀`.
pub fn solve_directional<T: Scalar>(h: &Image<T>, a: Direction, gamma_prime: f64) -> Result<Image<T>> {
    let lines = extract_lines(h.width(), h.height(), a);
    solve_directional_on(h, &lines, gamma_prime)
}

/// As [`solve_directional`] with lines precomputed by [`extract_lines`].
pub fn solve_directional_on<T: Scalar>(
    h: &Image<T>,
    lines: &[LinePath],
    gamma_prime: f64,
) -> Result<Image<T>> {
    if !(gamma_prime > 0.0) || !gamma_prime.is_finite() {
        return Err(Error::param("gamma_prime", "must be positive"));
    }
    let covered: usize = lines.iter().map(LinePath::len).sum();
    if covered != h.len() {
        return Err(Error::dims(
            format!("lines covering {} pixels", h.len()),
            format!("lines covering {covered} pixels"),
        ));
    }
    let src = h.values();
    let solved: Vec<Vec<T>> = lines
        .par_iter()
        .map(|line| {
            if line.len() == 1 {
                return vec![src[line.pixels[0]]];
            }
            let g: Vec<T> = line.pixels.iter().map(|&p| src[p]).collect();
            solve_unchecked(&g, gamma_prime, UnivariateOptions::default()).reconstruct()
        })
        .collect();
    let mut out = h.clone();
    let dst = out.values_mut();
    for (line, values) in lines.iter().zip(solved) {
        for (&p, v) in line.pixels.iter().zip(values) {
            dst[p] = v;
        }
    }
    Ok(out)
}

/// Energy of `u` in the directional subproblem with data `h`.
pub fn directional_energy<T: Scalar>(u: &Image<T>, h: &Image<T>, a: Direction, gamma_prime: f64) -> f64 {
    let fit: f64 = crate::image::squared_distance(u.values(), h.values()).to_f64_lossy();
    fit + gamma_prime * crate::direction::jump_count(u, a) as f64
}
