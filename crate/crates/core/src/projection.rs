//! Projection of a split stack onto piecewise-constant images: per-direction
//! intervals of constance, merged into connected segments, then averaged.

use petgraph::unionfind::UnionFind;

use crate::direction::{Direction, DirectionModel};
use crate::directional::extract_lines;
use crate::error::{Error, Result};
use crate::image::{Image, SplitStack};
use crate::scalar::Scalar;

/// Maximal run of equal values of `u_s` along an `a_s`-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    /// Row-major index of the first pixel.
    pub start: usize,
    /// Index `s` of the direction within the model.
    pub direction: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionalPartition {
    width: usize,
    height: usize,
    directions: Vec<Direction>,
    /// `intervals[s]` partitions the grid.
    intervals: Vec<Vec<Interval>>,
}

impl DirectionalPartition {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn intervals(&self, s: usize) -> &[Interval] {
        &self.intervals[s]
    }

    /// Pixels of `interval` in traversal order.
    pub fn pixels(&self, interval: &Interval) -> Vec<usize> {
        let a = self.directions[interval.direction];
        let mut out = Vec::with_capacity(interval.len);
        let (mut r, mut c) = (interval.start / self.width, interval.start % self.width);
        out.push(interval.start);
        for _ in 1..interval.len {
            let (nr, nc) = a
                .step(r, c, self.width, self.height)
                .expect("intervals stay inside their line");
            out.push(nr * self.width + nc);
            r = nr;
            c = nc;
        }
        out
    }
}

/// Segment labels, dense in `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, row: usize, col: usize) -> usize {
        self.labels[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Pixel count per segment.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Splits each `a_s`-line of `u_s` at its jumps.
pub fn induced_directional_partition<T: Scalar>(
    stack: &SplitStack<T>,
    model: &DirectionModel,
) -> Result<DirectionalPartition> {
    if stack.len() != model.len() {
        return Err(Error::dims(
            format!("{} components", model.len()),
            format!("{} components", stack.len()),
        ));
    }
    let (w, h) = stack.dims();
    let thr = T::jump_threshold();
    let intervals = model
        .directions()
        .iter()
        .enumerate()
        .map(|(s, &a)| {
            let u = stack.component(s).values();
            let mut out = Vec::new();
            for line in extract_lines(w, h, a) {
                let mut start = 0;
                for k in 1..=line.len() {
                    if k == line.len() || (u[line.pixels[k]] - u[line.pixels[k - 1]]).abs() > thr {
                        out.push(Interval {
                            start: line.pixels[start],
                            direction: s,
                            len: k - start,
                        });
                        start = k;
                    }
                }
            }
            out
        })
        .collect();
    Ok(DirectionalPartition {
        width: w,
        height: h,
        directions: model.directions().to_vec(),
        intervals,
    })
}

/// Equivalence classes of "joined by a chain of intervals", labelled in
/// row-major order of first occurrence.
pub fn merge_to_partition(dp: &DirectionalPartition) -> Partition {
    let (w, h) = dp.dims();
    let mut uf = UnionFind::<usize>::new(w * h);
    for per_direction in &dp.intervals {
        for iv in per_direction {
            let pixels = dp.pixels(iv);
            for &p in &pixels[1..] {
                uf.union(pixels[0], p);
            }
        }
    }
    let mut root_label = vec![usize::MAX; w * h];
    let mut labels = Vec::with_capacity(w * h);
    let mut count = 0;
    for p in 0..w * h {
        let root = uf.find_mut(p);
        if root_label[root] == usize::MAX {
            root_label[root] = count;
            count += 1;
        }
        labels.push(root_label[root]);
    }
    Partition {
        width: w,
        height: h,
        labels,
        count,
    }
}

/// Feasible piecewise-constant image: on each segment `P` the value
/// `Σ_{x∈P} Σ_s u_s(x) / (S|P|)`.
///
/// Adjacent segments whose averages coincide up to the jump threshold are
/// merged and re-averaged until the partition induced by the output is the
/// returned partition, so projecting the output again reproduces it.
pub fn project<T: Scalar>(stack: &SplitStack<T>, model: &DirectionModel) -> Result<(Image<T>, Partition)> {
    let mut partition = merge_to_partition(&induced_directional_partition(stack, model)?);
    loop {
        let image = segment_means(stack, &partition)?;
        let induced = SplitStack::broadcast(&image, model.len());
        let coarser = merge_to_partition(&induced_directional_partition(&induced, model)?);
        if coarser.count == partition.count {
            return Ok((image, partition));
        }
        partition = coarser;
    }
}

fn segment_means<T: Scalar>(stack: &SplitStack<T>, partition: &Partition) -> Result<Image<T>> {
    let n = partition.count;
    let mut sum = vec![T::zero(); n];
    let mut lo = vec![T::infinity(); n];
    let mut hi = vec![T::neg_infinity(); n];
    for u in stack.components() {
        for (&l, &v) in partition.labels.iter().zip(u.values()) {
            sum[l] += v;
            lo[l] = lo[l].min(v);
            hi[l] = hi[l].max(v);
        }
    }
    let sizes = partition.sizes();
    let s = T::of_usize(stack.len());
    let level: Vec<T> = (0..n)
        .map(|i| {
            if lo[i] == hi[i] {
                // exact, so re-projection reproduces it bit for bit
                lo[i]
            } else {
                (sum[i] / (s * T::of_usize(sizes[i]))).max(lo[i]).min(hi[i])
            }
        })
        .collect();
    let (w, h) = stack.dims();
    Image::new(w, h, partition.labels.iter().map(|&l| level[l]).collect())
}
