//! Multivariate Potts solvers for piecewise-constant reconstruction from
//! linear measurements `f = Au + noise`.
//!
//! The image is split into one variable per direction of a finite
//! [`DirectionModel`]; each split variable owns the jump penalty of its
//! direction, which reduces the backward step to exact univariate Potts
//! problems along discrete lines. [`algo1`] solves the quadratic penalty
//! relaxation, [`algo2`] drives the penalty to infinity and projects the
//! result onto a feasible piecewise-constant image.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`).

pub mod algo1;
pub mod algo2;
pub mod coupling;
pub mod direction;
pub mod directional;
pub mod energy;
pub mod error;
pub mod eval;
pub mod image;
pub mod operators;
pub mod potts1d;
pub mod projection;
pub mod scalar;
mod surrogate;

pub use algo1::{
    backward_step, forward_step, minimal_jump_height, run_algo1, run_algo1_with, Algo1Config, Algo1Result,
    Initialization, IterationRecord, IterationTrace, Nearness, Status, StepView,
};
pub use algo2::{
    inner_loop, run_algo2, run_algo2_with, Algo2Config, Algo2Result, Algo2Status, Algo2Trace, InnerOutcome,
    LambdaPreset, OuterRecord,
};
pub use coupling::{choose_rho, choose_t, l_rho, sigma1, CouplingKind, CouplingScheme};
pub use direction::{directional_difference, jump_count, weighted_jumps, Direction, DirectionKind, DirectionModel};
pub use directional::{extract_lines, solve_directional, LinePath};
pub use energy::{potts_energy, relaxed_energy, relaxed_energy_parts, RelaxedEnergy};
pub use error::{Error, Result};
pub use image::{DataVector, Image, SplitStack};
pub use operators::{
    estimate_norm, fbp, landweber, ConvolutionOperator, IdentityOperator, LinearOperator, MatrixOperator,
    RadonGeometry, RadonOperator,
};
pub use potts1d::{brute_force_univariate, solve_univariate, Segmentation1D};
pub use projection::{induced_directional_partition, merge_to_partition, project, DirectionalPartition, Partition};
pub use scalar::Scalar;
pub use surrogate::relaxed_step;

pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
pub type DataVector64 = DataVector<f64>;
pub type DataVector32 = DataVector<f32>;
pub type SplitStack64 = SplitStack<f64>;
pub type SplitStack32 = SplitStack<f32>;
pub type Segmentation64 = Segmentation1D<f64>;
pub type Segmentation32 = Segmentation1D<f32>;
