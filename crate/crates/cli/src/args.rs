use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "potts", version, about = "Piecewise-constant reconstruction with multivariate Potts solvers")]
pub struct Cli {
    /// Worker threads; all cores when omitted. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint deblurring and partitioning of a blurred image.
    Deblur(DeblurArgs),
    /// Reconstruction from undersampled parallel-beam Radon data.
    Radon(RadonArgs),
    /// Classical Potts partitioning (A = id).
    Segment(SegmentArgs),
    /// Exact univariate Potts solve of a CSV signal.
    Potts1d(Potts1dArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Full,
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionsArg {
    Axes2,
    Compass4,
    Knight8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Motion,
    Identity,
}

/// Solver settings shared by the image commands. Unset values take the
/// command's defaults.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub algo: Option<u8>,
    #[arg(long, value_enum)]
    pub coupling: Option<CouplingArg>,
    #[arg(long, value_enum, default_value_t = DirectionsArg::Compass4)]
    pub directions: DirectionsArg,
    /// Step relaxation in (0, 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Closeness tolerance of the split variables (algorithm 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iterations (algorithm 1) or outer iterations (algorithm 2).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Inner iteration cap of algorithm 2.
    #[arg(long, default_value_t = 100_000)]
    pub inner_max: usize,
    /// Unrelaxed steps with a safety margin on the operator norm (algorithm 1).
    #[arg(long)]
    pub strict: bool,
    /// Factor applied to the inner-loop distance threshold (algorithm 2).
    #[arg(long, default_value_t = 1.0)]
    pub t_multiplier: f64,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DeblurArgs {
    /// PGM or raw grid, taken as the sharp image.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    /// Gaussian standard deviation in pixels.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    /// Horizontal motion blur length in pixels.
    #[arg(long, default_value_t = 80)]
    pub length: usize,
    /// Standard deviation of the noise added to the blurred data.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RadonArgs {
    /// Ground truth image; the modified Shepp-Logan phantom when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub phantom_size: usize,
    #[arg(long, default_value_t = 25)]
    pub angles: usize,
    /// Detector bins; enough to cover the image diagonal when omitted.
    #[arg(long)]
    pub detectors: Option<usize>,
    /// Standard deviation of the noise added to the sinogram.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Potts1dArgs {
    /// Inline signal such as `1,1,5,5`.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub signal: Option<String>,
    /// File holding a comma- or whitespace-separated signal.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub gamma: f64,
}
