//! Experiment drivers behind the subcommands.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use potts_core::eval::{add_noise_data, mssim, shepp_logan, NoiseSpec, SSIM_WINDOW};
use potts_core::{
    fbp, potts_energy, project, run_algo1_with, run_algo2, solve_univariate, Algo1Config, Algo2Config,
    Algo2Status, ConvolutionOperator, CouplingScheme, DataVector64, DirectionKind, DirectionModel,
    IdentityOperator, Image64, Initialization, LambdaPreset, LinearOperator, Partition, RadonGeometry,
    RadonOperator, Status,
};

use crate::args::{CouplingArg, DeblurArgs, DirectionsArg, KernelArg, Potts1dArgs, RadonArgs, SegmentArgs, SolverArgs};
use crate::error::{CliError, CliResult};
use crate::io::{read_image, read_signal, parse_signal, write_labels, write_pgm, write_raw_image, write_raw_sinogram, write_text, BitDepth};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

/// Ordered `key=value` lines.
#[derive(Debug, Default, Clone)]
pub struct KeyValues(Vec<(String, String)>);

impl KeyValues {
    pub fn push(&mut self, key: &str, value: impl Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Per-command defaults for unset solver flags.
struct Defaults {
    gamma: f64,
    algo: u8,
    coupling: CouplingArg,
    preset: LambdaPreset,
    /// `ε` from `‖f‖`.
    epsilon: fn(f64) -> f64,
}

struct Solved {
    image: Image64,
    partition: Partition,
    converged: bool,
    iterations: usize,
    trace_csv: Vec<u8>,
}

fn model_for(arg: DirectionsArg) -> DirectionModel {
    DirectionModel::build(match arg {
        DirectionsArg::Axes2 => DirectionKind::Axes2,
        DirectionsArg::Compass4 => DirectionKind::Compass4,
        DirectionsArg::Knight8 => DirectionKind::Knight8,
    })
}

fn scheme_for(arg: CouplingArg, size: usize) -> CliResult<CouplingScheme> {
    Ok(match arg {
        CouplingArg::Full => CouplingScheme::full(size)?,
        CouplingArg::Cyclic => CouplingScheme::cyclic(size)?,
    })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn solve(
    op: &dyn LinearOperator<f64>,
    f: &DataVector64,
    args: &SolverArgs,
    defaults: &Defaults,
    manifest: &mut KeyValues,
) -> CliResult<Solved> {
    let gamma = args.gamma.unwrap_or(defaults.gamma);
    let algo = args.algo.unwrap_or(defaults.algo);
    let coupling = args.coupling.unwrap_or(defaults.coupling);
    let model = model_for(args.directions);
    let scheme = scheme_for(coupling, model.len())?;
    manifest.push("gamma", gamma);
    manifest.push("algo", algo);
    manifest.push("coupling", format!("{coupling:?}").to_lowercase());
    manifest.push("directions", format!("{:?}", args.directions).to_lowercase());

    if algo == 1 {
        let mut cfg = Algo1Config::new(gamma, 0.0, scheme, model.clone());
        cfg.epsilon = args.epsilon.unwrap_or((defaults.epsilon)(f.norm()));
        if let Some(lambda) = args.lambda {
            cfg.lambda = lambda;
        }
        if let Some(n) = args.max_iters {
            cfg.max_iters = n;
        }
        cfg.strict_mode = args.strict;
        let res = run_algo1_with(op, f, &cfg, &Initialization::Landweber(potts_core::algo1::LANDWEBER_STEPS), |_| {})?;
        let (image, partition) = project(&res.stack, &model)?;
        manifest.push("epsilon", cfg.epsilon);
        manifest.push("lambda", if cfg.strict_mode { 1.0 } else { cfg.lambda });
        manifest.push("max_iters", cfg.max_iters);
        manifest.push("strict", cfg.strict_mode);
        manifest.push("rel_change_tol", cfg.rel_change_tol);
        manifest.push("norm_a", res.norm_a);
        manifest.push("rho", res.rho);
        manifest.push("l_rho", res.l_rho);
        manifest.push("init", format!("landweber({})", potts_core::algo1::LANDWEBER_STEPS));
        let mut trace_csv = Vec::new();
        res.trace.write_csv(&mut trace_csv).map_err(|e| CliError::io("trace", e))?;
        Ok(Solved {
            image,
            partition,
            converged: res.status == Status::Converged,
            iterations: res.trace.len(),
            trace_csv,
        })
    } else {
        let mut cfg = Algo2Config::new(gamma, scheme, model).with_preset(defaults.preset);
        if let Some(lambda) = args.lambda {
            cfg.lambda = lambda;
        }
        if let Some(n) = args.max_iters {
            cfg.outer_max = n;
        }
        cfg.inner_max = args.inner_max;
        cfg.t_multiplier = args.t_multiplier;
        let res = run_algo2(op, f, &cfg)?;
        manifest.push("lambda", cfg.lambda);
        manifest.push("rho0", cfg.rho0);
        manifest.push("tau", cfg.tau);
        manifest.push("eta", cfg.eta);
        manifest.push("outer_max", cfg.outer_max);
        manifest.push("inner_max", cfg.inner_max);
        manifest.push("final_tol", cfg.final_tol);
        manifest.push("t_multiplier", cfg.t_multiplier);
        manifest.push("norm_a", res.norm_a);
        manifest.push("t", res.t);
        if let Some(last) = res.trace.records.last() {
            manifest.push("rho_final", last.rho);
            manifest.push("l_rho_final", last.l_rho);
        }
        manifest.push("init", "adjoint");
        let mut trace_csv = Vec::new();
        res.trace.write_csv(&mut trace_csv).map_err(|e| CliError::io("trace", e))?;
        Ok(Solved {
            image: res.image,
            partition: res.partition,
            converged: res.status == Algo2Status::Converged && !res.trace.inner_exhausted(),
            iterations: res.trace.records.len(),
            trace_csv,
        })
    }
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn check_noise(sigma: f64, seed: u64) -> CliResult<NoiseSpec> {
    NoiseSpec::new(sigma, seed).map_err(|_| usage("--noise must be nonnegative and finite"))
}

fn quality(truth: &Image64, img: &Image64) -> CliResult<Option<f64>> {
    if truth.width() < SSIM_WINDOW || truth.height() < SSIM_WINDOW {
        return Ok(None);
    }
    Ok(Some(mssim(truth, img)?))
}

/// Writes the reconstruction, labels, trace, metrics and manifest.
fn emit(
    dir: &Path,
    solved: &Solved,
    op: &dyn LinearOperator<f64>,
    f: &DataVector64,
    truth: Option<&Image64>,
    gamma: f64,
    model: &DirectionModel,
    mut metrics: KeyValues,
    manifest: &KeyValues,
) -> CliResult<Outcome> {
    write_raw_image(&dir.join("reconstruction.raw"), &solved.image)?;
    write_pgm(&dir.join("reconstruction.pgm"), &solved.image, BitDepth::Sixteen)?;
    write_labels(&dir.join("labels.pgm"), &solved.partition)?;
    fs::write(dir.join("trace.csv"), &solved.trace_csv).map_err(|e| CliError::io(dir.join("trace.csv"), e))?;
    metrics.push("status", if solved.converged { "converged" } else { "max_iterations" });
    metrics.push("iterations", solved.iterations);
    metrics.push("segments", solved.partition.count());
    metrics.push("potts_energy", potts_energy(op, f, &solved.image, gamma, model)?);
    if let Some(truth) = truth {
        if let Some(q) = quality(truth, &solved.image)? {
            metrics.push("mssim", q);
        }
    }
    write_text(&dir.join("metrics.txt"), &metrics.render())?;
    write_text(&dir.join("manifest.txt"), &manifest.render())?;
    Ok(if solved.converged {
        Outcome::Converged
    } else {
        Outcome::NotConverged
    })
}

pub fn deblur(args: &DeblurArgs) -> CliResult<Outcome> {
    let dir = &args.solver.output_dir;
    let truth = read_image(&args.input)?;
    let (w, h) = truth.dims();
    let noise = check_noise(args.noise, args.seed)?;
    let (op, preset): (Box<dyn LinearOperator<f64>>, LambdaPreset) = match args.kernel {
        KernelArg::Gaussian => (Box::new(ConvolutionOperator::gaussian(w, h, args.sigma)?), LambdaPreset::GaussianBlur),
        KernelArg::Motion => (Box::new(ConvolutionOperator::motion_blur(w, h, args.length)?), LambdaPreset::MotionBlur),
        KernelArg::Identity => (Box::new(IdentityOperator::new(w, h)), LambdaPreset::GaussianBlur),
    };
    let f = add_noise_data(&op.apply(&truth)?, noise)?;
    prepare_dir(dir)?;

    let mut manifest = KeyValues::default();
    manifest.push("command", "deblur");
    manifest.push("input", args.input.display());
    manifest.push("width", w);
    manifest.push("height", h);
    manifest.push("kernel", format!("{:?}", args.kernel).to_lowercase());
    match args.kernel {
        KernelArg::Gaussian => manifest.push("sigma", args.sigma),
        KernelArg::Motion => manifest.push("length", args.length),
        KernelArg::Identity => {}
    }
    manifest.push("noise", args.noise);
    manifest.push("seed", args.seed);
    let defaults = Defaults {
        gamma: 0.1,
        algo: 2,
        coupling: CouplingArg::Full,
        preset,
        epsilon: |norm_f| 2.0 * norm_f,
    };
    let solved = solve(op.as_ref(), &f, &args.solver, &defaults, &mut manifest)?;
    let data_img = f.clone().into_image()?;
    write_raw_image(&dir.join("data.raw"), &data_img)?;
    write_pgm(&dir.join("data.pgm"), &data_img, BitDepth::Sixteen)?;
    let gamma = args.solver.gamma.unwrap_or(defaults.gamma);
    let model = model_for(args.solver.directions);
    emit(dir, &solved, op.as_ref(), &f, Some(&truth), gamma, &model, KeyValues::default(), &manifest)
}

pub fn radon(args: &RadonArgs) -> CliResult<Outcome> {
    let dir = &args.solver.output_dir;
    let truth = match &args.input {
        Some(path) => read_image(path)?,
        None => shepp_logan(args.phantom_size)?,
    };
    let (w, h) = truth.dims();
    let geometry = match args.detectors {
        Some(d) => RadonGeometry::new(args.angles, d, 1.0)?,
        None => RadonGeometry::for_image(w, h, args.angles)?,
    };
    let noise = check_noise(args.noise, args.seed)?;
    let op = RadonOperator::new(w, h, geometry.clone())?;
    let sinogram = add_noise_data(&op.apply(&truth)?, noise)?;
    prepare_dir(dir)?;
    write_raw_sinogram(&dir.join("sinogram.raw"), &sinogram)?;
    write_raw_image(&dir.join("truth.raw"), &truth)?;
    write_pgm(&dir.join("truth.pgm"), &truth, BitDepth::Sixteen)?;
    let baseline = fbp(&sinogram, &geometry, w, h)?;
    write_raw_image(&dir.join("fbp.raw"), &baseline)?;
    write_pgm(&dir.join("fbp.pgm"), &baseline, BitDepth::Sixteen)?;

    let mut manifest = KeyValues::default();
    manifest.push("command", "radon");
    match &args.input {
        Some(path) => manifest.push("input", path.display()),
        None => manifest.push("phantom_size", args.phantom_size),
    }
    manifest.push("width", w);
    manifest.push("height", h);
    manifest.push("angles", geometry.num_angles);
    manifest.push("detectors", geometry.num_detectors);
    manifest.push("detector_spacing", geometry.detector_spacing);
    manifest.push("noise", args.noise);
    manifest.push("seed", args.seed);
    let defaults = Defaults {
        gamma: 3.0,
        algo: 2,
        coupling: CouplingArg::Cyclic,
        preset: LambdaPreset::Radon,
        epsilon: |norm_f| 0.01 * norm_f,
    };
    let solved = solve(&op, &sinogram, &args.solver, &defaults, &mut manifest)?;
    let mut metrics = KeyValues::default();
    if let Some(q) = quality(&truth, &baseline)? {
        metrics.push("mssim_fbp", q);
    }
    let gamma = args.solver.gamma.unwrap_or(defaults.gamma);
    let model = model_for(args.solver.directions);
    emit(dir, &solved, &op, &sinogram, Some(&truth), gamma, &model, metrics, &manifest)
}

pub fn segment(args: &SegmentArgs) -> CliResult<Outcome> {
    let dir = &args.solver.output_dir;
    let input = read_image(&args.input)?;
    let (w, h) = input.dims();
    let noise = check_noise(args.noise, args.seed)?;
    let op = IdentityOperator::new(w, h);
    let f = add_noise_data(&input.as_data(), noise)?;
    prepare_dir(dir)?;
    let mut manifest = KeyValues::default();
    manifest.push("command", "segment");
    manifest.push("input", args.input.display());
    manifest.push("width", w);
    manifest.push("height", h);
    manifest.push("noise", args.noise);
    manifest.push("seed", args.seed);
    let defaults = Defaults {
        gamma: 0.5,
        algo: 2,
        coupling: CouplingArg::Full,
        preset: LambdaPreset::Segmentation,
        epsilon: |_| 0.01,
    };
    let solved = solve(&op, &f, &args.solver, &defaults, &mut manifest)?;
    let gamma = args.solver.gamma.unwrap_or(defaults.gamma);
    let model = model_for(args.solver.directions);
    emit(dir, &solved, &op, &f, Some(&input), gamma, &model, KeyValues::default(), &manifest)
}

/// Prints `breaks=… levels=… energy=…` on one line. Breaks are the 0-based
/// first samples of every segment after the first.
pub fn potts1d(args: &Potts1dArgs, out: &mut dyn Write) -> CliResult<Outcome> {
    let signal = match (&args.signal, &args.input) {
        (Some(text), _) => parse_signal(text)?,
        (None, Some(path)) => read_signal(path)?,
        (None, None) => return Err(usage("one of --signal or --input is required")),
    };
    let seg = solve_univariate(&signal, args.gamma)?;
    let join = |v: Vec<String>| v.join(",");
    let line = format!(
        "breaks={} levels={} energy={}",
        join(seg.breaks.iter().map(|b| b.to_string()).collect()),
        join(seg.levels.iter().map(|l| l.to_string()).collect()),
        seg.energy
    );
    writeln!(out, "{line}").map_err(|e| CliError::io("stdout", e))?;
    Ok(Outcome::Converged)
}
