//! Reproducible experiment runs driven by a TOML config.
//!
//! ```toml
//! task = "complete-als"          # decompose | complete-als | complete-admm
//! out_dir = "runs/syn"           # relative paths resolve against the config file
//! trials = 5                     # trial t uses seed seed_base + t
//! seed_base = 0
//! record_timing = false          # wall_ms stays 0 unless set
//! sweep_rates = [0.5, 0.7, 0.9]  # optional missing-rate sweep
//!
//! [input]
//! source = "synthetic"           # synthetic | tensor | image
//! kind = "rank1-sum"             # rank1-sum (terms) | tt-generated (tt_ranks)
//! terms = 8
//! dims = [6, 6, 6, 6]
//! # seed = 7                     # defaults to the trial seed
//! # source = "tensor", path = "x.dnt"
//! # source = "image", path = "a.png", target_dims = [8, 8, 8, 8, 3]
//!
//! [mask]
//! source = "pattern"             # pattern | file (path = "m.msk")
//! kind = "mar"                   # mar | rmar | cmar | rcmar
//! rate = 0.9
//! spatial_modes = [0, 1]
//!
//! [solver]                       # any subset; the rest keep their defaults
//! epsilon = 2e-2
//! s_max = 3000
//! lambda = 10.0
//! ```
//!
//! Image masks are drawn on the `H x W x C` image, so row and column patterns
//! strike image rows and columns, and then reshaped with the image.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::atl::{run_atl, AtlConfig};
use crate::completion::{mtnr_admm_complete, mtnr_als_complete, AdmmConfig};
use crate::data::{self, MissingPattern, PatternKind, SyntheticKind, SyntheticSpec};
use crate::error::Error;
use crate::io;
use crate::mask::ObservationMask;
use crate::metrics;
use crate::network::MtnrModel;
use crate::tensor::DenseTensor;

/// Header of the per-trial metrics file.
pub const METRICS_HEADER: &str = "trial,seed,task,rse,psnr,ssim,components,params,wall_ms";

const DATA_STREAM: u64 = 0;
const MASK_STREAM: u64 = 1;
const SOLVER_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Decompose,
    CompleteAls,
    CompleteAdmm,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Decompose => "decompose",
            Task::CompleteAls => "complete-als",
            Task::CompleteAdmm => "complete-admm",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    /// Regenerated per trial; `seed: None` uses the trial seed.
    Synthetic {
        kind: SyntheticKind,
        dims: Vec<usize>,
        seed: Option<u64>,
    },
    TensorFile(PathBuf),
    /// An 8-bit PNG, optionally reshaped to `target_dims`.
    Image {
        path: PathBuf,
        target_dims: Option<Vec<usize>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaskSpec {
    /// Drawn per trial; `seed: None` uses the trial seed.
    Pattern {
        kind: PatternKind,
        rate: f64,
        seed: Option<u64>,
        spatial_modes: (usize, usize),
    },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub input: InputSpec,
    /// Completion only; `None` observes every entry.
    pub mask: Option<MaskSpec>,
    pub solver: AdmmConfig,
    pub out_dir: PathBuf,
    pub trials: usize,
    pub seed_base: u64,
    pub record_timing: bool,
    /// Runs the whole experiment once per missing rate, each in its own subdirectory.
    pub sweep_rates: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: Option<Task>,
    out_dir: Option<PathBuf>,
    trials: Option<usize>,
    seed_base: Option<u64>,
    record_timing: Option<bool>,
    sweep_rates: Option<Vec<f64>>,
    input: RawInput,
    mask: Option<RawMask>,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
enum RawInput {
    Synthetic {
        kind: String,
        dims: Vec<usize>,
        terms: Option<usize>,
        tt_ranks: Option<Vec<usize>>,
        seed: Option<u64>,
    },
    Tensor {
        path: PathBuf,
    },
    Image {
        path: PathBuf,
        target_dims: Option<Vec<usize>>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
enum RawMask {
    Pattern {
        kind: PatternKind,
        rate: f64,
        seed: Option<u64>,
        spatial_modes: Option<(usize, usize)>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    epsilon: Option<f64>,
    delta: Option<f64>,
    s_max: Option<usize>,
    gamma: Option<usize>,
    max_connections: Option<usize>,
    max_components: Option<usize>,
    lambda: Option<f64>,
    rho: Option<f64>,
    rho_max: Option<f64>,
    rho_growth: Option<f64>,
}

impl RawSolver {
    fn build(self) -> AdmmConfig {
        let mut cfg = AdmmConfig::default();
        let atl = &mut cfg.atl;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(atl.epsilon, self.epsilon);
        set!(atl.delta, self.delta);
        set!(atl.s_max, self.s_max);
        atl.gamma = self.gamma.or(atl.gamma);
        set!(atl.max_connections, self.max_connections);
        set!(atl.max_components, self.max_components);
        set!(cfg.lambda, self.lambda);
        set!(cfg.rho, self.rho);
        set!(cfg.rho_max, self.rho_max);
        set!(cfg.rho_growth, self.rho_growth);
        cfg
    }
}

impl ExperimentConfig {
    /// Parses a config; relative paths are resolved against `base_dir`.
    /// `task` may be omitted from the text when `default_task` is given.
    pub fn from_toml(text: &str, base_dir: &Path, default_task: Option<Task>) -> Result<Self, RunError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| RunError::config(e.to_string()))?;
        let task = match (raw.task, default_task) {
            (Some(a), Some(b)) if a != b => {
                return Err(RunError::config(format!("config is for task {a} but {b} was requested")))
            }
            (Some(t), _) | (None, Some(t)) => t,
            (None, None) => return Err(RunError::config("no task given")),
        };
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let input = match raw.input {
            RawInput::Synthetic {
                kind,
                dims,
                terms,
                tt_ranks,
                seed,
            } => {
                let kind = match (kind.as_str(), terms, tt_ranks) {
                    ("rank1-sum", Some(terms), None) => SyntheticKind::Rank1Sum { terms },
                    ("tt-generated", None, Some(tt_ranks)) => SyntheticKind::TtGenerated { tt_ranks },
                    ("rank1-sum", ..) => return Err(RunError::config("rank1-sum input needs `terms` only")),
                    ("tt-generated", ..) => return Err(RunError::config("tt-generated input needs `tt_ranks` only")),
                    (other, ..) => return Err(RunError::config(format!("unknown synthetic kind {other:?}"))),
                };
                InputSpec::Synthetic { kind, dims, seed }
            }
            RawInput::Tensor { path } => InputSpec::TensorFile(resolve(path)),
            RawInput::Image { path, target_dims } => InputSpec::Image {
                path: resolve(path),
                target_dims,
            },
        };
        let mask = raw.mask.map(|m| match m {
            RawMask::Pattern {
                kind,
                rate,
                seed,
                spatial_modes,
            } => MaskSpec::Pattern {
                kind,
                rate,
                seed,
                spatial_modes: spatial_modes.unwrap_or((0, 1)),
            },
            RawMask::File { path } => MaskSpec::File(resolve(path)),
        });
        Ok(Self {
            task,
            input,
            mask,
            solver: raw.solver.build(),
            out_dir: resolve(raw.out_dir.unwrap_or_else(|| PathBuf::from("out"))),
            trials: raw.trials.unwrap_or(1),
            seed_base: raw.seed_base.unwrap_or(0),
            record_timing: raw.record_timing.unwrap_or(false),
            sweep_rates: raw.sweep_rates,
        })
    }

    /// Reads and parses a config file.
    pub fn load(path: impl AsRef<Path>, default_task: Option<Task>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| RunError::new(FailureKind::Input, e.into()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, default_task)
    }
}

/// What went wrong, which decides the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Input,
    Output,
    Config,
    Other,
}

#[derive(Debug)]
pub struct RunError {
    pub kind: FailureKind,
    pub error: Error,
}

impl RunError {
    pub fn new(kind: FailureKind, error: Error) -> Self {
        Self { kind, error }
    }

    fn config(msg: impl Into<String>) -> Self {
        Self::new(FailureKind::Config, Error::Config(msg.into()))
    }

    /// 2 unreadable input, 3 unwritable output, 4 invalid config, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Input => 2,
            FailureKind::Output => 3,
            FailureKind::Config => 4,
            FailureKind::Other => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

fn classify(error: Error) -> RunError {
    let kind = match error {
        Error::Config(_) => FailureKind::Config,
        _ => FailureKind::Other,
    };
    RunError::new(kind, error)
}

fn input_err(error: Error) -> RunError {
    match error {
        Error::Config(_) => classify(error),
        other => RunError::new(FailureKind::Input, other),
    }
}

fn output_err(error: impl Into<Error>) -> RunError {
    RunError::new(FailureKind::Output, error.into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    pub trial: usize,
    pub seed: u64,
    pub rse: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub components: usize,
    pub params: usize,
    pub wall_ms: u128,
}

impl TrialMetrics {
    fn csv_row(&self, task: Task) -> String {
        format!(
            "{},{},{},{:e},{},{},{},{},{}",
            self.trial, self.seed, task, self.rse, self.psnr, self.ssim, self.components, self.params, self.wall_ms
        )
    }
}

/// Best (lowest RSE, highest PSNR and SSIM), mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub best: f64,
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64> + Clone, lower_is_better: bool) -> Self {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.clone().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let best = if lower_is_better {
            values.fold(f64::INFINITY, f64::min)
        } else {
            values.fold(f64::NEG_INFINITY, f64::max)
        };
        Self {
            best,
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub task: Task,
    /// Missing rate of the sweep point, if any.
    pub rate: Option<f64>,
    pub trials: Vec<TrialMetrics>,
    pub rse: Stat,
    pub psnr: Stat,
    pub ssim: Stat,
    pub out_dir: PathBuf,
}

/// Ground truth, shape bookkeeping and mask for one trial.
struct Problem {
    truth: DenseTensor,
    /// Image dims for the per-channel SSIM and the PNG output.
    image_dims: Option<Vec<usize>>,
    mask: Option<ObservationMask>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Input data that does not change across trials.
enum LoadedInput {
    Synthetic(SyntheticKind, Vec<usize>, Option<u64>),
    Fixed {
        tensor: DenseTensor,
        image_dims: Option<Vec<usize>>,
    },
}

impl LoadedInput {
    fn load(spec: &InputSpec) -> Result<Self, RunError> {
        match spec {
            InputSpec::Synthetic { kind, dims, seed } => {
                SyntheticSpec {
                    kind: kind.clone(),
                    dims: dims.clone(),
                    seed: 0,
                }
                .validate()
                .map_err(classify)?;
                Ok(Self::Synthetic(kind.clone(), dims.clone(), *seed))
            }
            InputSpec::TensorFile(path) => Ok(Self::Fixed {
                tensor: io::load_tensor(path).map_err(input_err)?,
                image_dims: None,
            }),
            InputSpec::Image { path, target_dims } => {
                let img = data::load_png(path).map_err(input_err)?;
                let image_dims = img.dims().to_vec();
                let tensor = match target_dims {
                    Some(t) => data::tensorize_image(&img, t)
                        .map_err(|e| RunError::config(format!("target_dims: {e}")))?,
                    None => img,
                };
                Ok(Self::Fixed {
                    tensor,
                    image_dims: Some(image_dims),
                })
            }
        }
    }

    fn dims(&self) -> &[usize] {
        match self {
            Self::Synthetic(_, dims, _) => dims,
            Self::Fixed { tensor, .. } => tensor.dims(),
        }
    }

    /// Dims on which masks are drawn.
    fn mask_dims(&self) -> &[usize] {
        match self {
            Self::Fixed {
                image_dims: Some(d), ..
            } => d,
            _ => self.dims(),
        }
    }

    fn truth(&self, seed: u64) -> Result<(DenseTensor, Option<Vec<usize>>), RunError> {
        match self {
            Self::Synthetic(kind, dims, fixed) => {
                let mut rng = stream_rng(fixed.unwrap_or(seed), DATA_STREAM);
                let t = match kind {
                    SyntheticKind::Rank1Sum { terms } => data::gen_rank1_sum(dims, *terms, &mut rng),
                    SyntheticKind::TtGenerated { tt_ranks } => data::gen_tt(dims, tt_ranks, &mut rng),
                }
                .map_err(classify)?;
                Ok((t, None))
            }
            Self::Fixed { tensor, image_dims } => Ok((tensor.clone(), image_dims.clone())),
        }
    }
}

/// Resolved mask source for one sweep point.
enum LoadedMask {
    None,
    Pattern {
        kind: PatternKind,
        rate: f64,
        seed: Option<u64>,
        spatial_modes: (usize, usize),
    },
    Fixed(ObservationMask),
}

impl LoadedMask {
    fn load(spec: Option<&MaskSpec>, rate_override: Option<f64>, input: &LoadedInput) -> Result<Self, RunError> {
        let out = match spec {
            None if rate_override.is_some() => return Err(RunError::config("sweep_rates needs a [mask] pattern")),
            None => Self::None,
            Some(MaskSpec::Pattern {
                kind,
                rate,
                seed,
                spatial_modes,
            }) => Self::Pattern {
                kind: *kind,
                rate: rate_override.unwrap_or(*rate),
                seed: *seed,
                spatial_modes: *spatial_modes,
            },
            Some(MaskSpec::File(_)) if rate_override.is_some() => {
                return Err(RunError::config("sweep_rates needs a [mask] pattern, not a file"))
            }
            Some(MaskSpec::File(path)) => {
                let m = io::load_mask(path).map_err(input_err)?;
                if m.dims() != input.dims() {
                    return Err(RunError::config(format!(
                        "mask dims {:?} differ from input dims {:?}",
                        m.dims(),
                        input.dims()
                    )));
                }
                Self::Fixed(m)
            }
        };
        if let Self::Pattern {
            kind,
            rate,
            spatial_modes,
            ..
        } = &out
        {
            let p = MissingPattern {
                kind: *kind,
                rate: *rate,
                seed: 0,
                spatial_modes: *spatial_modes,
            };
            p.validate(input.mask_dims()).map_err(classify)?;
        }
        Ok(out)
    }

    fn draw(&self, seed: u64, mask_dims: &[usize], dims: &[usize]) -> Result<Option<ObservationMask>, RunError> {
        match self {
            Self::None => Ok(None),
            Self::Fixed(m) => Ok(Some(m.clone())),
            Self::Pattern {
                kind,
                rate,
                seed: fixed,
                spatial_modes,
            } => {
                let pattern = MissingPattern {
                    kind: *kind,
                    rate: *rate,
                    seed: fixed.unwrap_or(seed),
                    spatial_modes: *spatial_modes,
                };
                let m = data::gen_mask(mask_dims, &pattern, &mut stream_rng(pattern.seed, MASK_STREAM))
                    .map_err(classify)?;
                let m = ObservationMask::new(dims.to_vec(), m.as_slice().to_vec()).map_err(classify)?;
                Ok(Some(m))
            }
        }
    }
}

fn validate(cfg: &ExperimentConfig, dims: &[usize]) -> Result<(), RunError> {
    if cfg.trials < 1 {
        return Err(RunError::config("trials must be at least 1"));
    }
    match cfg.task {
        Task::CompleteAdmm => cfg.solver.validate(dims).map_err(classify)?,
        _ => cfg.solver.atl.validate(dims).map_err(classify)?,
    }
    if cfg.task == Task::Decompose && (cfg.mask.is_some() || cfg.sweep_rates.is_some()) {
        return Err(RunError::config("decompose takes no mask or sweep"));
    }
    if let Some(rates) = &cfg.sweep_rates {
        if rates.is_empty() {
            return Err(RunError::config("sweep_rates is empty"));
        }
    }
    Ok(())
}

fn solve(
    task: Task,
    solver: &AdmmConfig,
    problem: &Problem,
    seed: u64,
) -> Result<(DenseTensor, MtnrModel), RunError> {
    let mut rng = stream_rng(seed, SOLVER_STREAM);
    let atl: &AtlConfig = &solver.atl;
    let truth = &problem.truth;
    let all = || ObservationMask::all_observed(truth.dims());
    match task {
        Task::Decompose => {
            let model = run_atl(truth, atl, &mut rng).map_err(classify)?;
            Ok((model.recover(), model))
        }
        Task::CompleteAls => {
            let mask = problem.mask.clone().unwrap_or_else(all);
            let out = mtnr_als_complete(truth, &mask, atl, &mut rng).map_err(classify)?;
            Ok((out.tensor, out.model))
        }
        Task::CompleteAdmm => {
            let mask = problem.mask.clone().unwrap_or_else(all);
            let out = mtnr_admm_complete(truth, &mask, solver, &mut rng).map_err(classify)?;
            Ok((out.tensor, out.model))
        }
    }
}

fn score(problem: &Problem, x: &DenseTensor) -> Result<(f64, f64, f64), RunError> {
    let truth = &problem.truth;
    let rse = if truth.norm() == 0.0 {
        if x.norm() == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        metrics::rse(x, truth).map_err(classify)?
    };
    let psnr = metrics::psnr(x, truth).map_err(classify)?;
    let ssim = match &problem.image_dims {
        Some(d) => {
            let xi = data::detensorize_image(x, d).map_err(classify)?;
            let ti = data::detensorize_image(truth, d).map_err(classify)?;
            metrics::ssim_image(&xi, &ti).map_err(classify)?
        }
        None => metrics::ssim(x, truth).map_err(classify)?,
    };
    Ok((rse, psnr, ssim))
}

fn run_point(
    cfg: &ExperimentConfig,
    input: &LoadedInput,
    mask: &LoadedMask,
    rate: Option<f64>,
    out_dir: &Path,
) -> Result<RunSummary, RunError> {
    fs::create_dir_all(out_dir).map_err(output_err)?;
    let metrics_path = out_dir.join("metrics.csv");
    fs::write(&metrics_path, "").map_err(output_err)?;
    let rows: Vec<Result<TrialMetrics, RunError>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = cfg.seed_base + trial as u64;
            let (truth, image_dims) = input.truth(seed)?;
            let mask = mask.draw(seed, input.mask_dims(), truth.dims())?;
            let problem = Problem {
                truth,
                image_dims,
                mask,
            };
            let start = Instant::now();
            let (x, model) = solve(cfg.task, &cfg.solver, &problem, seed)?;
            let wall_ms = if cfg.record_timing { start.elapsed().as_millis() } else { 0 };
            let (rse, psnr, ssim) = score(&problem, &x)?;
            let stem = out_dir.join(format!("trial_{trial}"));
            io::save_tensor(stem.with_extension("dnt"), &x).map_err(output_err)?;
            io::save_model(stem.with_extension("mtnr"), &model).map_err(output_err)?;
            if let Some(m) = &problem.mask {
                io::save_mask(stem.with_extension("msk"), m).map_err(output_err)?;
            }
            if let Some(d) = &problem.image_dims {
                let img = data::detensorize_image(&x, d).map_err(classify)?;
                data::save_png(stem.with_extension("png"), &img).map_err(output_err)?;
            }
            Ok(TrialMetrics {
                trial,
                seed,
                rse,
                psnr,
                ssim,
                components: model.len(),
                params: model.parameter_count(),
                wall_ms,
            })
        })
        .collect();
    let trials = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from(METRICS_HEADER);
    csv.push('\n');
    for t in &trials {
        csv.push_str(&t.csv_row(cfg.task));
        csv.push('\n');
    }
    fs::write(&metrics_path, csv).map_err(output_err)?;
    let summary = RunSummary {
        task: cfg.task,
        rate,
        rse: Stat::of(trials.iter().map(|t| t.rse), true),
        psnr: Stat::of(trials.iter().map(|t| t.psnr), false),
        ssim: Stat::of(trials.iter().map(|t| t.ssim), false),
        trials,
        out_dir: out_dir.to_path_buf(),
    };
    let mut text = String::from("task,trials,rse_best,rse_mean,rse_std,psnr_best,psnr_mean,psnr_std,ssim_best,ssim_mean,ssim_std\n");
    let _ = write!(text, "{},{}", summary.task, summary.trials.len());
    let r = summary.rse;
    let _ = write!(text, ",{:e},{:e},{:e}", r.best, r.mean, r.std);
    for s in [summary.psnr, summary.ssim] {
        let _ = write!(text, ",{},{},{}", s.best, s.mean, s.std);
    }
    text.push('\n');
    fs::write(out_dir.join("summary.csv"), text).map_err(output_err)?;
    Ok(summary)
}

/// Runs every trial (and sweep point) of `cfg`, writing under `cfg.out_dir`:
/// `metrics.csv`, `summary.csv` and per-trial `trial_<t>.{dnt,mtnr,msk,png}`;
/// a sweep writes one subdirectory per rate plus `sweep.tsv`. Nothing is
/// written unless the config and inputs are valid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunSummary>, RunError> {
    let input = LoadedInput::load(&cfg.input)?;
    validate(cfg, input.dims())?;
    match &cfg.sweep_rates {
        None => {
            let mask = LoadedMask::load(cfg.mask.as_ref(), None, &input)?;
            Ok(vec![run_point(cfg, &input, &mask, None, &cfg.out_dir)?])
        }
        Some(rates) => {
            let masks = rates
                .iter()
                .map(|&r| LoadedMask::load(cfg.mask.as_ref(), Some(r), &input))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = Vec::new();
            for (&rate, mask) in rates.iter().zip(&masks) {
                let dir = cfg.out_dir.join(format!("rate_{rate}"));
                out.push(run_point(cfg, &input, mask, Some(rate), &dir)?);
            }
            let mut tsv = String::from("rate\trse_best\trse_mean\tpsnr_best\tpsnr_mean\tssim_best\tssim_mean\n");
            for s in &out {
                let _ = writeln!(
                    tsv,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    s.rate.unwrap_or(0.0),
                    s.rse.best,
                    s.rse.mean,
                    s.psnr.best,
                    s.psnr.mean,
                    s.ssim.best,
                    s.ssim.mean
                );
            }
            fs::write(cfg.out_dir.join("sweep.tsv"), tsv).map_err(output_err)?;
            Ok(out)
        }
    }
}

/// Human-readable topology report for a saved model.
pub fn inspect_model(path: impl AsRef<Path>) -> Result<String, RunError> {
    let model = io::load_model(path).map_err(input_err)?;
    Ok(describe_model(&model))
}

/// Per component: parameter count, squared-norm share of the reconstructions,
/// edge list and rank matrix.
pub fn describe_model(model: &MtnrModel) -> String {
    let norms: Vec<f64> = model.components().iter().map(|c| c.recover().norm_sq()).collect();
    let total: f64 = norms.iter().sum();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dims {:?}, {} components, {} parameters",
        model.dims(),
        model.len(),
        model.parameter_count()
    );
    for (k, (c, n)) in model.components().iter().zip(&norms).enumerate() {
        let edges = c.ranks().edges();
        let share = if total > 0.0 { n / total } else { 0.0 };
        let _ = writeln!(
            out,
            "component {k}: {} parameters, {} edges, norm share {share:.4}",
            c.parameter_count(),
            edges.len()
        );
        if !edges.is_empty() {
            let list: Vec<String> = edges.iter().map(|(i, j, r)| format!("{i}-{j}:{r}")).collect();
            let _ = writeln!(out, "  edges {}", list.join(" "));
        }
        for row in c.ranks().to_rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
            let _ = writeln!(out, "  {}", cells.join(""));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, RunError> {
        ExperimentConfig::from_toml(text, Path::new("/base"), None)
    }

    #[test]
    fn parses_full_config() {
        let cfg = parse(
            r#"
            task = "complete-admm"
            out_dir = "runs"
            trials = 3
            seed_base = 5
            [input]
            source = "image"
            path = "a.png"
            target_dims = [8, 8, 8, 8, 3]
            [mask]
            source = "pattern"
            kind = "rmar"
            rate = 0.5
            [solver]
            s_max = 10
            lambda = 2.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.task, Task::CompleteAdmm);
        assert_eq!(cfg.out_dir, PathBuf::from("/base/runs"));
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.solver.atl.s_max, 10);
        assert_eq!(cfg.solver.lambda, 2.0);
        assert_eq!(cfg.solver.rho, 0.1);
        assert_eq!(
            cfg.input,
            InputSpec::Image {
                path: PathBuf::from("/base/a.png"),
                target_dims: Some(vec![8, 8, 8, 8, 3])
            }
        );
        assert!(matches!(cfg.mask, Some(MaskSpec::Pattern { kind: PatternKind::Rmar, spatial_modes: (0, 1), .. })));
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "[input]\nsource = \"synthetic\"\nkind = \"rank1-sum\"\nterms = 1\ndims = [2, 2]\n";
        assert_eq!(parse(base).unwrap_err().exit_code(), 4);
        let with_task = format!("task = \"decompose\"\n{base}");
        assert!(parse(&with_task).is_ok());
        assert!(parse(&format!("{with_task}[solver]\nbogus = 1\n")).is_err());
        assert!(ExperimentConfig::from_toml(&with_task, Path::new("."), Some(Task::CompleteAls)).is_err());
        let tt = with_task.replace("terms = 1", "tt_ranks = [2]");
        assert!(parse(&tt).is_err());
    }

    #[test]
    fn summary_stats() {
        let s = Stat::of([1.0, 3.0].into_iter(), true);
        assert_eq!((s.best, s.mean, s.std), (1.0, 2.0, 1.0));
        assert_eq!(Stat::of([1.0, 3.0].into_iter(), false).best, 3.0);
    }
}
