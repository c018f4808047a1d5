use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtnr::data::{gen_mask, MissingPattern, PatternKind};
use mtnr::experiment::{inspect_model, run_experiment, ExperimentConfig, FailureKind, RunError, Task};
use mtnr::io::save_mask;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Multi-component tensor-network decomposition and completion.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose tensors by adaptive topology learning.
    Decompose(RunArgs),
    /// Complete tensors with the alternating least squares solver.
    CompleteAls(RunArgs),
    /// Complete tensors with the ADMM solver.
    CompleteAdmm(RunArgs),
    /// Print the topology of a saved model.
    Inspect {
        model: PathBuf,
    },
    /// Draw an observation mask and save it.
    Mask(MaskArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of trials, overriding the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Seed of the first trial, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MaskArgs {
    /// mar, rmar, cmar or rcmar.
    #[arg(long)]
    pattern: PatternKind,
    /// Missing rate in [0, 1).
    #[arg(long)]
    rate: f64,
    /// Tensor dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Row and column modes for row/column patterns.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0, 1])]
    spatial_modes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output mask file.
    #[arg(long)]
    out: PathBuf,
}

fn run(task: Task, args: RunArgs) -> Result<(), RunError> {
    let mut cfg = ExperimentConfig::load(&args.config, Some(task))?;
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed_base = s;
    }
    for s in run_experiment(&cfg)? {
        let rate = s.rate.map_or(String::new(), |r| format!(" rate={r}"));
        println!(
            "{}{rate} trials={} rse_best={:.6e} rse_mean={:.6e} psnr_best={:.3} ssim_best={:.4} out={}",
            s.task,
            s.trials.len(),
            s.rse.best,
            s.rse.mean,
            s.psnr.best,
            s.ssim.best,
            s.out_dir.display()
        );
    }
    Ok(())
}

fn mask(args: MaskArgs) -> Result<(), RunError> {
    let pattern = MissingPattern {
        kind: args.pattern,
        rate: args.rate,
        seed: args.seed,
        spatial_modes: (args.spatial_modes[0], args.spatial_modes[1]),
    };
    let m = gen_mask(&args.dims, &pattern, &mut ChaCha8Rng::seed_from_u64(args.seed))
        .map_err(|e| RunError::new(FailureKind::Config, e))?;
    save_mask(&args.out, &m).map_err(|e| RunError::new(FailureKind::Output, e))?;
    println!(
        "{} of {} entries missing ({:.4}) -> {}",
        m.missing_count(),
        m.len(),
        m.missing_rate(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MTNR_LOG", "warn")).init();
    let result = match Cli::parse().command {
        Command::Decompose(a) => run(Task::Decompose, a),
        Command::CompleteAls(a) => run(Task::CompleteAls, a),
        Command::CompleteAdmm(a) => run(Task::CompleteAdmm, a),
        Command::Inspect { model } => inspect_model(&model).map(|r| print!("{r}")),
        Command::Mask(a) => mask(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
