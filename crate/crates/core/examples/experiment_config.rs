//! A full experiment from a TOML config: trials, metrics files and artifacts.

use mtnr::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
task = "complete-als"
out_dir = "run"
trials = 3
[input]
source = "synthetic"
kind = "rank1-sum"
terms = 2
dims = [6, 6, 6, 6]
[mask]
kind = "mar"
source = "pattern"
rate = 0.3
[solver]
s_max = 300
gamma = 60
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let cfg = ExperimentConfig::from_toml(CONFIG, dir.path(), None)?;
    let summary = &run_experiment(&cfg)?[0];
    println!("rse best {:.3e}, mean {:.3e}", summary.rse.best, summary.rse.mean);
    print!("{}", std::fs::read_to_string(dir.path().join("run/metrics.csv"))?);
    let mut files: Vec<String> = std::fs::read_dir(dir.path().join("run"))?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    files.sort();
    println!("artifacts: {}", files.join(" "));
    Ok(())
}
