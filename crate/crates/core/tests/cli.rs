//! End-to-end runs of the `mtnr` binary and the bundled configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtnr::data::gen_rank1_sum;
use mtnr::experiment::{run_experiment, ExperimentConfig, METRICS_HEADER};
use mtnr::io::{load_mask, load_tensor, save_model, save_tensor};
use mtnr::{MtnrModel, TnComponent};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mtnr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtnr"))
        .args(args)
        .env("MTNR_LOG", "error")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

/// The `column` field of every data row of a metrics file.
fn metrics_column(path: &Path, column: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(METRICS_HEADER));
    let k = METRICS_HEADER.split(',').position(|c| c == column).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn decompose_rank_one_input() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
out_dir = "out"
trials = 2

[input]
source = "synthetic"
kind = "rank1-sum"
terms = 1
dims = [4, 5, 3]
"#,
    );
    let out = mtnr(&["decompose", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("decompose"));
    let rse = metrics_column(&dir.path().join("out/metrics.csv"), "rse");
    assert_eq!(rse.len(), 2);
    for v in rse {
        assert!(v.parse::<f64>().unwrap() <= 1e-6, "rse {v}");
    }
    assert!(dir.path().join("out/summary.csv").exists());
    assert!(dir.path().join("out/trial_1.mtnr").exists());
}

#[test]
fn completion_without_missing_entries_returns_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen_rank1_sum(&[3, 4, 5], 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    save_tensor(dir.path().join("x.dnt"), &x).unwrap();
    let config = write_config(
        dir.path(),
        r#"
[input]
source = "tensor"
path = "x.dnt"

[mask]
source = "pattern"
kind = "mar"
rate = 0.0

[solver]
s_max = 40
"#,
    );
    let out_dir = dir.path().join("als");
    let out = mtnr(&["complete-als", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(load_tensor(out_dir.join("trial_0.dnt")).unwrap(), x);
    assert_eq!(load_mask(out_dir.join("trial_0.msk")).unwrap().missing_count(), 0);
}

#[test]
fn invalid_config_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
out_dir = "out"

[input]
source = "synthetic"
kind = "rank1-sum"
terms = 2
dims = [3, 3, 3]

[solver]
epsilon = 0.0
"#,
    );
    let out = mtnr(&["decompose", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_and_task_mismatch_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "task = \"decompose\"\n[input]\nsource = \"synthetic\"\nkind = \"rank1-sum\"\nterms = 1\ndims = [2, 2]\n");
    let out = mtnr(&["complete-admm", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let config = write_config(dir.path(), "colour = 3\n[input]\nsource = \"synthetic\"\nkind = \"rank1-sum\"\nterms = 1\ndims = [2, 2]\n");
    assert_eq!(mtnr(&["decompose", "--config", config.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mtnr(&["decompose", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let config = write_config(dir.path(), "[input]\nsource = \"tensor\"\npath = \"absent.dnt\"\n");
    assert_eq!(mtnr(&["decompose", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn inspect_reports_topology() {
    let dir = tempfile::tempdir().unwrap();
    let c = TnComponent::rank_one(&[vec![1.0, 2.0], vec![3.0, 4.0, 5.0]]).unwrap();
    let path = dir.path().join("m.mtnr");
    save_model(&path, &MtnrModel::from_components(&[2, 3], vec![c]).unwrap()).unwrap();
    let out = mtnr(&["inspect", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 edges"), "{text}");
    assert!(text.contains("5 parameters"), "{text}");
}

#[test]
fn mask_command_writes_the_requested_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.msk");
    let out = mtnr(&[
        "mask", "--pattern", "rmar", "--rate", "0.5", "--dims", "8,6,3", "--seed", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mask = load_mask(&path).unwrap();
    assert_eq!(mask.dims(), &[8, 6, 3]);
    assert_eq!(mask.missing_count(), 4 * 6 * 3);
    let bad = mtnr(&["mask", "--pattern", "mar", "--rate", "1.5", "--dims", "4,4", "--out", path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn bundled_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut names: Vec<PathBuf> = fs::read_dir(&configs).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for path in names {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::load(&path, None).unwrap();
        cfg.out_dir = dir.path().to_path_buf();
        cfg.trials = 1;
        cfg.solver.atl.s_max = 5;
        cfg.solver.atl.max_components = 2;
        let summaries = run_experiment(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!summaries.is_empty());
        for s in summaries {
            assert!(s.rse.best.is_finite(), "{}", path.display());
        }
    }
}
