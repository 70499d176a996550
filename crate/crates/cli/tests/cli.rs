//! End-to-end checks of the CLI surface: config files, CSV schema,
//! deterministic reports, sweep merging, and process exit codes.

use std::path::Path;
use std::process::Command;

use wpme_cli::{sweep, ExperimentConfig, CSV_HEADER};

const SIMULATE_CFG: &str = r#"
kind = "simulate"
family = "power"
alpha = 1.0
beta = 0.5
b = 1.0
n = 64
m = 2.0
datum = "eigen-perturbation"
mean = 1.0
c1 = 0.05
t_lo = 0.01
t_hi = 0.1
seed = 11
"#;

fn run_to(dir: &Path, text: &str) -> wpme_cli::Report {
    let cfg = ExperimentConfig::from_text(text).unwrap();
    wpme_cli::run(&cfg, dir).unwrap()
}

#[test]
fn csv_schema_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_to(dir.path(), SIMULATE_CFG);
    assert!(report.artifacts.contains(&"trajectory.csv".to_string()));
    let raw = std::fs::read(dir.path().join("trajectory.csv")).unwrap();
    let text = String::from_utf8(raw.clone()).unwrap();
    // LF-only newlines
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 9, "bad row: {line}");
        for cell in cells {
            // 17 significant digits in scientific notation, parses back
            let mantissa = cell.split('e').next().unwrap();
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17, "cell {cell} lacks 17 significant digits");
            cell.parse::<f64>().unwrap();
        }
        rows += 1;
    }
    // one record per output time plus the initial state
    assert_eq!(rows, 10);
}

#[test]
fn reports_are_byte_identical_for_same_config_and_seed() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    run_to(d1.path(), SIMULATE_CFG);
    run_to(d2.path(), SIMULATE_CFG);
    let r1 = std::fs::read(d1.path().join("report.json")).unwrap();
    let r2 = std::fs::read(d2.path().join("report.json")).unwrap();
    assert_eq!(r1, r2);
    let c1 = std::fs::read(d1.path().join("trajectory.csv")).unwrap();
    let c2 = std::fs::read(d2.path().join("trajectory.csv")).unwrap();
    assert_eq!(c1, c2);
}

#[test]
fn seeded_randomness_is_deterministic_and_seed_sensitive() {
    let base = r#"
kind = "sobolev-scan"
family = "power"
alpha = 2.0
beta = 1.5
b = 1.0
sigma = 3.0
levels = [32, 64]
"#;
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = run_to(d1.path(), &format!("{base}seed = 5\n"));
    let b = run_to(d2.path(), &format!("{base}seed = 5\n"));
    assert_eq!(a.measured, b.measured);
}

#[test]
fn simulate_constant_datum_is_trivially_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_to(
        dir.path(),
        r#"
kind = "simulate"
family = "unit"
n = 32
m = 2.5
datum = "constant"
value = 0.75
t_lo = 0.01
t_hi = 0.1
"#,
    );
    assert!(report.all_pass());
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        // mean, l1, l2, lq0, linf all stay at the constant
        for idx in [2, 3, 4, 5, 6] {
            assert!((cells[idx] - 0.75).abs() < 1e-13, "{line}");
        }
    }
}

#[test]
fn sweep_empty_directory_succeeds() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let merged = sweep::sweep(cfg_dir.path(), out_dir.path()).unwrap();
    assert!(merged.runs.is_empty());
    assert!(!merged.any_error());
    assert!(out_dir.path().join("sweep.json").exists());
}

#[test]
fn sweep_duplicate_configs_give_identical_rows() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    std::fs::write(cfg_dir.path().join("a.cfg"), SIMULATE_CFG).unwrap();
    std::fs::write(cfg_dir.path().join("b.cfg"), SIMULATE_CFG).unwrap();
    let merged = sweep::sweep(cfg_dir.path(), out_dir.path()).unwrap();
    assert_eq!(merged.runs.len(), 2);
    assert_eq!(merged.runs[0].key, merged.runs[1].key);
    let ra = serde_json::to_string(&merged.runs[0].report).unwrap();
    let rb = serde_json::to_string(&merged.runs[1].report).unwrap();
    assert_eq!(ra, rb);
    // per-run artifacts live under the config stem
    assert!(out_dir.path().join("a/trajectory.csv").exists());
    assert!(out_dir.path().join("b/trajectory.csv").exists());
}

#[test]
fn sweep_records_partial_failures() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    std::fs::write(cfg_dir.path().join("good.cfg"), SIMULATE_CFG).unwrap();
    std::fs::write(cfg_dir.path().join("bad.cfg"), "kind = \"no-such-kind\"\n").unwrap();
    let merged = sweep::sweep(cfg_dir.path(), out_dir.path()).unwrap();
    assert_eq!(merged.runs.len(), 2);
    assert!(merged.any_error());
    let bad = merged.runs.iter().find(|r| r.name == "bad").unwrap();
    assert!(bad.error.as_deref().unwrap().contains("no-such-kind"));
    let good = merged.runs.iter().find(|r| r.name == "good").unwrap();
    assert!(good.report.as_ref().unwrap().all_pass());
}

fn wpme_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wpme"))
}

#[test]
fn exit_codes_reflect_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("ok.cfg");
    std::fs::write(&cfg_path, SIMULATE_CFG).unwrap();

    // 0: all verdicts pass
    let out = wpme_bin()
        .args(["run", cfg_path.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));

    // 1: a verdict fails (late-window fit deliberately compared against the
    // short-time prediction)
    let failing = r#"
kind = "smoothing"
bc = "dirichlet"
family = "unit"
n = 128
m = 2.0
q0 = 1.0
datum = "spike"
spike_width = 0.05
spike_height = 100.0
t_lo = 1e-5
t_hi = 1e3
fit_t_lo = 10.0
fit_t_hi = 1000.0
"#;
    let fail_path = dir.path().join("fail.cfg");
    std::fs::write(&fail_path, failing).unwrap();
    let out = wpme_bin()
        .args(["run", fail_path.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    // 2: runtime error (missing file)
    let out = wpme_bin()
        .args(["run", "/definitely/not/here.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // 2: invalid config
    let bad_path = dir.path().join("bad.cfg");
    std::fs::write(&bad_path, "kind = \"simulate\"\nwhat = 1\n").unwrap();
    let out = wpme_bin()
        .args(["run", bad_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_report_round_trips_through_report_subcommand() {
    // a config with an unbounded σ range exercises the non-finite-value
    // handling of the serialized report
    let cfg_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    std::fs::write(cfg_dir.path().join("sim.cfg"), SIMULATE_CFG).unwrap();
    std::fs::write(
        cfg_dir.path().join("dir.cfg"),
        r#"
kind = "smoothing"
bc = "dirichlet"
family = "unit"
n = 128
m = 2.0
q0 = 1.0
datum = "spike"
spike_width = 0.05
spike_height = 100.0
t_lo = 1e-5
t_hi = 10.0
fit_t_lo = 1e-3
fit_t_hi = 1e-1
"#,
    )
    .unwrap();
    let merged = sweep::sweep(cfg_dir.path(), out_dir.path()).unwrap();
    assert!(!merged.any_error());
    let out = wpme_bin()
        .args(["report"])
        .arg(out_dir.path().join("sweep.json"))
        .output()
        .unwrap();
    // the loader must round-trip the merged JSON (including the omitted
    // non-finite σ) and the exit code must mirror the verdicts
    let expected = if merged.all_pass() { 0 } else { 1 };
    assert_eq!(out.status.code(), Some(expected), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("smoothing/smoothing_exponent"));
    assert!(stdout.contains("simulate/mass_drift"));
}

#[test]
fn report_subcommand_renders_saved_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_to(dir.path(), SIMULATE_CFG);
    assert!(report.all_pass());
    let out = wpme_bin()
        .args(["report"])
        .arg(dir.path().join("report.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS simulate/mass_drift"));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("sim.cfg");
    std::fs::write(&cfg_path, SIMULATE_CFG).unwrap();
    let out_root = dir.path().join("envout");
    let out = wpme_bin()
        .args(["run", cfg_path.to_str().unwrap()])
        .env("WPME_OUT_DIR", &out_root)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(out_root.join("sim/report.json").exists());
}

#[test]
fn failed_runs_leave_a_structured_error_report() {
    let dir = tempfile::tempdir().unwrap();
    // valid config whose run fails: datum outside the confinement window
    let cfg = r#"
kind = "barenblatt-verify"
family = "radial_power"
N = 3
b = 1.0
n = 64
m = 2.0
datum = "barenblatt"
barenblatt_c = 0.05
t0 = 100.0
"#;
    let path = dir.path().join("late.cfg");
    std::fs::write(&path, cfg).unwrap();
    let out = wpme_bin()
        .args(["run", path.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let saved = std::fs::read_to_string(dir.path().join("out/late/report.json")).unwrap();
    let report: wpme_cli::Report = serde_json::from_str(&saved).unwrap();
    assert!(report.error.as_deref().unwrap().contains("confinement"));
    assert!(!report.all_pass());
}
