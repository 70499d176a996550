//! Reports, verdicts and the trajectory CSV writer.
//!
//! Reports serialize deterministically: identical (config, seed) pairs give
//! byte-identical report.json files. Wall-clock time is returned to the
//! caller and logged, but kept out of the serialized report for that
//! reason.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use wpme::solver::Trajectory;

/// Fixed trajectory CSV header.
pub const CSV_HEADER: &str = "t,mass,mean,l1,l2,lq0,linf,linf_err_mean,l2_err_mean";

/// One checked statement with the tolerance that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// Measured value.
    pub value: f64,
    /// Reference value the measurement is compared against.
    pub target: f64,
    /// Tolerance in the sense recorded in `detail`.
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    /// |value - target| ≤ tolerance · |target|.
    pub fn relative(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = value.is_finite() && (value - target).abs() <= tolerance * target.abs();
        Verdict {
            name: name.into(),
            pass,
            value,
            target,
            tolerance,
            detail: format!("|value - target| <= {tolerance} * |target|"),
        }
    }

    /// value ≤ bound.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Verdict {
            name: name.into(),
            pass: value.is_finite() && value <= bound,
            value,
            target: bound,
            tolerance: bound,
            detail: "value <= bound".into(),
        }
    }

    /// value ≥ bound.
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Verdict {
            name: name.into(),
            pass: value.is_finite() && value >= bound,
            value,
            target: bound,
            tolerance: bound,
            detail: "value >= bound".into(),
        }
    }

    pub fn boolean(name: &str, pass: bool, detail: &str) -> Self {
        Verdict {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            target: 1.0,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

/// Summary of one fitted rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    /// "power" or "exp".
    pub model: String,
    /// Decay exponent (power) or rate (exp).
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl FitSummary {
    pub fn power(name: &str, fit: &wpme::RateFit64) -> Self {
        FitSummary {
            name: name.into(),
            model: "power".into(),
            rate: fit.exponent,
            prefactor: fit.log_prefactor.exp(),
            r_squared: fit.r_squared,
            window: fit.window,
            points: fit.points,
        }
    }

    pub fn exp(name: &str, fit: &wpme::ExpFit64) -> Self {
        FitSummary {
            name: name.into(),
            model: "exp".into(),
            rate: fit.rate,
            prefactor: fit.prefactor,
            r_squared: fit.r_squared,
            window: fit.window,
            points: fit.points,
        }
    }
}

/// Result of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    /// Config echo (exactly the keys supplied).
    pub config: BTreeMap<String, Value>,
    /// Predicted reference quantities, keyed by name.
    pub predicted: BTreeMap<String, f64>,
    /// Measured scalar quantities, keyed by name.
    pub measured: BTreeMap<String, f64>,
    pub fits: Vec<FitSummary>,
    pub verdicts: Vec<Verdict>,
    /// Files written by the run, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Structured runtime error, for runs that aborted mid-way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(kind: &str, config: BTreeMap<String, Value>) -> Self {
        Report {
            kind: kind.into(),
            config,
            predicted: BTreeMap::new(),
            measured: BTreeMap::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            artifacts: Vec::new(),
            error: None,
        }
    }

    /// Report carrying only a runtime error.
    pub fn from_error(kind: &str, config: BTreeMap<String, Value>, error: String) -> Self {
        let mut report = Report::new(kind, config);
        report.error = Some(error);
        report
    }

    pub fn all_pass(&self) -> bool {
        self.error.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("report.json");
        let mut file = std::fs::File::create(&path)?;
        file.write_all(self.to_json().as_bytes())?;
        file.write_all(b"\n")?;
        Ok(path)
    }

    /// One line per verdict, pass/fail first.
    pub fn render_verdicts(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let status = if v.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {kind}/{name}: value={value:.6e} target={target:.6e} ({detail})\n",
                kind = self.kind,
                name = v.name,
                value = v.value,
                target = v.target,
                detail = v.detail,
            ));
        }
        out
    }
}

/// 17 significant digits, round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a trajectory in the fixed CSV schema (LF newlines).
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory<f64>) -> std::io::Result<()> {
    let mut out = String::with_capacity(traj.records.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &traj.records {
        let row = [
            r.t,
            r.mass,
            r.mean,
            r.l1,
            r.l2,
            r.lq0,
            r.linf,
            r.linf_err_mean,
            r.l2_err_mean,
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Write a plain two-column data file (for fitted curves; plotting is
/// external).
pub fn write_xy(path: &Path, xs: &[f64], ys: &[f64]) -> std::io::Result<()> {
    let mut out = String::new();
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&fmt_f64(*x));
        out.push(' ');
        out.push_str(&fmt_f64(*y));
        out.push('\n');
    }
    std::fs::write(path, out)
}
