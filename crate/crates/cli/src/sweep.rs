//! Concurrent sweeps over a directory of config files.
//!
//! Runs are share-nothing and executed in parallel; results are merged
//! keyed by config hash and sorted, so the merged report does not depend on
//! scheduling order.


use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiments;
use crate::report::Report;

/// One sweep entry: a finished report or a structured failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub key: String,
    pub name: String,
    pub report: Option<Report>,
    pub error: Option<String>,
}

/// Merged result of a sweep, ordered by config hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn any_error(&self) -> bool {
        self.runs.iter().any(|r| r.error.is_some())
    }

    pub fn all_pass(&self) -> bool {
        self.runs
            .iter()
            .all(|r| r.report.as_ref().is_some_and(|rep| rep.all_pass()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep report serializes")
    }
}

/// Collect `*.cfg` files under `dir` (sorted by name).
pub fn collect_configs(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Run every config under `dir`, writing per-run artifacts into
/// `out_dir/<stem>/` and the merged report into `out_dir/sweep.json`.
pub fn sweep(dir: &Path, out_dir: &Path) -> std::io::Result<SweepReport> {
    let paths = collect_configs(dir)?;
    let mut entries: Vec<(u64, SweepEntry)> = paths
        .par_iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "config".into());
            match ExperimentConfig::from_file(path) {
                Err(err) => (
                    fallback_key(&name),
                    SweepEntry {
                        key: format!("{:016x}", fallback_key(&name)),
                        name,
                        report: None,
                        error: Some(err.to_string()),
                    },
                ),
                Ok(cfg) => {
                    let hash = cfg.hash();
                    let run_dir = out_dir.join(&name);
                    let entry = match experiments::run(&cfg, &run_dir) {
                        Ok(report) => SweepEntry {
                            key: format!("{hash:016x}"),
                            name,
                            report: Some(report),
                            error: None,
                        },
                        Err(err) => SweepEntry {
                            key: format!("{hash:016x}"),
                            name,
                            report: None,
                            error: Some(err.to_string()),
                        },
                    };
                    (hash, entry)
                }
            }
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)));
    let report = SweepReport {
        runs: entries.into_iter().map(|(_, e)| e).collect(),
    };
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("sweep.json"), report.to_json() + "\n")?;
    Ok(report)
}

fn fallback_key(name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in name.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Run a list of already-parsed configs concurrently (share-nothing),
/// merged by config hash; used programmatically.
pub fn sweep_configs(
    configs: &[(String, ExperimentConfig)],
    out_dir: &Path,
) -> SweepReport {
    let mut entries: Vec<(u64, SweepEntry)> = configs
        .par_iter()
        .map(|(name, cfg)| {
            let hash = cfg.hash();
            let run_dir = out_dir.join(name);
            let entry = match experiments::run(cfg, &run_dir) {
                Ok(report) => SweepEntry {
                    key: format!("{hash:016x}"),
                    name: name.clone(),
                    report: Some(report),
                    error: None,
                },
                Err(err) => SweepEntry {
                    key: format!("{hash:016x}"),
                    name: name.clone(),
                    report: None,
                    error: Some(err.to_string()),
                },
            };
            (hash, entry)
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)));
    SweepReport {
        runs: entries.into_iter().map(|(_, e)| e).collect(),
    }
}

/// Merged-or-single report loading for the `report` subcommand.
#[derive(Debug)]
pub enum LoadedReport {
    Single(Box<Report>),
    Sweep(SweepReport),
}

pub fn load_report(path: &Path) -> std::io::Result<LoadedReport> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(single) = serde_json::from_str::<Report>(&text) {
        return Ok(LoadedReport::Single(Box::new(single)));
    }
    serde_json::from_str::<SweepReport>(&text)
        .map(LoadedReport::Sweep)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
