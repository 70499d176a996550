//! Command-line entry point.
//!
//! ```text
//! wpme run <config.cfg> [--out DIR]     run one experiment
//! wpme sweep <dir> [--out DIR]          run every *.cfg in a directory
//! wpme report <report.json>             pretty-print verdicts
//! ```
//!
//! The default output directory is $WPME_OUT_DIR, falling back to ./out.
//! Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use wpme_cli::sweep::{self, LoadedReport};
use wpme_cli::ExperimentConfig;

fn default_out_dir() -> PathBuf {
    std::env::var_os("WPME_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn usage() -> String {
    "usage:\n  wpme run <config.cfg> [--out DIR]\n  wpme sweep <dir> [--out DIR]\n  wpme report <report.json>\n".into()
}

fn parse_out(args: &[String]) -> Result<Option<PathBuf>, String> {
    match args {
        [] => Ok(None),
        [flag, dir] if flag == "--out" => Ok(Some(PathBuf::from(dir))),
        _ => Err(usage()),
    }
}

fn run() -> Result<bool, String> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (cmd, rest) = match args.split_first() {
        Some((c, r)) => (c.as_str(), r),
        None => return Err(usage()),
    };
    match cmd {
        "run" => {
            let (path, tail) = rest.split_first().ok_or_else(usage)?;
            let out = parse_out(tail)?.unwrap_or_else(default_out_dir);
            let path = PathBuf::from(path);
            let cfg = ExperimentConfig::from_file(&path).map_err(|e| e.to_string())?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            let run_dir = out.join(&stem);
            let started = std::time::Instant::now();
            let report = wpme_cli::run(&cfg, &run_dir).map_err(|e| {
                // leave a structured error report behind for CI to collect
                let failed = wpme_cli::Report::from_error(
                    cfg.kind.name(),
                    cfg.echo.clone(),
                    e.to_string(),
                );
                let _ = std::fs::create_dir_all(&run_dir);
                let _ = failed.write_json(&run_dir);
                e.to_string()
            })?;
            print!("{}", report.render_verdicts());
            eprintln!(
                "wrote {} ({} artifacts) in {:.2?}",
                run_dir.join("report.json").display(),
                report.artifacts.len() + 1,
                started.elapsed()
            );
            Ok(report.all_pass())
        }
        "sweep" => {
            let (dir, tail) = rest.split_first().ok_or_else(usage)?;
            let out = parse_out(tail)?.unwrap_or_else(default_out_dir);
            let started = std::time::Instant::now();
            let merged = sweep::sweep(&PathBuf::from(dir), &out).map_err(|e| e.to_string())?;
            for entry in &merged.runs {
                match (&entry.report, &entry.error) {
                    (Some(rep), _) => print!("{}", rep.render_verdicts()),
                    (None, Some(err)) => println!("ERROR {}: {err}", entry.name),
                    _ => {}
                }
            }
            eprintln!(
                "wrote {} ({} runs) in {:.2?}",
                out.join("sweep.json").display(),
                merged.runs.len(),
                started.elapsed()
            );
            if merged.any_error() {
                return Err("sweep had runtime errors".into());
            }
            Ok(merged.all_pass())
        }
        "report" => {
            let (path, tail) = rest.split_first().ok_or_else(usage)?;
            if !tail.is_empty() {
                return Err(usage());
            }
            let loaded = sweep::load_report(&PathBuf::from(path)).map_err(|e| e.to_string())?;
            match loaded {
                LoadedReport::Single(rep) => {
                    print!("{}", rep.render_verdicts());
                    Ok(rep.all_pass())
                }
                LoadedReport::Sweep(merged) => {
                    for entry in &merged.runs {
                        match (&entry.report, &entry.error) {
                            (Some(rep), _) => print!("{}", rep.render_verdicts()),
                            (None, Some(err)) => println!("ERROR {}: {err}", entry.name),
                            _ => {}
                        }
                    }
                    if merged.any_error() {
                        return Err("sweep had runtime errors".into());
                    }
                    Ok(merged.all_pass())
                }
            }
        }
        _ => Err(usage()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
