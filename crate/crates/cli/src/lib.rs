#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Config-driven experiment runner for the wpme solver: parses flat
//! key-value configs, executes verification experiments, and emits
//! deterministic CSV/JSON reports.

pub mod config;
pub mod datum;
pub mod experiments;
pub mod report;
pub mod sweep;

pub use config::{ConfigError, DatumSpec, ExperimentConfig, ExperimentKind};
pub use experiments::{run, RunError};
pub use report::{FitSummary, Report, Verdict, CSV_HEADER};
