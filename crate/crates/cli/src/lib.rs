//! Experiment runner: resolves a TOML config, runs a named suite and writes
//! a CSV of results plus one JSONL metadata record per run.

pub mod config;
pub mod run;
pub mod suites;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use run::{main_with_args, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
