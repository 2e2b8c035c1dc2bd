//! Batch Monte-Carlo experiment runner: TOML config, parameter sweeps,
//! per-cell seeded channel draws shared across schemes, and deterministic CSV
//! output.

pub mod config;
pub mod csvio;
pub mod runner;

pub use config::{parse_config, ExperimentConfig, Profile, SweepAxis};
pub use csvio::{emit_csv, parse_csv, quantize_sig9, ResultRecord, CSV_HEADER};
pub use runner::{run_experiment, run_scheme};
