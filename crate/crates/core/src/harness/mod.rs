//! Config-driven experiments, CSV persistence and the command line.

pub mod cli;
pub mod config;
pub mod runner;
pub mod summary;

pub use cli::{cli_main, run_cli, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
pub use config::{default_m_grid, ConstraintSpec, ExperimentConfig, Radius};
pub use runner::{
    records_to_csv, run_experiment, run_records, run_trial, write_csv, RunOptions, TrialOutcome, TrialRecord,
    CSV_HEADER,
};
pub use summary::{render, summarize, summarize_reader, GroupSummary, RateRow, SummaryOptions};
