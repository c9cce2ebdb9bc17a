//! Experiment orchestration behind the `nqs` binary.

// `!(x > 0.0)` checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{
    cmd_convert, cmd_ed, cmd_exact_aklt, cmd_sample_stats, cmd_vmc, stats_table_csv, vmc_table_csv, ConvertReport,
    EdReport, ExactReport, ExportCheck, StatsReport, StatsRow,
};
pub use config::{ExperimentConfig, SCHEMA_VERSION};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Core(#[from] nqs_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}
