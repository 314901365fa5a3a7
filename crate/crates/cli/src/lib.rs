//! Experiment driver for the squeezed-clock simulator: configuration,
//! the four subcommands and their CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::fmt::Display;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Simulation(#[from] squeezed_clock::Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(field: impl Display, reason: impl Display) -> Self {
        Self::Config(format!("{field}: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Tolerance(_) => 3,
            _ => 1,
        }
    }
}
