//! Batch front end: experiment configs, pipeline stages and reports.

pub mod config;
pub mod pipeline;
pub mod report;

use serde_json::json;

/// Exit status for bad input.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for numerical failure.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] wandering_core::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Core(_) => EXIT_NUMERIC,
        }
    }

    /// One-line JSON diagnostic for the error stream.
    pub fn diagnostic(&self) -> String {
        let (code, index) = match self {
            CliError::Config(_) => ("config", None),
            CliError::Io(_) => ("io", None),
            CliError::Core(e) => (e.code(), e.index()),
        };
        json!({
            "error": code,
            "message": self.to_string(),
            "index": index,
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}
