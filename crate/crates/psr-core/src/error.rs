//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Errors produced by parsing, validation, simulation, and analysis.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoreError {
    /// Netlist syntax error with 1-based line/column, formatted `line:col: message`.
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },

    /// A field failed validation; names the offending field.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// Simulation configuration rejected (e.g. dt too large for a tank).
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Requested value lies outside the characterized range.
    #[error("out of range: {0}")]
    Range(String),

    /// Closed-form solution requested outside its supported regime.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Integration produced a non-finite state.
    #[error("numerical blowup at t = {time:.6e} s in branch '{branch}'")]
    NumericalBlowup { time: f64, branch: String },

    /// Calibration or characterization data failed to load.
    #[error("calibration error: {0}")]
    Calibration(String),
}

impl CoreError {
    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        CoreError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        CoreError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }
}
