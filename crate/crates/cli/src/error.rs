// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use magbell_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("reconstruction did not converge after {iterations} iterations (results written anyway)")]
    NonConvergence { iterations: usize },
    #[error("I/O error on {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("numerical error: {0}")]
    Numerical(CoreError),
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), reason: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// Core errors that can only come from the chosen parameters are reported as
/// configuration errors.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::TruncationTooSmall(_)
            | CoreError::TruncationTail { .. }
            | CoreError::RankDeficient { .. }
            | CoreError::NegativeParameter { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::ZeroShots
            | CoreError::TooFewResamples(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
