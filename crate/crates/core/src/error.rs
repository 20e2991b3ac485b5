// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock truncation must keep at least levels 0 and 1 (got n_max = {0})")]
    TruncationTooSmall(usize),
    #[error("Fock index {index} exceeds truncation n_max = {n_max}")]
    FockIndexOutOfRange { index: usize, n_max: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("operator has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("state vector norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("rotation axis has norm {0}, expected 1")]
    NonUnitAxis(f64),
    #[error("negative {name}: {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-positive integration step {0}")]
    NonPositiveStep(f64),
    #[error("displacement |alpha| = {alpha_abs} leaves tail weight {tail:e} above n_max = {n_max}")]
    TruncationTail { alpha_abs: f64, tail: f64, n_max: usize },
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("design matrix has rank {rank} < {required}; {unidentified} directions are unidentifiable")]
    RankDeficient { rank: usize, required: usize, unidentified: usize },
    #[error("record {index} does not match the design-matrix setting")]
    SettingMismatch { index: usize },
    #[error("bootstrap needs finite-shot records")]
    ExactRecords,
    #[error("bootstrap needs at least 2 resamples (got {0})")]
    TooFewResamples(usize),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
