//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("variable count {n} exceeds the hard limit of {max}")]
    VariableLimit { n: usize, max: usize },

    #[error("sign vector entry at position {position} is {value}, must be -1 or +1")]
    InvalidSign { position: usize, value: i8 },

    #[error("norm exponent p = {p} is outside [1, inf]")]
    InvalidExponent { p: f64 },

    #[error("exact enumeration over 2^{needed} points exceeds the cap 2^{cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("duplicate exponent vector {alpha:?}")]
    DuplicateTerm { alpha: Vec<u32> },

    #[error("polynomial is not a multilinear cubic form: offending monomial {monomial}")]
    NotCubic { monomial: String },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("matrix is not symmetric at entry ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("all slice norms are zero; the normalized decomposition is undefined")]
    ZeroDelta,

    #[error("alphabet mismatch: tuple covers {tuple_vars} variables, polynomial has {poly_vars}")]
    AlphabetMismatch { tuple_vars: usize, poly_vars: usize },

    #[error("Z_n modulus mismatch: expected {expected}, got {actual}")]
    ModulusMismatch { expected: usize, actual: usize },

    #[error("n = {n} is not coprime to 6")]
    NotCoprime { n: usize },

    #[error("sequence space of size {size} exceeds the exhaustive-verification cap {cap}")]
    SequenceSpaceTooLarge { size: u128, cap: u64 },

    #[error("witness failed membership verification: max violation {max_violation:.3e}")]
    MembershipFailed { max_violation: f64 },

    #[error("objective {objective:.12} does not exceed epsilon {epsilon:.12}")]
    ObjectiveNotAboveEpsilon { objective: f64, epsilon: f64 },

    #[error("malformed certificate: {0}")]
    BadCertificate(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
