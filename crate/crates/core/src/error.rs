use thiserror::Error;

/// Errors raised when an operation's preconditions do not hold.
///
/// Outcomes that are legitimate answers (a matrix not being completely
/// positive, a factorization being unavailable, ...) are reported through
/// verdict types instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid matrix input: {0}")]
    InvalidInput(String),

    #[error("invalid tolerance `{name}` = {value:e}: must lie in (0, 1)")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("order {p} exceeds the exact copositivity limit {limit}; use the grid oracle")]
    OrderTooLarge { p: usize, limit: usize },

    #[error("matrix is not copositive (tᵀXt = {value:e} at witness {witness:?})")]
    NotCopositive { value: f64, witness: Vec<f64> },

    #[error("vector is not a zero of the matrix (tᵀXt = {value:e})")]
    NotAZero { value: f64 },

    #[error("generator {index} is invalid: {reason}")]
    InvalidGenerator { index: usize, reason: String },

    #[error("pair is not complementary (X • U = {inner:e})")]
    NotComplementary { inner: f64 },

    #[error("matrix is not representable over the zero set (residual {residual:e})")]
    NotRepresentable { residual: f64 },

    #[error("block conditions a)-c) failed verification: {0}")]
    PartitionVerification(String),

    #[error("matrix is not positive semidefinite (λ_min = {lambda_min:e})")]
    NotPsd { lambda_min: f64 },

    #[error("defining equations violated on input (residual {residual:e})")]
    DefiningEquationsViolated { residual: f64 },

    #[error("perturbation {distance:e} exceeds trust radius {radius:e}")]
    OutsideTrustRadius { distance: f64, radius: f64 },

    #[error("empty basis")]
    EmptyBasis,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
