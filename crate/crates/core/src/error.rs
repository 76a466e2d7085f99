use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("off-diagonal coefficient a({index}) = {value} is not strictly negative")]
    NonNegativeOffDiagonal { index: i64, value: f64 },

    #[error("coefficient arrays disagree in length: a has {a}, b has {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("block shape error: {0}")]
    BlockShape(String),

    #[error("B({index}) is not Hermitian (deviation {deviation:e})")]
    NotHermitian { index: i64, deviation: f64 },

    #[error("A({index}) is singular or badly conditioned (condition estimate {condition:e})")]
    SingularOffDiagonal { index: i64, condition: f64 },

    #[error("eigenvalues failed to stabilize (truncation {truncation}, gap {gap:e})")]
    NoConvergence { truncation: usize, gap: f64 },

    #[error("no eigenvalue outside the essential spectrum on the requested side")]
    NoEigenvalue,

    #[error("ground state changes sign at site {index} (value {value:e})")]
    PositivityViolation { index: i64, value: f64 },

    #[error("identity `{identity}` violated: residual {residual:e} against scale {scale:e}")]
    IdentityViolation {
        identity: &'static str,
        residual: f64,
        scale: f64,
    },

    #[error("elimination chain stalled at step {step}: {detail}")]
    ChainStalled { step: usize, detail: String },

    #[error("matrix F({site}) is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { site: i64, min_eigenvalue: f64 },

    #[error("matrix solution overflowed at site {site}")]
    RecursionOverflow { site: i64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("unsupported exponent gamma = {0}")]
    UnsupportedGamma(f64),

    #[error("discretized off-diagonal a({site}) = {value} lost its sign")]
    OffDiagonalSignLoss { site: i64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
