use thiserror::Error;

/// Errors produced by system construction, bound evaluation, propagation
/// and optimization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spectrum level {level} is degenerate (E = {energy}), cannot divide by it")]
    DegenerateSpectrum { level: i64, energy: f64 },

    #[error("level energy E_N = {energy} must be positive")]
    DegenerateLevel { energy: f64 },

    #[error("operation requires a tridiagonal coupling")]
    NonTridiagonal,

    #[error("system config rejected: {0}")]
    Schema(String),

    #[error("certificate violated at level {level}: ratio {ratio} exceeds {limit}")]
    CertificateViolation { level: i64, ratio: f64, limit: f64 },

    #[error("value exceeds representable range (log10 = {log10})")]
    Overflow { log10: f64 },

    #[error("tabulated spectrum has {available} levels, {needed} required")]
    SpectrumExhausted { needed: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("control field contains a non-finite sample")]
    NonFiniteField,

    #[error("eigensolver did not converge after {iterations} sweeps")]
    EigenFailure { iterations: usize },

    #[error("objective decreased by {drop} at iteration {iteration}; monotonic update is broken")]
    NonConvergence { iteration: usize, drop: f64 },

    #[error("field file: {0}")]
    FieldFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
