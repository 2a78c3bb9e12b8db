use thiserror::Error;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (||U^dag U - I||_F = {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("time grid must start at 0 and increase strictly (offending index {index})")]
    NonMonotoneGrid { index: usize },
    #[error("path hits a pole: sin(theta) = 0 while c_r = {c_r}")]
    PathPole { c_r: f64 },
    #[error("path time {t_path} outside [0, {tau_path}]")]
    PathTimeOutOfRange { t_path: f64, tau_path: f64 },
    #[error("negative drive envelope {0}")]
    NegativeEnvelope(f64),
    #[error("degenerate instantaneous spectrum (gap {gap:.3e})")]
    Degenerate { gap: f64 },
    #[error("level crossing detected near t = {t} (level {level})")]
    LevelCrossing { t: f64, level: usize },
    #[error("samples refer to different times ({a} vs {b})")]
    TimeMismatch { a: f64, b: f64 },
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("pulse count must be at least 1")]
    ZeroPulses,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pulse window {index} (width {width}) overlaps the preceding path segment ({available})")]
    OverlappingPulse { index: usize, width: f64, available: f64 },
    #[error("grid step {step} gives only {samples} samples in a {width} us pulse window (need >= 10)")]
    StepTooCoarse { step: f64, width: f64, samples: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
