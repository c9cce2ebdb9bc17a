use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid local state index {0} (must be 0, 1 or 2)")]
    InvalidLocalState(u8),

    #[error("invalid configuration string: {0}")]
    ParseConfig(String),

    #[error("system of {n} sites exceeds the enumeration guard of {max} sites")]
    TooManySites { n: usize, max: usize },

    #[error("sector {sector} is not defined for the {basis} basis")]
    SectorBasisMismatch { sector: String, basis: String },

    #[error("sector {0} contains no configurations")]
    EmptySector(String),

    #[error("basis mismatch: expected {expected}, got {got}")]
    BasisMismatch { expected: String, got: String },

    #[error("hidden activation cache does not match the visible configuration")]
    StaleCache,

    #[error("zero coefficient in product state for site {site}")]
    ZeroCoefficient { site: usize },

    #[error("visible layer of {0} units is not a whole number of unary cells")]
    NotUnary(usize),

    #[error("zero-norm state")]
    ZeroNorm,

    #[error("reference configuration has zero amplitude")]
    ZeroAmplitude,

    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("linear solver did not converge (residual {residual:e})")]
    SolverFailed { residual: f64 },

    #[error("energy gap must be positive, got {0}")]
    NonPositiveGap(f64),

    #[error("energy {energy} lies below the ground-state energy {ground}")]
    BelowGroundState { energy: f64, ground: f64 },

    #[error("no start configuration with non-zero amplitude found after {0} attempts")]
    NoStartConfig(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
