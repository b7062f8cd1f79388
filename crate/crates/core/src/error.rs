use thiserror::Error;

/// Errors produced by the simulation kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {requested} exceeds the configured maximum of {limit}")]
    CapacityExceeded { requested: usize, limit: usize },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} index {index} out of range (< {len})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("truncation leakage {population:e} exceeds threshold {threshold:e}")]
    Leakage { population: f64, threshold: f64 },

    #[error("step size too large: {steps} steps requested, at least {required} needed")]
    StepSize { steps: usize, required: usize },

    #[error("unknown species `{name}`; available: {}", available.join(", "))]
    UnknownSpecies { name: String, available: Vec<String> },

    #[error("species data: {0}")]
    SpeciesData(String),
}

impl Error {
    /// True for failures of the numerics (truncation, step size) rather than
    /// of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Leakage { .. } | Error::StepSize { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
