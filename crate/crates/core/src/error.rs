use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the configured cap of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("operator is not a projector (defect {defect:.3e})")]
    NotProjector { defect: f64 },

    #[error("invalid density operator: {0}")]
    NotDensity(String),

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("measurement outcome has vanishing probability ({probability:.3e})")]
    NullOutcome { probability: f64 },

    #[error("probability {0} lies outside [0, 1] beyond round-off")]
    ProbabilityOutOfRange(f64),

    #[error("invalid measurement family: {0}")]
    InvalidFamily(String),

    #[error("outcome length {found} does not match schedule length {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("time {t} lies outside the domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("history enumeration over n = {n} exceeds the limit {max}")]
    TooManyHistories { n: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
