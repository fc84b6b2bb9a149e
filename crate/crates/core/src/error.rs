use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("duplicate subsystem name `{0}`")]
    DuplicateSubsystem(String),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("invalid subsystem `{name}`: dimension {dim} (must be >= 2)")]
    InvalidDimension { name: String, dim: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("operator is not {property} (deviation {deviation:.3e})")]
    OperatorProperty {
        property: &'static str,
        deviation: f64,
    },

    #[error("impossible postselection (probability {probability:.3e})")]
    ImpossiblePostselection { probability: f64 },

    #[error("weak value undefined: pre/post overlap {overlap:.3e} vanishes")]
    UndefinedWeakValue { overlap: f64 },

    #[error("pointer `{pointer}` shift of {sites} sites exceeds the grid margin of {margin}")]
    Wraparound {
        pointer: String,
        sites: i64,
        margin: i64,
    },

    #[error("observable spectrum is not integer-valued (eigenvalue {0})")]
    NonIntegerSpectrum(f64),

    #[error("invalid pointer: {0}")]
    InvalidPointer(String),

    #[error("invalid strengths: {0}")]
    InvalidStrengths(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("physics invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
