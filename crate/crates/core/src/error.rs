use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice basis is singular")]
    SingularBasis,

    #[error("basis must be square with {expected} rows, got {rows}x{cols}")]
    BadShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("real dimension {0} is odd; no complex structure")]
    OddDimension(usize),

    #[error("short-vector enumeration exceeded the cap of {cap} candidates")]
    EnumerationOverflow { cap: usize },

    #[error("index k = {k} is beyond the enumerated levels (cover k <= {covered})")]
    IndexBeyondEnumeration { k: usize, covered: usize },

    #[error("operands mix exact and floating-point modes")]
    ModeMismatch,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("form degree {0} is not supported")]
    UnsupportedDegree(usize),

    #[error("function is not an eigenfunction for the given eigenvalue")]
    NotAnEigenfunction,

    #[error("input is not real-valued")]
    NonRealInput,

    #[error("floating-point verdict is too close to the feasibility boundary (phase-1 value {phase_one_value:e})")]
    NumericallyAmbiguous { phase_one_value: f64 },

    #[error("certificate rejected: {0}")]
    CertificateRejected(String),

    #[error("system too large for brute force ({cols} columns, {rows} independent rows)")]
    TooLarge { cols: usize, rows: usize },

    #[error("omega + t*alpha is not positive at t = {t}")]
    NotPositive { t: f64 },

    #[error("deformation form does not have zero trace against omega")]
    TraceNotZero,

    #[error("spectral deformation needs a constant (1,1)-form")]
    NonConstantDeformation,

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },

    #[error("lattice file mixes exact and floating-point entries")]
    MixedMode,

    #[error("radical too large for exact square root")]
    RadicalTooLarge,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
