use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the resonance pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("not a Schottky group: disks {first} and {second} overlap by {overlap:.3e}")]
    NotSchottky {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("element is not hyperbolic (|trace| = {trace_abs})")]
    NonHyperbolic { trace_abs: f64 },

    #[error("generator index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("word set too large: {count} words exceeds cap {cap}")]
    TooLarge { count: u128, cap: u128 },

    #[error("ambiguous length classes at n = {n}: trial {trial} disagrees with trial 0; use a smaller tolerance or more trials")]
    AmbiguousClasses { n: usize, trial: usize },

    #[error("corrupt group: {0}")]
    CorruptGroup(String),

    #[error("Re s = {re} lies outside the convergence region of the Euler product (Re s > 1)")]
    OutsideConvergence { re: f64 },

    #[error("zero of Z on the sampling path near {location}")]
    OnPathZero { location: Complex64 },

    #[error("zero on the rectangle boundary near {location} after {retries} grid perturbations")]
    BoundaryZero { location: Complex64, retries: usize },

    #[error("Newton iteration from {seed} did not converge: {reason}")]
    NoConvergence { seed: Complex64, reason: String },

    #[error("no sign change of Z on (0, 1): surface elementary or outside the reliable range")]
    NoSignChange,

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("Re s = {re} is below the evaluation floor {floor}")]
    BelowFloor { re: f64, floor: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
