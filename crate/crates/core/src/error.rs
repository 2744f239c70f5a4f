use thiserror::Error;

/// Errors produced by circuit construction, simulation and protocol code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed component: {0}")]
    MalformedComponent(String),

    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{what} requires at most {cap} qubits, got {got}")]
    SizeCap {
        what: &'static str,
        cap: usize,
        got: usize,
    },

    #[error("bit-string parse error at bit offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("insufficient ancillae: need {needed}, got {got}")]
    Resource { needed: usize, got: usize },

    #[error("invalid period {period} for a={a}, n={n}")]
    InvalidPeriod { period: u64, a: u64, n: u64 },

    #[error("circuits act on different qubit counts ({0} vs {1})")]
    MismatchedQubits(usize, usize),

    #[error("first stage contains a non-Clifford component")]
    NonCliffordFirstStage,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
