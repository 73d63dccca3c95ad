use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("qubit list must not be empty")]
    EmptyQubitList,

    #[error("qubit sets overlap on qubit {0}")]
    OverlappingSets(usize),

    #[error("channel is not trace preserving: max |sum K^dag K - I| = {0:.3e}")]
    NotTracePreserving(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} is limited to {max} qubits, got {found}")]
    SizeGuard {
        what: &'static str,
        max: usize,
        found: usize,
    },

    #[error("routing failed: {0}")]
    Routing(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("tomography: {0}")]
    Tomography(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
