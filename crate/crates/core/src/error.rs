use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state dimension {0}: must be a power of two")]
    InvalidDimension(usize),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("non-finite amplitude")]
    NonFinite,

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("qubit index {index} out of range for a {qubits}-qubit state")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("impossible outcome {outcome} on qubit {qubit} (probability {probability:e})")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined letter state: the failure branch vanishes at beta = 0")]
    UndefinedLetterState,

    #[error("usage error: {0}")]
    Usage(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("empty run: trials must be positive")]
    EmptyRun,

    #[error("parse error: {0}")]
    Parse(String),
}
