use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("eigensolver did not converge for matrix {fingerprint}")]
    NoConvergence { fingerprint: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature on [{a}, {b}] did not reach tolerance {tolerance:e}")]
    Quadrature { a: f64, b: f64, tolerance: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid ideal `{0}`")]
    InvalidIdeal(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
