use thiserror::Error;

/// Errors raised by bodies, oracles, reductions and simulators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shrinking by {0} leaves an empty body")]
    EmptyBody(f64),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("precision budget exceeded: log2(nR/(r*eps)) = {0:.2} > 52")]
    Precision(f64),

    #[error("statevector needs {qubits} qubits, cap is {cap}")]
    Capability { qubits: u32, cap: u32 },

    #[error("inconsistent oracle answers: {0}")]
    InconsistentOracle(String),

    #[error("iteration cap of {0} exceeded")]
    IterationCap(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
