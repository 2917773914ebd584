use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{qubits} qubits exceeds the dense-representation cap of {cap}")]
    Resource { qubits: usize, cap: usize },

    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),

    #[error("diagonal element: use populations (Z-basis measurement) instead of teleportation")]
    DiagonalElement,

    #[error("element ({m}, {n}) is unmeasurable: logical-subspace weight {weight:e} is negligible")]
    Unmeasurable { m: u64, n: u64, weight: f64 },

    #[error("insufficient statistics: {accepted} of {shots} shots accepted")]
    InsufficientStatistics { accepted: u64, shots: u64 },

    #[error("degenerate state: no population above threshold {threshold:e}")]
    DegenerateState { threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
