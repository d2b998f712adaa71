use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("sector holds only {found} states below the search ceiling {ceiling}, {required} required")]
    CutoffTooSmall {
        required: usize,
        found: usize,
        ceiling: f64,
    },

    #[error("assembled operator is not symmetric at ({row}, {col})")]
    SymmetryViolation { row: usize, col: usize },

    #[error("basis contains no two-particle pair state")]
    EmptySupport,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the dense ceiling {ceiling}")]
    DimensionTooLarge { dim: usize, ceiling: usize },

    #[error("dimension {dim} is not a power of two")]
    DimensionNotPadded { dim: usize },

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("need at least {required} points, got {found}")]
    InsufficientPoints { required: usize, found: usize },

    #[error("state vector belongs to a different basis")]
    BasisMismatch,

    #[error("eigendecomposition did not converge")]
    NoConvergence,
}
