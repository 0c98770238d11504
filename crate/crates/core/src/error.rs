use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {requested} qubits requested, limit is {max}")]
    Capacity { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid qubit index {index} (valid: 1..={n_qubits})")]
    InvalidQubit { index: usize, n_qubits: usize },

    #[error("operator is not Hermitian: max |H - H^dagger| = {max_deviation:e}")]
    NotHermitian { max_deviation: f64 },

    #[error("state is not normalized: norm^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("eigensolver did not converge for {dim}x{dim} matrix ({report})")]
    EigenSolver { dim: usize, report: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent probabilities: {quantity} = {value} lies outside [-1, 1]")]
    InconsistentProbabilities { quantity: &'static str, value: f64 },

    #[error("squared concurrence {0} outside [0, 1] beyond round-off slack")]
    ConcurrenceOutOfRange(f64),
}

impl Error {
    /// Usage errors are caller mistakes; everything else is a numerical
    /// failure of otherwise valid input.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Capacity { .. }
                | Error::DimensionMismatch { .. }
                | Error::NotPowerOfTwo(_)
                | Error::InvalidQubit { .. }
                | Error::InvalidArgument(_)
                | Error::NotHermitian { .. }
                | Error::NotNormalized { .. }
        )
    }
}
