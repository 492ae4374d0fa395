use thiserror::Error;

/// Errors raised by the matrix substrate, state construction and the
/// correlation formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported matrix dimension {0} (expected 2, 4, 8 or 16)")]
    InvalidDimension(usize),
    #[error("kronecker product of {left}x{left} and {right}x{right} exceeds 16x16")]
    DimensionOverflow { left: usize, right: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix data has {got} entries, expected {expected}")]
    MalformedData { expected: usize, got: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NonHermitian { residual: f64 },
    #[error("trace {trace} is not 1")]
    NonUnitTrace { trace: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("imaginary residue {imag:e} in a quantity that must be real")]
    NumericIntegrity { imag: f64 },
    #[error("matrix is not a projector (idempotency residual {residual:e})")]
    NotProjector { residual: f64 },
    #[error("observable is not dichotomic (residual of A^2 - I is {residual:e})")]
    NotDichotomic { residual: f64 },
    #[error("invalid probability pair ({0}, {1})")]
    InvalidProbabilities(f64, f64),
    #[error("unknown Bell state '{0}'")]
    UnknownBellState(String),
    #[error("conditioning on an outcome of probability {weight:e}")]
    ZeroProbabilityBranch { weight: f64 },
    #[error("{what}: full trace {full} disagrees with factorized value {factorized}")]
    FactorizationMismatch {
        what: &'static str,
        full: f64,
        factorized: f64,
    },
    #[error("setting index {0} out of range (expected 0 or 1)")]
    InvalidSetting(usize),
    #[error("non-finite angle {0}")]
    NonFiniteAngle(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("worker count must be at least 1")]
    NoWorkers,
}

pub type Result<T> = std::result::Result<T, Error>;
