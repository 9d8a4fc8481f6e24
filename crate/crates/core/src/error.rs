use thiserror::Error;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid matrix shape: {entries} entries cannot fill a {dim}x{dim} matrix")]
    BadShape { dim: usize, entries: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("non-finite input: {name}")]
    NonFiniteScalar { name: &'static str },

    #[error("matrix is not Hermitian (residual {residual:.3e} exceeds tolerance {tolerance:.3e})")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error(
        "eigensolver failed to converge after {sweeps} sweeps (off-diagonal {off_diagonal:.3e})"
    )]
    ConvergenceFailure { sweeps: usize, off_diagonal: f64 },

    #[error(
        "observables do not commute (residual {residual:.3e} exceeds tolerance {tolerance:.3e})"
    )]
    NotCommuting { residual: f64, tolerance: f64 },

    #[error(
        "observable is not measurable in this context (off-diagonal residual {residual:.3e} \
         exceeds tolerance {tolerance:.3e})"
    )]
    NonCommuting { residual: f64, tolerance: f64 },

    #[error("sampling weights sum to {total} instead of 1")]
    DegenerateWeights { total: f64 },

    #[error("evaluated value {value} matches no analyzer branch")]
    NoMatchingBranch { value: f64 },

    #[error("branch {branch} has vanishing probability {weight:.3e}")]
    ZeroProbabilityBranch { branch: usize, weight: f64 },

    #[error("vector norm {norm} differs from 1")]
    NotUnit { norm: f64 },

    #[error("invalid strategy distribution: {reason}")]
    BadDistribution { reason: String },

    #[error("density matrix trace is {trace} instead of 1")]
    TraceNotOne { trace: f64 },

    #[error("density matrix has negative eigenvalue {eigenvalue:.3e}")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("sample count must be at least 1")]
    EmptySample,

    #[error(
        "equal-axis outcomes failed to anti-correlate: expected {expected}, measured {measured}"
    )]
    AntiCorrelationViolated { expected: f64, measured: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
