use thiserror::Error;

/// Errors produced by the muHS laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MuhsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected} samples, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("momentum m = Au is not positive (min {min:.3e}, max {max:.3e})")]
    NonPositiveMomentum { min: f64, max: f64 },

    #[error("antiderivative is not periodic: integrand mean {mean:.3e} exceeds {tol:.1e}")]
    NonPeriodicAntiderivative { mean: f64, tol: f64 },

    #[error("elliptic integral outside its domain: {0}")]
    DomainError(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("mean of the unit-mu wave is {mean:.6e}; no positive mu satisfies the constraint")]
    NonPositiveMean { mean: f64 },

    #[error("period map does not cross 1 on M in [{lo:.6e}, {hi:.6e}] ({probes} probes)")]
    NoBracket { lo: f64, hi: f64, probes: usize },

    #[error("degenerate plane: Gram determinant {det:.3e}")]
    DegeneratePlane { det: f64 },

    #[error("parse error at offset {offset}: expected {expected}")]
    ParseError { offset: usize, expected: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("flow map lost the diffeomorphism property at t = {t:.6e}")]
    DiffeomorphismLost { t: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, MuhsError>;
