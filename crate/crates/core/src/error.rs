use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("noise parameter {0} is outside [0, 1]")]
    NoiseParameter(f64),

    #[error("copy count {n} is outside the supported range {min}..={max}")]
    CopyCount { n: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenvalue {0:e} too close to zero for a sign observable")]
    DegenerateSign(f64),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("state has {count} nonzero amplitudes, at most {max} supported")]
    TooManyNonzeros { count: usize, max: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
