use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a transformation or formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid distance matrix: {0}")]
    InvalidDistances(String),

    /// Double-centering produced an eigenvalue below the PSD tolerance.
    #[error("distance matrix is not squared Euclidean (most negative eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    NonEuclidean {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("degenerate angle: {0}")]
    DegenerateAngle(String),

    #[error("undefined strain: transformed inertia of the weights is zero")]
    UndefinedStrain,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid contingency table: {0}")]
    InvalidTable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
