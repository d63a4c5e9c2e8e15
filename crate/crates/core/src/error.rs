use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants split into two families: validation problems with the caller's
/// input ([`Error::is_numeric`] is false) and numerical failures of an
/// otherwise valid computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("matrix is not positive semidefinite: eigenvalue {min_eig:e} below tolerance (largest {max_eig:e})")]
    NotPsd { min_eig: f64, max_eig: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("capacity exceeded: {requested} amplitudes requested, limit is {limit}")]
    Capacity { requested: u128, limit: u128 },

    #[error("failed to load network: {0}")]
    Load(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::NotPsd { .. } | Error::DegenerateState(_)
        )
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Numeric(e.to_string())
    }
}

impl From<ndarray::ShapeError> for Error {
    fn from(e: ndarray::ShapeError) -> Self {
        Error::Dimension(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
