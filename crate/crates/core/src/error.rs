use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("no acceptable key after {0} attempts")]
    KeyGeneration(usize),
    #[error("rank-deficient differential system: {0}")]
    RankDeficient(String),
    #[error("signal of length {requested} exceeds the recovered mask length {available}")]
    BeyondCoverage { requested: usize, available: usize },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("unsupported media: {0}")]
    Unsupported(String),
    #[error("oracle failed: {0}")]
    Oracle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<LinalgError> for Error {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => Error::Singular,
            LinalgError::Shape(s) => Error::Dimension(s),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
