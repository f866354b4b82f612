use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("point is only known up to its square: {0}")]
    ApproximatePoint(String),
    #[error("separation is undefined for identical points")]
    UndefinedSeparation,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("construction failure: {0}")]
    Construction(String),
    #[error("stencil leaves the disc at {0}")]
    Stencil(String),
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
