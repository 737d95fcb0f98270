use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
    #[error("zero frequency vector: k = (0, 0) gives a constant function")]
    ZeroFrequency,
    #[error("constant mode excluded: {0}")]
    ConstantMode(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("degenerate test function: both sides of the estimate vanish")]
    DegenerateTestFunction,
    #[error("numerically trivial norm {value:e} on {what}")]
    TrivialNorm { what: String, value: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
