use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("algebra mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("element is not in the span of the generators (residual {residual:.3e})")]
    NotInSpan { residual: f64 },
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("singular metric at {location:?}")]
    SingularMetric { location: [f64; 4] },
    #[error("grid too coarse for the requested stencil: {0}")]
    GridTooCoarse(String),
    #[error("trajectory captured at r = {r:.6e}")]
    Captured { r: f64 },
    #[error("bound orbit required (eccentricity {e})")]
    Unbound { e: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("field point coincides with body {0}")]
    Coincident(usize),
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
