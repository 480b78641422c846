use thiserror::Error;

/// Errors reported by `ckn-core`.
#[derive(Debug, Error)]
pub enum Error {
    /// The parameter tuple fails one or more hypotheses; names of the failed checks.
    #[error("parameters fail validation: {}", .failed.join(", "))]
    InvalidParams { failed: Vec<String> },

    #[error("degenerate parameter tuple: {0}")]
    Degenerate(String),

    #[error("supercritical weight: N - p - mu = {0} must be positive")]
    Supercritical(f64),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("profile has zero weighted norm")]
    ZeroFunction,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid solver options: {0}")]
    Options(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}
