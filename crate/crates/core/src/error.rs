use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("{func}: convergence failure ({msg})")]
    Convergence { func: &'static str, msg: String },

    #[error("{func}: accuracy loss, best estimate {value:e} with error {error:e}")]
    AccuracyLoss { func: &'static str, value: f64, error: f64 },

    #[error("{func}: result overflows f64")]
    Overflow { func: &'static str },

    #[error("{0} is not supported for this subordinator family")]
    Unsupported(&'static str),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("need at least {needed} points inside the fit window, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("fit requires strictly positive values; found {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },

    #[error("periodic box too small: wrap-around mass estimate {estimate:e} exceeds {tolerance:e}")]
    BoxTooSmall { estimate: f64, tolerance: f64 },

    #[error("could not bracket the level crossing after {0} doublings")]
    BracketFailure(usize),

    #[error("clamped negative mass {0:e} exceeds tolerance")]
    ClampedMass(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { func, msg: msg.into() }
}
