use thiserror::Error;

/// Errors raised by the rate, state and oracle computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate herald: success probability {p_ps:e} is not positive")]
    DegenerateHerald { p_ps: f64 },

    #[error("Fock truncation too small: tail mass {tail:e} exceeds {tolerance:e}")]
    Truncation { tail: f64, tolerance: f64 },

    #[error("density not normalized: integral {integral} differs from 1 by more than {tolerance:e}")]
    NotNormalized { integral: f64, tolerance: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
