use thiserror::Error;

/// Errors raised by the analytic pipeline, the oracles and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The Mandel Q-factor is 0/0 for a vacuum signal (λ = 0).
    #[error("Mandel Q is undefined for a vacuum signal (lambda = 0)")]
    UndefinedQ,

    #[error("the analytic path only supports threshold windows |x| > x0; use the oracles for interval unions")]
    UnsupportedWindow,

    #[error(
        "lambda = {lambda} is too close to 1 for a finite-difference stencil of half-width {reach}"
    )]
    StencilOutOfRange { lambda: f64, reach: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(
    cond: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
