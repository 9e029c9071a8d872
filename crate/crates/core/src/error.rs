use thiserror::Error;

/// Crate-wide error type; variants mirror the failure classes surfaced to the
/// CLI exit-code contract (config/input, domain preconditions, numerics).
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent dimensions or malformed configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite or otherwise invalid input data.
    #[error("input error: {0}")]
    Input(String),

    /// A numerical procedure failed (non-convergence, singular system).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An operation's precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A stability hypothesis (negative drift / negative nu) fails.
    #[error("stability hypothesis violated: {0}")]
    Stability(String),

    /// The simulated state left the finite range.
    #[error("state blow-up at step {step} (path {path:?})")]
    BlowUp { step: usize, path: Option<u64> },

    /// Regression fit had too little usable data.
    #[error("fit error: {0}")]
    Fit(String),

    /// Quadrature domain fails the boundary-decay check.
    #[error("domain too small: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
