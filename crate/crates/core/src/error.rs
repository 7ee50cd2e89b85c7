use thiserror::Error;

/// Errors raised by the pricing library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    /// An argument lies outside the mathematical domain of the operation
    /// (NaN, non-positive time to maturity, negative ratio, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates a structural invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The firm value sits strictly below the default barrier.
    #[error("firm value below default barrier: V = {value}, V_b(t) = {barrier}")]
    BelowBarrier { value: f64, barrier: f64 },

    /// The early-redemption amount admits no boundary.
    #[error("invalid option: {0}")]
    InvalidOption(String),

    /// An iterative method failed to converge or blew up.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Caller-supplied data (payoffs, grids, paths) is unusable.
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, PricingError>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_nan() {
        return Err(PricingError::Domain(format!("{name} is NaN")));
    }
    if !value.is_finite() {
        return Err(PricingError::Domain(format!(
            "{name} must be finite, got {value}"
        )));
    }
    Ok(())
}

pub(crate) fn ensure_not_nan(name: &str, value: f64) -> Result<()> {
    if value.is_nan() {
        Err(PricingError::Domain(format!("{name} is NaN")))
    } else {
        Ok(())
    }
}
