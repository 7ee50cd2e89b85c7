//! Command layer behind the `credit-pricer` executable: configuration,
//! price tables, the boundary report, figure curves and oracle verification.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 I/O failure.

pub mod commands;
pub mod config;
pub mod curves;
pub mod verify;

use thiserror::Error;

use crate::error::PricingError;

pub use commands::{cmd_boundary, cmd_price, PriceTarget};
pub use config::{RunConfig, Validated};
pub use curves::{build_figure, cmd_curves, Figure, PriceCurve};
pub use verify::{cmd_verify, CheckResult, Suite, VerifyReport};

/// Seed override read by the executable.
pub const SEED_ENV: &str = "CREDIT_PRICER_SEED";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::Numerical(_) => CliError::Failed(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

/// Resolves the seed: flag, then environment, then config.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env {
        Some(text) => text.trim().parse().map_err(|_| {
            CliError::Invalid(format!(
                "{SEED_ENV} must be an unsigned 64-bit integer, got {text:?}"
            ))
        }),
        None => Ok(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), 3).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some("2"), 3).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, 3).unwrap(), 3);
        assert_eq!(resolve_seed(None, Some("x"), 3).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn pricing_errors_map_to_exit_codes() {
        let below = PricingError::BelowBarrier {
            value: 1.0,
            barrier: 2.0,
        };
        assert_eq!(CliError::from(below).exit_code(), 2);
        assert_eq!(
            CliError::from(PricingError::Numerical("x".into())).exit_code(),
            1
        );
    }
}
