//! Defaultable zero-coupon bonds, and put and call options on them, under a
//! structural firm-value model with a moving default barrier.
//!
//! * [`special`]: normal and bivariate normal CDFs.
//! * [`closed_form`]: power-binary claims and the barrier image construction.
//! * [`credit`]: bond price, early-redemption boundary, bond options and the
//!   puttable and callable composites.
//! * [`oracles`]: finite-difference, Monte Carlo and quadrature
//!   cross-checks.
//! * [`cli`]: configuration and commands behind the `credit-pricer`
//!   executable.
//!
//! ```
//! use credit_pricer::closed_form::MarketParams;
//! use credit_pricer::credit::{BondOption, BondSpec, OptionKind, OptionSpec};
//!
//! let market = MarketParams::new(0.04, 0.0, 0.5)?;
//! let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7)?;
//! let put = BondOption::new(bond, OptionSpec::new(1.0, 0.9, OptionKind::Put)?, market)?;
//! assert!((put.boundary() - 199.109).abs() < 0.01);
//! assert!(put.price(199.0, 0.0)? > 0.0);
//! # Ok::<(), credit_pricer::error::PricingError>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod credit;
pub mod error;
pub mod oracles;
pub mod special;
