//! Price tables and the early-redemption boundary report.

use std::fmt::Write as _;

use super::config::{RunConfig, Validated};
use super::CliError;
use crate::credit::{
    bond_price, composite_price, early_redemption_boundary, survival_probability, BondOption,
    OptionKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceTarget {
    Bond,
    Option,
    Puttable,
    Callable,
}

fn echo(config: &RunConfig, v: &Validated, out: &mut String) {
    let m = &v.market;
    let b = &v.bond;
    let _ = writeln!(
        out,
        "# market  r = {}  q = {}  sigma = {}",
        m.r(),
        m.q(),
        m.sigma()
    );
    let _ = writeln!(
        out,
        "# bond    T = {}  a = {}  b = {}  R = {}",
        b.maturity(),
        b.barrier_growth(),
        b.barrier_level(),
        b.recovery()
    );
    if let Some(o) = &config.option {
        let kind = match o.kind {
            super::config::KindName::Put => "put",
            super::config::KindName::Call => "call",
        };
        let _ = writeln!(
            out,
            "# option  T1 = {}  E = {}  kind = {kind}",
            o.expiry, o.redemption
        );
    }
}

fn cell(x: f64) -> String {
    format!("{x:>18.12}")
}

fn header(names: &[&str]) -> String {
    names
        .iter()
        .map(|n| format!("{n:>18}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Table of prices at every `(V, t)` in the query section.
pub fn cmd_price(config: &RunConfig, target: PriceTarget) -> Result<String, CliError> {
    let v = config.validate()?;
    let option = match target {
        PriceTarget::Bond => None,
        PriceTarget::Option => Some(v.require_option()?),
        PriceTarget::Puttable => Some(v.require_option()?.with_kind(OptionKind::Put)),
        PriceTarget::Callable => Some(v.require_option()?.with_kind(OptionKind::Call)),
    };
    let solved = match option {
        Some(o) => Some(BondOption::new(v.bond, o, v.market)?),
        None => None,
    };

    let mut out = String::new();
    echo(config, &v, &mut out);
    if let Some(o) = &solved {
        let _ = writeln!(out, "# early-redemption boundary K = {:.10}", o.boundary());
    }
    let premium = match solved.map(|o| o.option().kind()) {
        Some(OptionKind::Put) => "P",
        Some(OptionKind::Call) => "C",
        None => "",
    };
    let columns: Vec<&str> = match target {
        PriceTarget::Bond => vec!["V", "t", "W", "B"],
        PriceTarget::Option => vec!["V", "t", "B", premium],
        PriceTarget::Puttable => vec!["V", "t", "B", "P", "B+P"],
        PriceTarget::Callable => vec!["V", "t", "B", "C", "B-C"],
    };
    let _ = writeln!(out, "{}", header(&columns));

    for &t in &config.query.t {
        for &x in &config.query.v {
            let b = bond_price(x, t, &v.bond, &v.market)?;
            let mut row = vec![cell(x), cell(t)];
            match (&solved, target) {
                (None, _) => {
                    row.push(cell(survival_probability(x, t, &v.bond, &v.market)?));
                    row.push(cell(b));
                }
                (Some(o), _) => {
                    row.push(cell(b));
                    let expiry = o.option().expiry();
                    let p = if t < expiry {
                        cell(o.price(x, t)?)
                    } else if t == expiry {
                        cell(o.payoff(x)?)
                    } else {
                        format!("{:>18}", "expired")
                    };
                    row.push(p);
                    if target != PriceTarget::Option {
                        row.push(cell(composite_price(x, t, o)?));
                    }
                }
            }
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    Ok(out)
}

/// Boundary `K`, root residual and iteration count, solved at the
/// configured tolerance.
pub fn cmd_boundary(config: &RunConfig) -> Result<String, CliError> {
    let v = config.validate()?;
    let option = v.require_option()?;
    let result =
        early_redemption_boundary(&v.bond, &option, &v.market, config.numerics.boundary_tol)?;
    let mut out = String::new();
    echo(config, &v, &mut out);
    let _ = writeln!(out, "K          = {:.10}", result.k);
    let _ = writeln!(out, "residual   = {:e}", result.residual);
    let _ = writeln!(out, "iterations = {}", result.iterations);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_boundary_report() {
        let text = cmd_boundary(&RunConfig::default()).unwrap();
        let k: f64 = text
            .lines()
            .find(|l| l.starts_with("K "))
            .and_then(|l| l.split('=').nth(1))
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        assert!((k - 199.109).abs() < 0.01);
    }

    #[test]
    fn puttable_table_has_all_columns() {
        let mut c = RunConfig::default();
        c.query.v = vec![199.0];
        c.query.t = vec![0.0];
        let text = cmd_price(&c, PriceTarget::Puttable).unwrap();
        let last = text.lines().last().unwrap();
        let cols: Vec<f64> = last
            .split_whitespace()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(cols.len(), 5);
        assert!((cols[2] + cols[3] - cols[4]).abs() < 1e-11);
    }

    #[test]
    fn below_barrier_is_invalid_input() {
        let mut c = RunConfig::default();
        c.query.v = vec![90.0];
        let err = cmd_price(&c, PriceTarget::Bond).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("firm value below default barrier"));
    }

    #[test]
    fn option_commands_need_an_option() {
        let c = RunConfig {
            option: None,
            ..RunConfig::default()
        };
        assert_eq!(
            cmd_price(&c, PriceTarget::Option).unwrap_err().exit_code(),
            2
        );
        assert_eq!(cmd_boundary(&c).unwrap_err().exit_code(), 2);
        assert!(cmd_price(&c, PriceTarget::Bond).is_ok());
    }
}
