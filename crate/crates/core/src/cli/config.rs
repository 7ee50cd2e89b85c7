//! Run configuration: one JSON document with market, bond, option and
//! numerics sections plus query and curve settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::closed_form::MarketParams;
use crate::credit::{BondSpec, OptionKind, OptionSpec};
use crate::oracles::{GridSpec, McSpec, QuadTolerance, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub r: f64,
    pub q: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondSection {
    pub maturity: f64,
    pub barrier_growth: f64,
    pub barrier_level: f64,
    pub recovery: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Put,
    Call,
}

impl From<KindName> for OptionKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Put => OptionKind::Put,
            KindName::Call => OptionKind::Call,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSection {
    pub expiry: f64,
    pub redemption: f64,
    #[serde(default = "default_kind")]
    pub kind: KindName,
}

fn default_kind() -> KindName {
    KindName::Put
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    CrankNicolson,
    ImplicitEuler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub n_space: usize,
    pub n_time: usize,
    pub x_max_mult: f64,
    pub scheme: SchemeName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_paths: usize,
    pub n_steps: usize,
    pub bridge_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub seed: u64,
    pub boundary_tol: f64,
    pub sweep_draws: usize,
    pub pde: PdeSection,
    pub mc: McSection,
    pub quadrature: QuadratureSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySection {
    pub v: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesSection {
    pub samples: usize,
    /// Firm values of the time-plot series (figures 1, 3, 5).
    pub series_v: Vec<f64>,
    /// Upper end of the firm-value axis (figures 2, 4).
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketSection,
    pub bond: BondSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option: Option<OptionSection>,
    pub numerics: NumericsSection,
    pub query: QuerySection,
    pub curves: CurvesSection,
}

impl Default for RunConfig {
    /// `r = 0.04, q = 0, σ = 0.5; b = 100, a = 0; R = 0.7, T = 2, T1 = 1,
    /// E = 0.9`.
    fn default() -> Self {
        Self {
            market: MarketSection {
                r: 0.04,
                q: 0.0,
                sigma: 0.5,
            },
            bond: BondSection {
                maturity: 2.0,
                barrier_growth: 0.0,
                barrier_level: 100.0,
                recovery: 0.7,
            },
            option: Some(OptionSection {
                expiry: 1.0,
                redemption: 0.9,
                kind: KindName::Put,
            }),
            numerics: NumericsSection {
                seed: 20_240_601,
                boundary_tol: 1e-8,
                sweep_draws: 200,
                pde: PdeSection {
                    n_space: 801,
                    n_time: 800,
                    x_max_mult: 10.0,
                    scheme: SchemeName::CrankNicolson,
                },
                mc: McSection {
                    n_paths: 100_000,
                    n_steps: 100,
                    bridge_correction: true,
                },
                quadrature: QuadratureSection {
                    abs_tol: 1e-10,
                    rel_tol: 1e-12,
                    max_intervals: 4000,
                },
            },
            query: QuerySection {
                v: vec![139.0, 199.0, 300.0],
                t: vec![0.0, 0.5],
            },
            curves: CurvesSection {
                samples: 201,
                series_v: vec![139.0, 199.0, 300.0],
                v_max: 800.0,
            },
        }
    }
}

/// Library objects built from a checked [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validated {
    pub market: MarketParams,
    pub bond: BondSpec,
    pub option: Option<OptionSpec>,
}

impl Validated {
    pub fn require_option(&self) -> Result<OptionSpec, CliError> {
        self.option.ok_or_else(|| {
            CliError::Invalid("this command needs an `option` section in the config".into())
        })
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Re-checks every component invariant, including the admissible
    /// redemption bracket when an option is present.
    pub fn validate(&self) -> Result<Validated, CliError> {
        let m = &self.market;
        let market = MarketParams::new(m.r, m.q, m.sigma)?;
        let b = &self.bond;
        let bond = BondSpec::new(b.maturity, b.barrier_growth, b.barrier_level, b.recovery)?;
        let option = match &self.option {
            Some(o) => {
                let spec = OptionSpec::new(o.expiry, o.redemption, o.kind.into())?;
                spec.validate_against(&bond, &market)?;
                Some(spec)
            }
            None => None,
        };
        if !(self.numerics.boundary_tol > 0.0) {
            return Err(CliError::Invalid(format!(
                "numerics.boundary_tol must be > 0, got {}",
                self.numerics.boundary_tol
            )));
        }
        if self.curves.samples < 2 {
            return Err(CliError::Invalid(format!(
                "curves.samples must be >= 2, got {}",
                self.curves.samples
            )));
        }
        if self
            .query
            .v
            .iter()
            .chain(&self.query.t)
            .any(|x| !x.is_finite())
        {
            return Err(CliError::Invalid("query values must be finite".into()));
        }
        Ok(Validated {
            market,
            bond,
            option,
        })
    }

    /// PDE grid; fails with an input error if the section violates the
    /// grid invariants.
    pub fn grid(&self) -> crate::error::Result<GridSpec> {
        let p = &self.numerics.pde;
        let scheme = match p.scheme {
            SchemeName::CrankNicolson => Scheme::CrankNicolson,
            SchemeName::ImplicitEuler => Scheme::ImplicitEuler,
        };
        GridSpec::new(p.n_space, p.n_time, p.x_max_mult, scheme)
    }

    pub fn mc(&self) -> crate::error::Result<McSpec> {
        let m = &self.numerics.mc;
        Ok(McSpec::new(m.n_paths, m.n_steps, self.numerics.seed)?
            .with_bridge_correction(m.bridge_correction))
    }

    pub fn quad_tolerance(&self) -> QuadTolerance {
        let q = &self.numerics.quadrature;
        QuadTolerance {
            abs: q.abs_tol,
            rel: q.rel_tol,
            max_intervals: q.max_intervals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn option_section_is_optional() {
        let c = RunConfig {
            option: None,
            ..RunConfig::default()
        };
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(back.validate().unwrap().require_option().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = RunConfig::default()
            .to_json()
            .replace("\"sigma\"", "\"vol\"");
        assert!(matches!(
            RunConfig::from_json(&text),
            Err(CliError::Invalid(_))
        ));
    }

    #[test]
    fn bracket_violation_names_the_bracket() {
        let mut c = RunConfig::default();
        c.option.as_mut().unwrap().redemption = 0.5;
        match c.validate() {
            Err(CliError::Invalid(msg)) => assert!(msg.contains("outside the open interval")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
