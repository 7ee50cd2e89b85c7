//! Sampled price curves for the five figures, written as CSV with a JSON
//! metadata sidecar.
//!
//! | figure | abscissa | series |
//! |---|---|---|
//! | 1 | `t ∈ [0, T]` | `B` at each `V` in `curves.series_v` |
//! | 2 | `V ∈ [V_b(T1), v_max]` | `B` at `t = T1`, and the line `E` |
//! | 3 | `t ∈ [0, T1]` | `P` at each series `V` (payoff at `T1`) |
//! | 4 | `V` | `P` at `t = 0` and `t = T1/2` |
//! | 5 | `t ∈ [0, T]` | puttable bond at each series `V` |
//!
//! Figure 5 is `B + P` before `T1`, `max(B, E)` at `T1` and `B` afterwards;
//! it drops at `T1` wherever `B(V, T1) < E` because the put right lapses.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::RunConfig;
use super::CliError;
use crate::credit::{bond_price, composite_price, BondOption, OptionKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceCurve {
    pub abscissa_name: String,
    pub ordinate_name: String,
    pub points: Vec<(f64, f64)>,
    pub metadata: serde_json::Value,
}

impl PriceCurve {
    fn check(&self) -> Result<(), CliError> {
        if self.points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(CliError::Failed(format!(
                "{}: abscissa is not strictly increasing",
                self.ordinate_name
            )));
        }
        if let Some(p) = self.points.iter().find(|p| !p.1.is_finite()) {
            return Err(CliError::Failed(format!(
                "{}: non-finite ordinate at {} = {}",
                self.ordinate_name, self.abscissa_name, p.0
            )));
        }
        Ok(())
    }
}

/// All series of one figure, sampled on a shared abscissa.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure {
    pub number: u8,
    pub title: String,
    pub curves: Vec<PriceCurve>,
    pub metadata: serde_json::Value,
}

impl Figure {
    pub fn abscissa(&self) -> Vec<f64> {
        self.curves[0].points.iter().map(|p| p.0).collect()
    }

    pub fn series(&self, ordinate_name: &str) -> Option<&PriceCurve> {
        self.curves
            .iter()
            .find(|c| c.ordinate_name == ordinate_name)
    }

    /// Header row plus one row per sample, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut names = vec![self.curves[0].abscissa_name.clone()];
        names.extend(self.curves.iter().map(|c| c.ordinate_name.clone()));
        let _ = writeln!(out, "{}", names.join(","));
        for (j, x) in self.abscissa().iter().enumerate() {
            let mut row = vec![format!("{x:.16e}")];
            row.extend(
                self.curves
                    .iter()
                    .map(|c| format!("{:.16e}", c.points[j].1)),
            );
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            if j == n - 1 {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn sample<F>(
    xs: &[f64],
    abscissa: &str,
    ordinate: String,
    metadata: serde_json::Value,
    f: F,
) -> Result<PriceCurve, CliError>
where
    F: Fn(f64) -> crate::error::Result<f64>,
{
    let points = xs
        .iter()
        .map(|&x| f(x).map(|y| (x, y)))
        .collect::<crate::error::Result<Vec<_>>>()?;
    let curve = PriceCurve {
        abscissa_name: abscissa.into(),
        ordinate_name: ordinate,
        points,
        metadata,
    };
    curve.check()?;
    Ok(curve)
}

/// Samples figure `number` (1 to 5) from `config`.
pub fn build_figure(config: &RunConfig, number: u8) -> Result<Figure, CliError> {
    let v = config.validate()?;
    let (bond, market) = (v.bond, v.market);
    let n = config.curves.samples;
    let maturity = bond.maturity();
    let put = if (2..=5).contains(&number) {
        let option = v.require_option()?.with_kind(OptionKind::Put);
        Some(BondOption::new(bond, option, market)?)
    } else {
        None
    };
    let series_v = &config.curves.series_v;
    if number != 2 && number != 4 && series_v.is_empty() {
        return Err(CliError::Invalid(
            "curves.series_v must not be empty".into(),
        ));
    }

    let (title, curves) = match number {
        1 => {
            let ts = linspace(0.0, maturity, n);
            let curves = series_v
                .iter()
                .map(|&x| {
                    sample(&ts, "t", format!("B(V={x})"), json!({ "V": x }), |t| {
                        bond_price(x, t, &bond, &market)
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ("bond price against time", curves)
        }
        2 => {
            let o = put.as_ref().expect("option solved");
            let expiry = o.option().expiry();
            let e = o.option().redemption();
            let vs = linspace(bond.barrier_at(expiry), config.curves.v_max, n);
            let meta = json!({ "t": expiry, "K": o.boundary() });
            let b = sample(&vs, "V", "B".into(), meta, |x| {
                bond_price(x, expiry, &bond, &market)
            })?;
            let line = sample(&vs, "V", "E".into(), json!({ "E": e }), |_| Ok(e))?;
            (
                "bond price against firm value at option expiry",
                vec![b, line],
            )
        }
        3 => {
            let o = put.as_ref().expect("option solved");
            let expiry = o.option().expiry();
            let ts = linspace(0.0, expiry, n);
            let curves = series_v
                .iter()
                .map(|&x| {
                    sample(&ts, "t", format!("P(V={x})"), json!({ "V": x }), |t| {
                        if t < expiry {
                            o.price(x, t)
                        } else {
                            o.payoff(x)
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ("put price against time", curves)
        }
        4 => {
            let o = put.as_ref().expect("option solved");
            let times = [0.0, 0.5 * o.option().expiry()];
            let lo = times
                .iter()
                .map(|&t| bond.barrier_at(t))
                .fold(f64::NEG_INFINITY, f64::max);
            let vs = linspace(lo, config.curves.v_max, n);
            let curves = times
                .iter()
                .map(|&t| {
                    sample(&vs, "V", format!("P(t={t})"), json!({ "t": t }), |x| {
                        if x <= bond.barrier_at(t) {
                            Ok(0.0)
                        } else {
                            o.price(x, t)
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ("put price against firm value", curves)
        }
        5 => {
            let o = put.as_ref().expect("option solved");
            let ts = linspace(0.0, maturity, n);
            let curves = series_v
                .iter()
                .map(|&x| {
                    sample(&ts, "t", format!("PB(V={x})"), json!({ "V": x }), |t| {
                        composite_price(x, t, o)
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ("puttable bond price against time", curves)
        }
        _ => {
            return Err(CliError::Invalid(format!(
                "figure must be 1 to 5, got {number}"
            )))
        }
    };

    let metadata = json!({
        "figure": number,
        "title": title,
        "samples": n,
        "early_redemption_boundary": put.as_ref().map(|o| o.boundary()),
        "config": config,
    });
    Ok(Figure {
        number,
        title: title.into(),
        curves,
        metadata,
    })
}

/// Writes `figure<N>.csv` and `figure<N>.json` into `out_dir` for each
/// requested figure; returns the CSV paths.
pub fn cmd_curves(
    config: &RunConfig,
    figures: &[u8],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let built = figures
        .iter()
        .map(|&f| build_figure(config, f))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    for fig in built {
        let csv = out_dir.join(format!("figure{}.csv", fig.number));
        let meta = out_dir.join(format!("figure{}.json", fig.number));
        std::fs::write(&csv, fig.to_csv())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv.display())))?;
        let text = serde_json::to_string_pretty(&fig.metadata).expect("metadata serializes");
        std::fs::write(&meta, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", meta.display())))?;
        written.push(csv);
    }
    Ok(written)
}
