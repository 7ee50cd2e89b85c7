//! Cross-oracle agreement checks and invariant sweeps.
//!
//! A check that cannot run (bad grid, oracle failure) is reported as failed
//! with the error text; it never aborts the suite.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::CliError;
use crate::closed_form::{
    image_transform, power_binary_price, tbvp_w, BarrierProblemParams, Direction, MarketParams,
};
use crate::credit::{
    bond_price, composite_price, survival_probability, BondOption, BondSpec, OptionKind,
};
use crate::error::{PricingError, Result};
use crate::oracles::{
    draw_credit, draw_power_binary, mc_barrier_price, pde_bond_surface, pde_option_surface,
    pde_solve_tbvp, pde_survival_surface, quadrature_green, GridSpec, MovingBarrier, Scheme,
    TbvpProblem,
};
use crate::special::{mu, norm_cdf, norm_pdf};

/// Relative PDE agreement.
pub const PDE_REL_TOL: f64 = 1e-3;
/// Values below this are compared absolutely in the PDE checks.
pub const PDE_FLOOR: f64 = 1e-12;
/// Monte Carlo agreement, in standard errors.
pub const MC_Z_TOL: f64 = 3.0;
/// Closed form against Green's-function quadrature, relative.
pub const QUAD_REL_TOL: f64 = 1e-6;
/// Absolute floor of the quadrature check, in units of `X^β e^{μ(β)τ}`.
pub const QUAD_SCALE_FLOOR: f64 = 1e-15;
/// Literal against compositional option formula.
pub const GUARD_REL_TOL: f64 = 1e-9;
pub const GUARD_ABS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Pde,
    Mc,
    Quadrature,
    Invariants,
}

impl std::str::FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> std::result::Result<Self, CliError> {
        match s {
            "all" => Ok(Suite::All),
            "pde" => Ok(Suite::Pde),
            "mc" => Ok(Suite::Mc),
            "quadrature" => Ok(Suite::Quadrature),
            "invariants" => Ok(Suite::Invariants),
            _ => Err(CliError::Invalid(format!(
                "unknown suite {s:?}; expected all, pde, mc, quadrature or invariants"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Measured error in the units of `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn measure(name: String, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail,
        }
    }

    fn from_result(name: String, tolerance: f64, r: Result<(f64, String)>) -> Self {
        match r {
            Ok((measured, detail)) => Self::measure(name, measured, tolerance, detail),
            Err(e) => Self {
                name,
                measured: f64::NAN,
                tolerance,
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<40} measured {:>10.3e}  tol {:>9.2e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        )
    }
}

fn relative(got: f64, want: f64, floor: f64) -> f64 {
    (got - want).abs() / want.abs().max(floor)
}

fn with_option(config: &RunConfig) -> std::result::Result<(BondOption, BondOption), CliError> {
    let v = config.validate()?;
    let option = v.require_option()?;
    let put = BondOption::new(v.bond, option.with_kind(OptionKind::Put), v.market)?;
    let call = BondOption::new(v.bond, option.with_kind(OptionKind::Call), v.market)?;
    Ok((put, call))
}

/// Evaluation times of the PDE checks: `0`, `T1/2` and `T1 − T1/100`.
pub fn pde_times(expiry: f64) -> [f64; 3] {
    [0.0, 0.5 * expiry, 0.99 * expiry]
}

fn pde_checks(config: &RunConfig, out: &mut Vec<CheckResult>) -> std::result::Result<(), CliError> {
    let (put, call) = with_option(config)?;
    let (bond, market) = (*put.bond(), *put.market());
    let grid = match config.grid() {
        Ok(g) => g,
        Err(e) => {
            out.push(CheckResult::from_result(
                "pde.grid".into(),
                PDE_REL_TOL,
                Err(e),
            ));
            return Ok(());
        }
    };
    let surfaces = (|| {
        Ok::<_, PricingError>((
            pde_bond_surface(&bond, &market, &grid)?,
            pde_survival_surface(&bond, &market, &grid)?,
            pde_option_surface(&put, &grid)?,
            pde_option_surface(&call, &grid)?,
        ))
    })();
    let (bonds, survival, puts, calls) = match surfaces {
        Ok(s) => s,
        Err(e) => {
            out.push(CheckResult::from_result(
                "pde.solve".into(),
                PDE_REL_TOL,
                Err(e),
            ));
            return Ok(());
        }
    };
    for t in pde_times(put.option().expiry()) {
        for &v in &config.query.v {
            let cases: [(&str, Result<f64>, Result<f64>); 4] = [
                (
                    "bond",
                    bond_price(v, t, &bond, &market),
                    bonds.value_at(v, t),
                ),
                (
                    "survival",
                    survival_probability(v, t, &bond, &market),
                    survival.value_at(v, t),
                ),
                ("put", put.price(v, t), puts.value_at(v, t)),
                ("call", call.price(v, t), calls.value_at(v, t)),
            ];
            for (what, closed, pde) in cases {
                let r = closed.and_then(|c| {
                    pde.map(|p| {
                        (
                            relative(p, c, PDE_FLOOR),
                            format!("closed {c:.10e} pde {p:.10e}"),
                        )
                    })
                });
                out.push(CheckResult::from_result(
                    format!("pde.{what} V={v} t={t}"),
                    PDE_REL_TOL,
                    r,
                ));
            }
        }
    }
    out.push(CheckResult::from_result(
        "pde.convergence_inverse_ratio".into(),
        1.0 / 3.0,
        convergence_ratio(&market, &bond).map(|r| {
            (
                1.0 / r,
                format!("error ratio {r:.3} on grid doubling, 4 is second order"),
            )
        }),
    ));
    Ok(())
}

/// Error ratio of Crank-Nicolson on the survival problem when both steps
/// are halved.
fn convergence_ratio(market: &MarketParams, bond: &BondSpec) -> Result<f64> {
    let c = bond.effective_drift(market);
    let sigma = market.sigma();
    let horizon = bond.maturity();
    let barrier = bond.barrier_level();
    let exact = BarrierProblemParams::new(c, sigma, horizon)?;
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let problem = TbvpProblem {
        payoff: &one,
        boundary_value: &zero,
        c,
        sigma,
        r_discount: 0.0,
        barrier,
        horizon,
        kink: None,
    };
    let points = [(1.4, 0.0), (2.0, 0.5 * horizon), (3.0, 0.25 * horizon)];
    let error = |grid: &GridSpec| -> Result<f64> {
        let s = pde_solve_tbvp(&problem, grid)?;
        let mut worst: f64 = 0.0;
        for &(ratio, t) in &points {
            let x = ratio * barrier;
            worst = worst.max((s.value_at(x, t)? - tbvp_w(x / barrier, t, &exact)?).abs());
        }
        Ok(worst)
    };
    let coarse = GridSpec::new(101, 100, 20.0, Scheme::CrankNicolson)?;
    Ok(error(&coarse)? / error(&coarse.refined())?)
}

fn mc_checks(config: &RunConfig, out: &mut Vec<CheckResult>) -> std::result::Result<(), CliError> {
    let (put, _) = with_option(config)?;
    let (bond, market) = (*put.bond(), *put.market());
    let mc = match config.mc() {
        Ok(m) => m,
        Err(e) => {
            out.push(CheckResult::from_result("mc.spec".into(), MC_Z_TOL, Err(e)));
            return Ok(());
        }
    };
    let barrier = MovingBarrier {
        growth: bond.barrier_growth(),
        level: bond.barrier_level(),
        maturity: bond.maturity(),
    };
    let (r, maturity, recovery) = (market.r(), bond.maturity(), bond.recovery());
    let rebate = |t: f64| recovery * (-r * (maturity - t)).exp();
    let expiry = put.option().expiry();
    let e = put.option().redemption();
    for &v in &config.query.v {
        let b = (|| {
            let est = mc_barrier_price(|_| 1.0, rebate, maturity, barrier, &market, &mc, v)?;
            let closed = bond_price(v, 0.0, &bond, &market)?;
            Ok((
                est.z_score(closed),
                format!(
                    "closed {closed:.8} mc {:.8} ± {:.2e}",
                    est.estimate, est.std_error
                ),
            ))
        })();
        out.push(CheckResult::from_result(
            format!("mc.bond V={v} t=0"),
            MC_Z_TOL,
            b,
        ));
        let pb = (|| {
            let payoff =
                |x: f64| bond_price(x, expiry, &bond, &market).map_or(f64::NAN, |b| b.max(e));
            let est = mc_barrier_price(payoff, rebate, expiry, barrier, &market, &mc, v)?;
            let closed = composite_price(v, 0.0, &put)?;
            Ok((
                est.z_score(closed),
                format!(
                    "closed {closed:.8} mc {:.8} ± {:.2e}",
                    est.estimate, est.std_error
                ),
            ))
        })();
        out.push(CheckResult::from_result(
            format!("mc.puttable V={v} t=0"),
            MC_Z_TOL,
            pb,
        ));
    }
    Ok(())
}

/// Closed-form power-binary prices against quadrature over random draws;
/// reports the worst scaled error.
pub fn quadrature_sweep(config: &RunConfig, seed: u64) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = config.quad_tolerance();
    let mut worst: f64 = 0.0;
    let mut at = 0;
    for k in 0..config.numerics.sweep_draws {
        let c = draw_power_binary(&mut rng);
        let closed = power_binary_price(c.x, c.t, c.maturity, &c.params, &c.market)?;
        let quad = quadrature_green(c.x, c.tau(), &c.params, &c.market, tol)?;
        let scale = (c.params.beta * c.x.ln() + mu(c.params.beta, &c.market) * c.tau()).exp();
        let err = (closed - quad).abs() / (quad.abs() + QUAD_SCALE_FLOOR / QUAD_REL_TOL * scale);
        if err > worst {
            worst = err;
            at = k;
        }
    }
    Ok((
        worst,
        format!("{} draws, worst at draw {at}", config.numerics.sweep_draws),
    ))
}

/// Literal against compositional option prices over random draws with
/// `a ≠ 0`; reports the worst error in units of the guard tolerance and
/// how many draws had a moving barrier.
pub fn transcription_sweep(draws: usize, seed: u64) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut moving = 0;
    for _ in 0..draws {
        let c = draw_credit(&mut rng)?;
        if c.bond.barrier_growth() != 0.0 {
            moving += 1;
        }
        let o = BondOption::new(c.bond, c.option, c.market)?;
        let lit = o.price_literal(c.v, c.t)?;
        let comp = o.price_compositional(c.v, c.t)?;
        worst = worst.max((lit - comp).abs() / (GUARD_REL_TOL * lit.abs() + GUARD_ABS_TOL));
    }
    Ok((worst, format!("{moving} of {draws} draws with a != 0")))
}

fn invariant_checks(
    config: &RunConfig,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> std::result::Result<(), CliError> {
    let (put, call) = with_option(config)?;
    let (bond, market) = (*put.bond(), *put.market());
    let maturity = bond.maturity();
    let r = market.r();

    // φ(ξ) + ξΦ(ξ) > 0.
    let positivity = (|| {
        let mut least = f64::INFINITY;
        for k in 0..=2000 {
            let xi = -10.0 + 0.01 * k as f64;
            least = least.min(norm_pdf(xi) + xi * norm_cdf(xi)?);
        }
        Ok((
            if least > 0.0 { 0.0 } else { 1.0 },
            format!("min {least:.3e} on [-10, 10]"),
        ))
    })();
    out.push(CheckResult::from_result(
        "invariant.phi_plus_xi_Phi_positive".into(),
        0.0,
        positivity,
    ));

    // Survival and bond bounds and monotonicity on a 50 × 20 grid. The upper
    // bound and the ordering are non-strict: far from the barrier W rounds
    // to 1.
    let grid_check = |name: &str,
                      f: &dyn Fn(f64, f64) -> Result<f64>,
                      lo: &dyn Fn(f64) -> f64,
                      hi: &dyn Fn(f64) -> f64| {
        let r = (|| {
            let mut violations = 0usize;
            for i in 0..20 {
                let t = 0.95 * maturity * i as f64 / 19.0;
                let barrier = bond.barrier_at(t);
                let mut prev = f64::NEG_INFINITY;
                for j in 0..50 {
                    let v = barrier * (1.01 + 4.0 * j as f64 / 49.0);
                    let y = f(v, t)?;
                    if !(y > lo(t) && y <= hi(t) && y >= prev) {
                        violations += 1;
                    }
                    prev = y;
                }
            }
            Ok((
                violations as f64,
                format!("{violations} violations on 50x20 (V, t) grid"),
            ))
        })();
        CheckResult::from_result(name.into(), 0.0, r)
    };
    out.push(grid_check(
        "invariant.survival_bounds_monotone",
        &|v, t| survival_probability(v, t, &bond, &market),
        &|_| 0.0,
        &|_| 1.0,
    ));
    out.push(grid_check(
        "invariant.bond_bounds_monotone",
        &|v, t| bond_price(v, t, &bond, &market),
        &|t| bond.recovery() * (-r * (maturity - t)).exp(),
        &|t| (-r * (maturity - t)).exp(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);

    // The image of any solution vanishes on the barrier.
    let image = (|| {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let c = draw_power_binary(&mut rng);
            let barrier = c.x * 0.8;
            let u = |x: f64, t: f64| power_binary_price(x, t, c.maturity, &c.params, &c.market);
            let c_drift = c.market.r() - c.market.q();
            let sol = image_transform(u, barrier, c_drift, c.market.sigma())?;
            let at = sol.eval(barrier, c.t)?;
            let scale = u(barrier, c.t)?.abs().max(1.0);
            worst = worst.max(at.abs() / scale);
        }
        Ok((worst, "50 random power-binary solutions".to_string()))
    })();
    out.push(CheckResult::from_result(
        "invariant.image_vanishes_on_barrier".into(),
        1e-12,
        image,
    ));

    // Above + Below = unrestricted claim.
    let complement = (|| {
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let c = draw_power_binary(&mut rng);
            let mut above = c.params;
            above.direction = Direction::Above;
            let mut below = c.params;
            below.direction = Direction::Below;
            let mut whole = c.params;
            whole.direction = Direction::Above;
            whole.strike = 0.0;
            let price = |p| power_binary_price(c.x, c.t, c.maturity, &p, &c.market);
            let w = price(whole)?;
            let gap = (price(above)? + price(below)? - w).abs() / w.abs().max(1e-300);
            worst = worst.max(gap);
        }
        Ok((worst, "200 random draws, relative".to_string()))
    })();
    out.push(CheckResult::from_result(
        "invariant.direction_complement".into(),
        1e-10,
        complement,
    ));

    // Put-call parity: P − C = E e^{−rτ₁} W₁ + R e^{−rτ}(1 − W₁) − B, where
    // W₁ is survival to T1.
    let expiry = put.option().expiry();
    let e = put.option().redemption();
    let parity = (|| {
        let w1_problem =
            BarrierProblemParams::new(bond.effective_drift(&market), market.sigma(), expiry)?;
        let mut worst: f64 = 0.0;
        for t in [0.0, 0.5 * expiry, expiry - 1e-6] {
            for &v in &config.query.v {
                let x = v * (bond.barrier_growth() * (maturity - t)).exp() / bond.barrier_level();
                let w1 = tbvp_w(x, t, &w1_problem)?;
                let b = bond_price(v, t, &bond, &market)?;
                let rhs = e * (-r * (expiry - t)).exp() * w1
                    + bond.recovery() * (-r * (maturity - t)).exp() * (1.0 - w1)
                    - b;
                worst = worst.max((put.price(v, t)? - call.price(v, t)? - rhs).abs());
            }
        }
        Ok((worst, "t in {0, T1/2, T1 - 1e-6}".to_string()))
    })();
    out.push(CheckResult::from_result(
        "invariant.put_call_parity".into(),
        1e-6,
        parity,
    ));

    let guard = transcription_sweep(config.numerics.sweep_draws.max(100), seed ^ 0x5bd1_e995);
    out.push(CheckResult::from_result(
        "invariant.literal_vs_compositional".into(),
        1.0,
        guard,
    ));
    Ok(())
}

/// Runs `suite` and collects one result per check. Configuration errors
/// (exit 2) still abort; numerical trouble inside a check is a failure.
pub fn cmd_verify(config: &RunConfig, suite: Suite) -> std::result::Result<VerifyReport, CliError> {
    config.validate()?;
    let seed = config.numerics.seed;
    let mut checks = Vec::new();
    let run = |s: Suite| suite == Suite::All || suite == s;
    if run(Suite::Invariants) {
        invariant_checks(config, seed, &mut checks)?;
    }
    if run(Suite::Quadrature) {
        let r = quadrature_sweep(config, seed);
        checks.push(CheckResult::from_result(
            "quadrature.power_binary_sweep".into(),
            QUAD_REL_TOL,
            r,
        ));
    }
    if run(Suite::Pde) {
        pde_checks(config, &mut checks)?;
    }
    if run(Suite::Mc) {
        mc_checks(config, &mut checks)?;
    }
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("pde".parse::<Suite>().unwrap(), Suite::Pde);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn invariants_pass_on_default() {
        let report = cmd_verify(&RunConfig::default(), Suite::Invariants).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn undersized_grid_fails_the_pde_check() {
        let mut c = RunConfig::default();
        c.numerics.pde.n_space = 10;
        let report = cmd_verify(&c, Suite::Pde).unwrap();
        assert!(!report.passed());
        assert_eq!(report.checks[0].name, "pde.grid");
    }
}
