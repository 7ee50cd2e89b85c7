//! Structural credit bond, early-redemption boundary, bond put/call options
//! and the puttable/callable composites.
//!
//! Firm value follows `dV = (r − q)V dt + σV dW` under the pricing measure and
//! default is triggered the first time `V` touches the moving barrier
//! `V_b(t) = b e^{−a(T−t)}`. On default the holder receives `R e^{−r(T−t)}`.
//! The firm's capital structure `V = mS + nB` enters nowhere in the
//! valuation and has no representation here.
//!
//! Option prices are produced by two routes:
//!
//! * [`BondOption::price_literal`] evaluates the closed-form expressions in
//!   the original firm-value variable.
//! * [`BondOption::price_compositional`] splits the terminal payoff into
//!   power-binary pieces, prices each with
//!   [`power_binary_price`](crate::closed_form::power_binary_price), applies
//!   the image construction at the fixed barrier `b` and finally maps back
//!   through `x = V e^{a(T−t)}`.
//!
//! The two routes share no code beyond the normal CDFs and are expected to
//! agree to ~1e-9.

use crate::closed_form::{
    image_transform, power_binary_price, tbvp_w, BarrierProblemParams, Direction, MarketParams,
    PowerBinaryParams,
};
use crate::error::{ensure_finite, PricingError, Result};
use crate::special::{binorm_cdf, norm_cdf, Correlation};

/// Root-finding tolerance (in price) used when an option prices itself.
pub const INTERNAL_BOUNDARY_TOL: f64 = 1e-13;
/// Default tolerance of [`early_redemption_boundary`] callers.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;
const MAX_ROOT_ITERATIONS: usize = 200;
const MAX_BRACKET_DOUBLINGS: usize = 200;

/// Zero-coupon credit bond with unit face value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondSpec {
    maturity: f64,
    barrier_growth: f64,
    barrier_level: f64,
    recovery: f64,
}

impl BondSpec {
    /// `maturity` T, barrier growth rate `a`, barrier level `b` at maturity,
    /// recovery fraction `R`.
    pub fn new(
        maturity: f64,
        barrier_growth: f64,
        barrier_level: f64,
        recovery: f64,
    ) -> Result<Self> {
        ensure_finite("T", maturity)?;
        ensure_finite("a", barrier_growth)?;
        ensure_finite("b", barrier_level)?;
        ensure_finite("R", recovery)?;
        if maturity <= 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "bond maturity must be > 0, got {maturity}"
            )));
        }
        if barrier_level <= 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "barrier level b must be > 0, got {barrier_level}"
            )));
        }
        if !(0.0..1.0).contains(&recovery) {
            return Err(PricingError::InvalidParams(format!(
                "recovery fraction must lie in [0, 1), got {recovery}"
            )));
        }
        Ok(Self {
            maturity,
            barrier_growth,
            barrier_level,
            recovery,
        })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn barrier_growth(&self) -> f64 {
        self.barrier_growth
    }

    pub fn barrier_level(&self) -> f64 {
        self.barrier_level
    }

    pub fn recovery(&self) -> f64 {
        self.recovery
    }

    pub fn face(&self) -> f64 {
        1.0
    }

    /// `V_b(t) = b e^{−a(T−t)}`.
    pub fn barrier_at(&self, t: f64) -> f64 {
        self.barrier_level * (-self.barrier_growth * (self.maturity - t)).exp()
    }

    /// Effective drift `r − q − a` of the barrier-normalised firm value.
    pub fn effective_drift(&self, market: &MarketParams) -> f64 {
        market.r() - market.q() - self.barrier_growth
    }

    fn check_region(&self, v: f64, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if v.is_nan() {
            return Err(PricingError::Domain("firm value is NaN".into()));
        }
        let barrier = self.barrier_at(t);
        if v < barrier {
            return Err(PricingError::BelowBarrier { value: v, barrier });
        }
        Ok(barrier)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Put,
    Call,
}

/// Early-redemption right exercisable once, at `expiry`, for `redemption`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionSpec {
    expiry: f64,
    redemption: f64,
    kind: OptionKind,
}

impl OptionSpec {
    pub fn new(expiry: f64, redemption: f64, kind: OptionKind) -> Result<Self> {
        ensure_finite("T1", expiry)?;
        ensure_finite("E", redemption)?;
        if expiry <= 0.0 {
            return Err(PricingError::InvalidOption(format!(
                "option expiry must be > 0, got {expiry}"
            )));
        }
        if redemption <= 0.0 {
            return Err(PricingError::InvalidOption(format!(
                "redemption amount must be > 0, got {redemption}"
            )));
        }
        Ok(Self {
            expiry,
            redemption,
            kind,
        })
    }

    pub fn expiry(&self) -> f64 {
        self.expiry
    }

    pub fn redemption(&self) -> f64 {
        self.redemption
    }

    pub fn kind(&self) -> OptionKind {
        self.kind
    }

    pub fn with_kind(&self, kind: OptionKind) -> Self {
        Self { kind, ..*self }
    }

    /// Checks `0 < T1 < T` and `R e^{−r(T−T1)} < E < e^{−r(T−T1)}`.
    pub fn validate_against(&self, bond: &BondSpec, market: &MarketParams) -> Result<()> {
        if self.expiry >= bond.maturity {
            return Err(PricingError::InvalidOption(format!(
                "option expiry T1 = {} must precede bond maturity T = {}",
                self.expiry, bond.maturity
            )));
        }
        let discount = (-market.r() * (bond.maturity - self.expiry)).exp();
        let lower = bond.recovery * discount;
        if !(self.redemption > lower && self.redemption < discount) {
            return Err(PricingError::InvalidOption(format!(
                "redemption amount E = {} outside the open interval ({lower}, {discount}) \
                 bounded by R·e^(-r(T-T1)) and e^(-r(T-T1)); no early-redemption boundary exists",
                self.redemption
            )));
        }
        Ok(())
    }
}

/// Firm value `K` at which the bond is worth exactly `E` at option expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResult {
    pub k: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Risk-neutral probability that the barrier is not hit before `T`.
pub fn survival_probability(v: f64, t: f64, bond: &BondSpec, market: &MarketParams) -> Result<f64> {
    let barrier = bond.check_region(v, t)?;
    if t >= bond.maturity {
        return Err(PricingError::Domain(format!(
            "t must be < T, got t = {t}, T = {}",
            bond.maturity
        )));
    }
    let problem =
        BarrierProblemParams::new(bond.effective_drift(market), market.sigma(), bond.maturity)?;
    tbvp_w(v / barrier, t, &problem)
}

/// Survival probability written directly in the firm-value variable.
///
/// Same quantity as [`survival_probability`], computed without the
/// change of variables; kept as an independent algebraic route.
pub fn survival_probability_direct(
    v: f64,
    t: f64,
    bond: &BondSpec,
    market: &MarketParams,
) -> Result<f64> {
    let barrier = bond.check_region(v, t)?;
    let tau = bond.maturity - t;
    if tau <= 0.0 {
        return Err(PricingError::Domain(format!(
            "t must be < T, got t = {t}, T = {}",
            bond.maturity
        )));
    }
    let (r, q, a, s) = (market.r(), market.q(), bond.barrier_growth, market.sigma());
    let b = bond.barrier_level;
    let scale = s * tau.sqrt();
    let d1 = ((v / b).ln() + (r - q - 0.5 * s * s) * tau) / scale;
    let d2 = ((b / v).ln() + (r - q - 2.0 * a - 0.5 * s * s) * tau) / scale;
    let exponent = 1.0 - 2.0 * (r - q - a) / (s * s);
    let tail = norm_cdf(d2)?;
    let reflected = if tail == 0.0 {
        0.0
    } else {
        (exponent * (v / barrier).ln() + tail.ln()).exp()
    };
    Ok(norm_cdf(d1)? - reflected)
}

/// Credit bond price `R e^{−r(T−t)} + W (1 − R) e^{−r(T−t)}`.
///
/// At `t = T` the face value (or the recovery, exactly at the barrier) is
/// returned.
pub fn bond_price(v: f64, t: f64, bond: &BondSpec, market: &MarketParams) -> Result<f64> {
    let barrier = bond.check_region(v, t)?;
    if t > bond.maturity {
        return Err(PricingError::Domain(format!(
            "t = {t} is after bond maturity {}",
            bond.maturity
        )));
    }
    if t == bond.maturity {
        return Ok(if v > barrier {
            bond.face()
        } else {
            bond.recovery
        });
    }
    let discount = (-market.r() * (bond.maturity - t)).exp();
    let w = survival_probability(v, t, bond, market)?;
    Ok(discount * (1.0 - (1.0 - w) * (1.0 - bond.recovery)))
}

/// Solves `B(K, T1) = E` on `[V_b(T1), ∞)`.
///
/// The bracket's upper end is grown geometrically until it prices above
/// `E`; the root is then refined by false position with Illinois
/// down-weighting, falling back to bisection whenever the bracket fails to
/// halve over two consecutive steps.
pub fn early_redemption_boundary(
    bond: &BondSpec,
    option: &OptionSpec,
    market: &MarketParams,
    tol: f64,
) -> Result<BoundaryResult> {
    if !(tol > 0.0) {
        return Err(PricingError::InvalidParams(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    option.validate_against(bond, market)?;
    let t1 = option.expiry;
    let target = option.redemption;
    let f = |v: f64| bond_price(v, t1, bond, market).map(|b| b - target);

    let mut lo = bond.barrier_at(t1);
    let mut f_lo = f(lo)?;
    let mut hi = 2.0 * lo;
    let mut f_hi = f(hi)?;
    let mut doublings = 0;
    while f_hi <= 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi)?;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(PricingError::Numerical(
                "could not bracket the early-redemption boundary".into(),
            ));
        }
    }
    if f_lo.abs() <= tol {
        return Ok(BoundaryResult {
            k: lo,
            residual: f_lo,
            iterations: 0,
        });
    }

    // Illinois false position; `side` remembers which end moved last.
    let mut side = 0i8;
    let mut width = hi - lo;
    for iteration in 1..=MAX_ROOT_ITERATIONS {
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) || iteration % 3 == 0 && hi - lo > 0.5 * width {
            x = 0.5 * (lo + hi);
            width = hi - lo;
        }
        let fx = f(x)?;
        if fx.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
            if fx.abs() > tol {
                return Err(PricingError::Numerical(format!(
                    "boundary bracket collapsed with residual {fx:e} above tolerance {tol:e}"
                )));
            }
            return Ok(BoundaryResult {
                k: x,
                residual: fx,
                iterations: iteration,
            });
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(PricingError::Numerical(format!(
        "early-redemption boundary did not converge within {MAX_ROOT_ITERATIONS} iterations"
    )))
}

/// A bond option with its early-redemption boundary solved once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondOption {
    bond: BondSpec,
    option: OptionSpec,
    market: MarketParams,
    boundary: f64,
}

// Arguments shared by both option closed forms, in the firm-value variable.
struct LiteralArgs {
    b1: f64,
    b2: f64,
    b1t: f64,
    b2t: f64,
    b5: f64,
    b5t: f64,
    d: f64,
    dt: f64,
    ratio_pow: f64,
    rho: Correlation,
    disc_bond: f64,
    disc_option: f64,
}

impl BondOption {
    pub fn new(bond: BondSpec, option: OptionSpec, market: MarketParams) -> Result<Self> {
        let boundary = early_redemption_boundary(&bond, &option, &market, INTERNAL_BOUNDARY_TOL)?.k;
        Ok(Self {
            bond,
            option,
            market,
            boundary,
        })
    }

    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    pub fn bond(&self) -> &BondSpec {
        &self.bond
    }

    pub fn option(&self) -> &OptionSpec {
        &self.option
    }

    pub fn market(&self) -> &MarketParams {
        &self.market
    }

    /// Validates `(V, t)`; `Some(0)` when `V` sits exactly on the barrier.
    fn precheck(&self, v: f64, t: f64) -> Result<Option<f64>> {
        let barrier = self.bond.check_region(v, t)?;
        if t >= self.option.expiry {
            return Err(PricingError::Domain(format!(
                "t must be < T1, got t = {t}, T1 = {}",
                self.option.expiry
            )));
        }
        if v == barrier {
            return Ok(Some(0.0));
        }
        Ok(None)
    }

    /// Terminal payoff at `T1`: `(E − B)⁺` for a put, `(B − E)⁺` for a call.
    pub fn payoff(&self, v: f64) -> Result<f64> {
        let b = bond_price(v, self.option.expiry, &self.bond, &self.market)?;
        let e = self.option.redemption;
        Ok(match self.option.kind {
            OptionKind::Put => (e - b).max(0.0),
            OptionKind::Call => (b - e).max(0.0),
        })
    }

    pub fn price(&self, v: f64, t: f64) -> Result<f64> {
        self.price_literal(v, t)
    }

    fn literal_args(&self, v: f64, t: f64) -> LiteralArgs {
        let (r, q, s) = (self.market.r(), self.market.q(), self.market.sigma());
        let a = self.bond.barrier_growth;
        let maturity = self.bond.maturity;
        let t1 = self.option.expiry;
        let k = self.boundary;
        let tau = maturity - t;
        let tau1 = t1 - t;
        let s_tau = s * tau.sqrt();
        let s_tau1 = s * tau1.sqrt();
        let c_half = r - q - a - 0.5 * s * s;

        let log_ratio = (v / self.bond.barrier_at(t)).ln();
        let log_k_barrier = (self.bond.barrier_at(t1) / k).ln();
        let exponent = 1.0 - 2.0 * (r - q - a) / (s * s);

        LiteralArgs {
            b1: (log_ratio + c_half * tau1) / s_tau1,
            b2: ((v / k).ln() + (r - q - 0.5 * s * s) * tau1) / s_tau1,
            b1t: (-log_ratio + c_half * tau1) / s_tau1,
            b2t: (log_k_barrier - log_ratio + c_half * tau1) / s_tau1,
            b5: (log_ratio - log_k_barrier + c_half * tau1) / s_tau1,
            b5t: ((k / v).ln() + (r - q - 2.0 * a - 0.5 * s * s) * tau1) / s_tau1,
            d: (log_ratio + c_half * tau) / s_tau,
            dt: (-log_ratio + c_half * tau) / s_tau,
            ratio_pow: (exponent * log_ratio).exp(),
            rho: Correlation::saturating((tau1 / tau).sqrt()).expect("ratio of positive times"),
            disc_bond: (-r * tau).exp(),
            disc_option: (-r * tau1).exp(),
        }
    }

    /// Closed-form option value in the firm-value variable.
    pub fn price_literal(&self, v: f64, t: f64) -> Result<f64> {
        if let Some(at_barrier) = self.precheck(v, t)? {
            return Ok(at_barrier);
        }
        let LiteralArgs {
            b1,
            b2,
            b1t,
            b2t,
            b5,
            b5t,
            d,
            dt,
            ratio_pow,
            rho,
            disc_bond,
            disc_option,
        } = self.literal_args(v, t);
        let n = norm_cdf;
        let n2 = binorm_cdf;
        let recovery = self.bond.recovery;
        let e = self.option.redemption;
        let risky = (1.0 - recovery) * disc_bond;

        let value = match self.option.kind {
            OptionKind::Put => {
                let cash = e * disc_option - recovery * disc_bond;
                let digital = n(b1)? - n(b2)? - ratio_pow * (n(b1t)? - n(b2t)?);
                let survival = n2(d, b1, rho)?
                    - n2(d, b2, rho)?
                    - ratio_pow * (n2(dt, b1t, rho)? - n2(dt, b2t, rho)?)
                    + (n2(d, -b1, -rho)? - n2(d, -b5, -rho)?)
                    - ratio_pow * (n2(dt, -b1t, -rho)? - n2(dt, -b5t, -rho)?);
                cash * digital - risky * survival
            }
            OptionKind::Call => {
                let cash = recovery * disc_bond - e * disc_option;
                let digital = n(b2)? - ratio_pow * n(b2t)?;
                let survival = n2(d, b2, rho)? - ratio_pow * n2(dt, b2t, rho)? + n2(d, -b5, -rho)?
                    - ratio_pow * n2(dt, -b5t, -rho)?;
                cash * digital + risky * survival
            }
        };
        Ok(value)
    }

    /// Option value assembled from power-binary pieces and the image
    /// construction.
    pub fn price_compositional(&self, v: f64, t: f64) -> Result<f64> {
        if let Some(at_barrier) = self.precheck(v, t)? {
            return Ok(at_barrier);
        }
        let pieces = self.payoff_pieces()?;
        let t1 = self.option.expiry;
        let shifted = pieces.market;
        let u = |x: f64, s: f64| pieces.unbarriered(x, s, t1, &shifted);
        let c = self.bond.effective_drift(&self.market);
        let image = image_transform(u, self.bond.barrier_level, c, self.market.sigma())?;
        let x = v * (self.bond.barrier_growth * (self.bond.maturity - t)).exp();
        image.eval(x, t)
    }

    /// Terminal payoff in `x = V e^{a(T−T1)}` as weighted power binaries.
    fn payoff_pieces(&self) -> Result<PayoffPieces> {
        let (r, s) = (self.market.r(), self.market.sigma());
        let a = self.bond.barrier_growth;
        let b = self.bond.barrier_level;
        let maturity = self.bond.maturity;
        let t1 = self.option.expiry;
        let residual = maturity - t1;
        let strike = self.boundary * (a * residual).exp();
        let shifted = self.market.with_dividend(self.market.q() + a)?;
        let recovery = self.bond.recovery;
        let e = self.option.redemption;
        let disc = (-r * residual).exp();
        let exponent = 1.0 - 2.0 * (r - self.market.q() - a) / (s * s);

        let cash = PowerBinaryParams::power_digital(0.0, 0.0, Direction::Above);
        let normal = PowerBinaryParams {
            beta: 0.0,
            i: 1.0,
            inner_strike: b,
            strike: 0.0,
            tau1: residual,
            tau2: 0.0,
            tau3: residual,
            direction: Direction::Above,
        };
        let reflected = PowerBinaryParams {
            beta: exponent,
            i: -1.0,
            inner_strike: 1.0 / b,
            strike: 0.0,
            tau1: residual,
            tau2: 0.0,
            tau3: residual,
            direction: Direction::Below,
        };
        let reflected_scale = (1.0 - recovery) * disc * (-exponent * b.ln()).exp();

        let terms = match self.option.kind {
            // 1{b < x < K'} as 1{x > b} − 1{x > K'} for the first two pieces
            // and as 1{x < K'} − 1{x < b} for the reflected one.
            OptionKind::Put => vec![
                Term::window(e - recovery * disc, cash, b, strike),
                Term::window(-(1.0 - recovery) * disc, normal, b, strike),
                Term::window(reflected_scale, reflected, b, strike),
            ],
            OptionKind::Call => vec![
                Term::above(recovery * disc - e, cash, strike),
                Term::above((1.0 - recovery) * disc, normal, strike),
                Term::above(
                    -reflected_scale,
                    PowerBinaryParams {
                        direction: Direction::Above,
                        ..reflected
                    },
                    strike,
                ),
            ],
        };
        Ok(PayoffPieces {
            terms,
            market: shifted,
        })
    }
}

struct Term {
    weight: f64,
    params: PowerBinaryParams,
    lower: f64,
    upper: f64,
}

impl Term {
    fn window(weight: f64, params: PowerBinaryParams, lower: f64, upper: f64) -> Self {
        Self {
            weight,
            params,
            lower,
            upper,
        }
    }

    fn above(weight: f64, params: PowerBinaryParams, strike: f64) -> Self {
        Self {
            weight,
            params,
            lower: strike,
            upper: f64::INFINITY,
        }
    }

    fn value(&self, x: f64, t: f64, expiry: f64, market: &MarketParams) -> Result<f64> {
        let at = |strike: f64, direction: Direction| {
            let params = PowerBinaryParams {
                strike,
                direction,
                ..self.params
            };
            power_binary_price(x, t, expiry, &params, market)
        };
        let window = match self.params.direction {
            Direction::Above => {
                let upper = if self.upper.is_infinite() {
                    0.0
                } else {
                    at(self.upper, Direction::Above)?
                };
                at(self.lower, Direction::Above)? - upper
            }
            Direction::Below => {
                let upper = if self.upper.is_infinite() {
                    at(0.0, Direction::Above)?
                } else {
                    at(self.upper, Direction::Below)?
                };
                upper - at(self.lower, Direction::Below)?
            }
        };
        Ok(self.weight * window)
    }
}

struct PayoffPieces {
    terms: Vec<Term>,
    market: MarketParams,
}

impl PayoffPieces {
    fn unbarriered(&self, x: f64, t: f64, expiry: f64, market: &MarketParams) -> Result<f64> {
        self.terms
            .iter()
            .map(|term| term.value(x, t, expiry, market))
            .sum()
    }
}

/// Put or call on the credit bond, depending on `option.kind()`.
pub fn bond_option_price(
    v: f64,
    t: f64,
    bond: &BondSpec,
    option: &OptionSpec,
    market: &MarketParams,
) -> Result<f64> {
    BondOption::new(*bond, *option, *market)?.price(v, t)
}

/// Bond with the holder's early-redemption right: `B + P` up to `T1`,
/// `B` afterwards.
pub fn puttable_bond_price(
    v: f64,
    t: f64,
    bond: &BondSpec,
    option: &OptionSpec,
    market: &MarketParams,
) -> Result<f64> {
    composite_price(
        v,
        t,
        &BondOption::new(*bond, option.with_kind(OptionKind::Put), *market)?,
    )
}

/// Bond with the issuer's call right: `B − C` up to `T1`, `B` afterwards.
pub fn callable_bond_price(
    v: f64,
    t: f64,
    bond: &BondSpec,
    option: &OptionSpec,
    market: &MarketParams,
) -> Result<f64> {
    composite_price(
        v,
        t,
        &BondOption::new(*bond, option.with_kind(OptionKind::Call), *market)?,
    )
}

/// Composite price using an already-solved [`BondOption`]; the option's
/// kind decides puttable (put) versus callable (call).
pub fn composite_price(v: f64, t: f64, option: &BondOption) -> Result<f64> {
    let bond = option.bond();
    let market = option.market();
    let expiry = option.option().expiry();
    let b = bond_price(v, t, bond, market)?;
    if t > expiry {
        return Ok(b);
    }
    let e = option.option().redemption();
    let kind = option.option().kind();
    if t == expiry {
        return Ok(match kind {
            OptionKind::Put => b.max(e),
            OptionKind::Call => b.min(e),
        });
    }
    let premium = option.price(v, t)?;
    Ok(match kind {
        OptionKind::Put => b + premium,
        OptionKind::Call => b - premium,
    })
}
