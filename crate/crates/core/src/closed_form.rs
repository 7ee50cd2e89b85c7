//! Black-Scholes solution representations.
//!
//! [`power_binary_price`] solves the terminal value problem
//!
//! ```text
//! V_t + ½σ²X²V_XX + (r − q)X V_X − rV = 0,
//! V(X, T) = X^β · Φ(δ(Xⁱ/L, τ₁, τ₂, τ₃)) · 1{X > K}
//! ```
//!
//! in closed form as `X^β e^{μ(β)τ} N₂(a₁, a₂; ρ)`. [`tbvp_w`] is the
//! image-method solution of the unit-payoff barrier problem on `x > 1`,
//! and [`image_transform`] generalises the image construction to any
//! barrier level.

use crate::error::{ensure_finite, ensure_not_nan, PricingError, Result};
use crate::special::{binorm_cdf, delta_from_log, mu, norm_cdf, Correlation};

/// Short rate, continuous dividend yield and volatility of the underlying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    r: f64,
    q: f64,
    sigma: f64,
}

impl MarketParams {
    pub fn new(r: f64, q: f64, sigma: f64) -> Result<Self> {
        ensure_finite("r", r)?;
        ensure_finite("q", q)?;
        ensure_finite("sigma", sigma)?;
        if sigma <= 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "volatility must be > 0, got {sigma}"
            )));
        }
        Ok(Self { r, q, sigma })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Same rate and volatility with the dividend yield replaced.
    pub fn with_dividend(&self, q: f64) -> Result<Self> {
        Self::new(self.r, q, self.sigma)
    }
}

/// Which side of the strike the terminal indicator selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `1{X > K}`
    Above,
    /// `1{X < K}`
    Below,
}

/// Parameters of the payoff `X^β Φ(δ(Xⁱ/L, τ₁, τ₂, τ₃)) 1{X ≷ K}`.
///
/// `inner_strike = 0` (only with `i = 0`) removes the normal factor and
/// `strike = 0` with [`Direction::Above`] removes the indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBinaryParams {
    pub beta: f64,
    pub i: f64,
    pub inner_strike: f64,
    pub strike: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub direction: Direction,
}

impl PowerBinaryParams {
    /// Plain power digital `X^β 1{X ≷ K}`.
    pub fn power_digital(beta: f64, strike: f64, direction: Direction) -> Self {
        Self {
            beta,
            i: 0.0,
            inner_strike: 0.0,
            strike,
            tau1: 0.0,
            tau2: 0.0,
            tau3: 1.0,
            direction,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("beta", self.beta)?;
        ensure_finite("i", self.i)?;
        ensure_finite("tau1", self.tau1)?;
        ensure_finite("tau2", self.tau2)?;
        ensure_finite("tau3", self.tau3)?;
        ensure_not_nan("strike", self.strike)?;
        ensure_finite("inner strike", self.inner_strike)?;
        if self.inner_strike < 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "inner strike L must be >= 0, got {}",
                self.inner_strike
            )));
        }
        if self.strike < 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "strike K must be >= 0, got {}",
                self.strike
            )));
        }
        if self.tau3 < 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "tau3 must be >= 0, got {}",
                self.tau3
            )));
        }
        if self.inner_strike == 0.0 && self.i != 0.0 {
            return Err(PricingError::InvalidParams(
                "inner strike L = 0 requires i = 0".into(),
            ));
        }
        Ok(())
    }

    /// The terminal payoff this parameter set prices, evaluated at `x`.
    pub fn payoff(&self, x: f64, market: &MarketParams) -> Result<f64> {
        self.validate()?;
        let inside = match self.direction {
            Direction::Above => x > self.strike,
            Direction::Below => x < self.strike,
        };
        if !inside {
            return Ok(0.0);
        }
        let normal = if self.inner_strike == 0.0 {
            1.0
        } else {
            let arg = delta_from_log(
                self.i * x.ln() - self.inner_strike.ln(),
                self.tau1,
                self.tau2,
                self.tau3,
                market,
            )?;
            norm_cdf(arg)?
        };
        Ok(x.powf(self.beta) * normal)
    }
}

/// Closed-form value at `(X, t)` of the power-binary terminal value problem
/// maturing at `maturity`.
pub fn power_binary_price(
    x: f64,
    t: f64,
    maturity: f64,
    params: &PowerBinaryParams,
    market: &MarketParams,
) -> Result<f64> {
    params.validate()?;
    ensure_finite("X", x)?;
    if x <= 0.0 {
        return Err(PricingError::Domain(format!("X must be > 0, got {x}")));
    }
    ensure_finite("t", t)?;
    ensure_finite("T", maturity)?;
    let tau = maturity - t;
    if tau <= 0.0 {
        return Err(PricingError::Domain(format!(
            "time to maturity must be > 0, got {tau}"
        )));
    }
    let PowerBinaryParams {
        beta,
        i,
        inner_strike,
        strike,
        tau1,
        tau2,
        tau3,
        direction,
    } = *params;

    let spread = tau3 + i * i * tau;
    if spread <= 0.0 {
        return Err(PricingError::Domain(format!(
            "tau3 + i²τ must be > 0, got {spread}"
        )));
    }

    let log_x = x.ln();
    let a1 = if inner_strike == 0.0 {
        f64::INFINITY
    } else {
        delta_from_log(
            i * log_x - inner_strike.ln(),
            tau1 + i * tau,
            tau2 + i * beta * tau,
            spread,
            market,
        )?
    };
    let a2 = delta_from_log(log_x - strike.ln(), tau, beta * tau, tau, market)?;
    let rho = Correlation::saturating(i * (tau / spread).sqrt())?;

    let prefactor = (beta * log_x + mu(beta, market) * tau).exp();
    let probability = match direction {
        Direction::Above => binorm_cdf(a1, a2, rho)?,
        Direction::Below => binorm_cdf(a1, -a2, -rho)?,
    };
    if probability == 0.0 {
        return Ok(0.0);
    }
    Ok(prefactor * probability)
}

/// Drift, volatility and horizon of `w_t + ½σ²x²w_xx + c x w_x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierProblemParams {
    c: f64,
    sigma: f64,
    horizon: f64,
}

impl BarrierProblemParams {
    pub fn new(c: f64, sigma: f64, horizon: f64) -> Result<Self> {
        ensure_finite("c", c)?;
        ensure_finite("sigma", sigma)?;
        ensure_finite("T", horizon)?;
        if sigma <= 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "volatility must be > 0, got {sigma}"
            )));
        }
        if horizon <= 0.0 {
            return Err(PricingError::InvalidParams(format!(
                "terminal time must be > 0, got {horizon}"
            )));
        }
        Ok(Self { c, sigma, horizon })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Exponent `1 − 2c/σ²` of the image prefactor.
    pub fn image_exponent(&self) -> f64 {
        1.0 - 2.0 * self.c / (self.sigma * self.sigma)
    }
}

/// Survival-type solution of the unit-payoff barrier problem:
/// `w = 0` at `x = 1`, `w = 1` at `t = T` for `x > 1`.
pub fn tbvp_w(x: f64, t: f64, problem: &BarrierProblemParams) -> Result<f64> {
    ensure_not_nan("x", x)?;
    ensure_finite("t", t)?;
    if x < 1.0 {
        return Err(PricingError::Domain(format!("x must be >= 1, got {x}")));
    }
    let tau = problem.horizon - t;
    if tau <= 0.0 {
        return Err(PricingError::Domain(format!(
            "t must be < T, got t = {t}, T = {}",
            problem.horizon
        )));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let sigma = problem.sigma;
    let scale = sigma * tau.sqrt();
    let drift = (problem.c - 0.5 * sigma * sigma) * tau;
    let log_x = x.ln();
    let direct = norm_cdf((log_x + drift) / scale)?;
    let reflected = scaled_tail(problem.image_exponent() * log_x, (drift - log_x) / scale)?;
    Ok(direct - reflected)
}

// exp(log_factor)·Φ(arg) without forming ∞·0 when Φ underflows.
fn scaled_tail(log_factor: f64, arg: f64) -> Result<f64> {
    let tail = norm_cdf(arg)?;
    if tail == 0.0 {
        return Ok(0.0);
    }
    Ok((log_factor + tail.ln()).exp())
}

/// `x ↦ u(x, t) − (x/b)^{1−2c/σ²} u(b²/x, t)`: the knock-out solution on
/// `x > b` built from an unbarriered solution `u`.
#[derive(Clone)]
pub struct ImageSolution<F> {
    inner: F,
    barrier: f64,
    exponent: f64,
}

impl<F> ImageSolution<F>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        ensure_not_nan("x", x)?;
        if x <= 0.0 {
            return Err(PricingError::Domain(format!("x must be > 0, got {x}")));
        }
        let direct = (self.inner)(x, t)?;
        let mirror = (self.inner)(self.barrier * (self.barrier / x), t)?;
        let factor = (self.exponent * (x / self.barrier).ln()).exp();
        Ok(direct - factor * mirror)
    }
}

/// Wraps `u` in the image construction for barrier `barrier_level` and
/// drift `c`.
pub fn image_transform<F>(u: F, barrier_level: f64, c: f64, sigma: f64) -> Result<ImageSolution<F>>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    ensure_finite("barrier", barrier_level)?;
    ensure_finite("c", c)?;
    ensure_finite("sigma", sigma)?;
    if barrier_level <= 0.0 {
        return Err(PricingError::InvalidParams(format!(
            "barrier must be > 0, got {barrier_level}"
        )));
    }
    if sigma <= 0.0 {
        return Err(PricingError::InvalidParams(format!(
            "volatility must be > 0, got {sigma}"
        )));
    }
    Ok(ImageSolution {
        inner: u,
        barrier: barrier_level,
        exponent: 1.0 - 2.0 * c / (sigma * sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market() -> MarketParams {
        MarketParams::new(0.04, 0.01, 0.3).unwrap()
    }

    #[test]
    fn unit_claim_discounts() {
        let p = PowerBinaryParams::power_digital(0.0, 0.0, Direction::Above);
        let v = power_binary_price(120.0, 0.25, 1.25, &p, &market()).unwrap();
        assert!((v - (-0.04f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn forward_of_underlying() {
        // β = 1, no indicator: e^{−qτ}X.
        let p = PowerBinaryParams::power_digital(1.0, 0.0, Direction::Above);
        let v = power_binary_price(80.0, 0.0, 2.0, &p, &market()).unwrap();
        assert!((v - 80.0 * (-0.02f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cash_digital_matches_black_scholes() {
        let m = market();
        let (x, k, tau) = (100.0, 95.0, 0.75);
        let p = PowerBinaryParams::power_digital(0.0, k, Direction::Above);
        let v = power_binary_price(x, 0.0, tau, &p, &m).unwrap();
        let d2 = ((x / k).ln() + (0.04 - 0.01 - 0.045) * tau) / (0.3 * tau.sqrt());
        let expect = (-0.04 * tau).exp() * norm_cdf(d2).unwrap();
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn unbarriered_factor_reduction() {
        // β = 0, i = 0, L = 0, K = 1, r = 0, q = −c.
        let c = 0.07;
        let sigma = 0.4;
        let m = MarketParams::new(0.0, -c, sigma).unwrap();
        let p = PowerBinaryParams::power_digital(0.0, 1.0, Direction::Above);
        for &(x, t) in &[(0.5, 0.0), (1.3, 0.4), (3.0, 0.9)] {
            let v = power_binary_price(x, t, 1.0, &p, &m).unwrap();
            let tau: f64 = 1.0 - t;
            let arg = (f64::ln(x) + (c - 0.5 * sigma * sigma) * tau) / (sigma * tau.sqrt());
            assert!((v - norm_cdf(arg).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn direction_complement() {
        let m = market();
        let base = PowerBinaryParams {
            beta: 1.3,
            i: 1.0,
            inner_strike: 90.0,
            strike: 105.0,
            tau1: 0.5,
            tau2: 0.2,
            tau3: 0.5,
            direction: Direction::Above,
        };
        let above = power_binary_price(100.0, 0.1, 1.0, &base, &m).unwrap();
        let below = power_binary_price(
            100.0,
            0.1,
            1.0,
            &PowerBinaryParams {
                direction: Direction::Below,
                ..base
            },
            &m,
        )
        .unwrap();
        let all = power_binary_price(
            100.0,
            0.1,
            1.0,
            &PowerBinaryParams {
                strike: 0.0,
                ..base
            },
            &m,
        )
        .unwrap();
        assert!((above + below - all).abs() < 1e-10 * all.abs().max(1.0));
    }

    #[test]
    fn parameter_errors() {
        let m = market();
        let mut p = PowerBinaryParams::power_digital(0.0, 1.0, Direction::Above);
        assert!(matches!(
            power_binary_price(1.0, 1.0, 1.0, &p, &m),
            Err(PricingError::Domain(_))
        ));
        p.i = 1.0;
        assert!(matches!(
            power_binary_price(1.0, 0.0, 1.0, &p, &m),
            Err(PricingError::InvalidParams(_))
        ));
        let p = PowerBinaryParams {
            beta: 0.0,
            i: 0.0,
            inner_strike: 1.0,
            strike: 1.0,
            tau1: 0.0,
            tau2: 0.0,
            tau3: 0.0,
            direction: Direction::Above,
        };
        assert!(matches!(
            power_binary_price(1.0, 0.0, 1.0, &p, &m),
            Err(PricingError::Domain(_))
        ));
        let p = PowerBinaryParams::power_digital(0.0, 1.0, Direction::Above);
        assert!(power_binary_price(0.0, 0.0, 1.0, &p, &m).is_err());
        assert!(power_binary_price(f64::NAN, 0.0, 1.0, &p, &m).is_err());
    }

    #[test]
    fn tbvp_boundary_values() {
        let pb = BarrierProblemParams::new(0.04, 0.5, 2.0).unwrap();
        for &t in &[0.0, 0.7, 1.999] {
            assert_eq!(tbvp_w(1.0, t, &pb).unwrap(), 0.0);
        }
        assert_eq!(tbvp_w(f64::INFINITY, 0.0, &pb).unwrap(), 1.0);
        assert!((tbvp_w(1e12, 0.0, &pb).unwrap() - 1.0).abs() < 1e-12);
        assert!(tbvp_w(0.99, 0.0, &pb).is_err());
        assert!(tbvp_w(1.5, 2.0, &pb).is_err());
    }

    #[test]
    fn tbvp_large_exponent_no_overflow() {
        // c strongly negative makes 1 − 2c/σ² large.
        let pb = BarrierProblemParams::new(-0.5, 0.1, 1.0).unwrap();
        for &x in &[1.01, 2.0, 1e3, 1e200] {
            let w = tbvp_w(x, 0.0, &pb).unwrap();
            assert!(w.is_finite() && (0.0..=1.0).contains(&w), "x = {x}: {w}");
        }
    }

    #[test]
    fn image_of_constant_vanishes_at_barrier() {
        let sol = image_transform(|_x: f64, _t: f64| Ok(3.5), 80.0, 0.02, 0.25).unwrap();
        assert_eq!(sol.eval(80.0, 0.3).unwrap(), 0.0);
        assert!(sol.eval(0.0, 0.3).is_err());
        assert!(image_transform(|_x: f64, _t: f64| Ok(1.0), 0.0, 0.0, 0.2).is_err());
    }

    #[test]
    fn image_reproduces_tbvp() {
        let (c, sigma, horizon) = (0.04, 0.5, 1.5);
        let m = MarketParams::new(0.0, -c, sigma).unwrap();
        let p = PowerBinaryParams::power_digital(0.0, 1.0, Direction::Above);
        let u = move |x: f64, t: f64| power_binary_price(x, t, horizon, &p, &m);
        let w = image_transform(u, 1.0, c, sigma).unwrap();
        let pb = BarrierProblemParams::new(c, sigma, horizon).unwrap();
        for &x in &[1.0, 1.2, 2.0, 7.5] {
            for &t in &[0.0, 0.5, 1.4] {
                let a = w.eval(x, t).unwrap();
                let b = tbvp_w(x, t, &pb).unwrap();
                assert!((a - b).abs() < 1e-14, "x = {x} t = {t}: {a} vs {b}");
            }
        }
    }
}
