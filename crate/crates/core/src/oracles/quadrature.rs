//! Globally adaptive Gauss-Kronrod (7/15) quadrature and the Green's-function
//! integral of the power-binary terminal value problem.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::closed_form::{Direction, MarketParams, PowerBinaryParams};
use crate::error::{ensure_finite, PricingError, Result};
use crate::special::{delta_from_log, norm_cdf};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Window half-width, in standard deviations of `ln z`, kept by
/// [`quadrature_green`].
pub const GREEN_WINDOW_SD: f64 = 14.0;

const SCAN_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(PricingError::Numerical(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over the finite interval `[a, b]`, bisecting the segment
/// with the largest error estimate until the total estimate drops below
/// `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: QuadTolerance) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    ensure_finite("lower limit", a)?;
    ensure_finite("upper limit", b)?;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, lo, hi)?;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    while error > tol.abs.max(tol.rel * value.abs()) {
        if heap.len() >= tol.max_intervals {
            return Err(PricingError::Numerical(format!(
                "quadrature did not converge: error estimate {error:e} after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&f, worst.a, mid)?;
        let right = kronrod(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if (mid - worst.a).abs() <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            return Err(PricingError::Numerical(
                "quadrature bisection reached machine precision".into(),
            ));
        }
    }
    // Re-sum to shed the drift of the running totals.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value: sign * value,
        error,
        intervals: heap.len(),
    })
}

/// Value at `X` with `tau` to maturity of the power-binary claim, computed by
/// integrating its payoff against the lognormal transition density in
/// `u = ln(z/X)`.
pub fn quadrature_green(
    x: f64,
    tau: f64,
    params: &PowerBinaryParams,
    market: &MarketParams,
    tol: QuadTolerance,
) -> Result<f64> {
    ensure_finite("X", x)?;
    ensure_finite("tau", tau)?;
    if x <= 0.0 {
        return Err(PricingError::Domain(format!("X must be > 0, got {x}")));
    }
    if tau <= 0.0 {
        return Err(PricingError::Domain(format!("tau must be > 0, got {tau}")));
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
    if inner_strike > 0.0 && !(tau3 > 0.0) {
        return Err(PricingError::Domain(format!(
            "payoff normal factor needs tau3 > 0, got {tau3}"
        )));
    }
    if inner_strike == 0.0 && i != 0.0 {
        return Err(PricingError::InvalidParams(
            "inner strike L = 0 requires i = 0".into(),
        ));
    }

    let sigma = market.sigma();
    let sd = sigma * tau.sqrt();
    let mean = (market.r() - market.q() - 0.5 * sigma * sigma) * tau;
    // e^{βu}·exp(−(u − mean)²/2sd²) peaks at `peak` with log-height `log_peak`.
    let peak = mean + beta * sd * sd;
    let log_peak = beta * mean + 0.5 * beta * beta * sd * sd;

    let mut lo = peak - GREEN_WINDOW_SD * sd;
    let mut hi = peak + GREEN_WINDOW_SD * sd;
    let log_strike = (strike / x).ln();
    match direction {
        Direction::Above => lo = lo.max(log_strike),
        Direction::Below => hi = hi.min(log_strike),
    }
    if !(lo < hi) {
        return Ok(0.0);
    }

    let log_x = x.ln();
    let log_norm = -(sd * (2.0 * std::f64::consts::PI).sqrt()).ln();
    // Log of the integrand relative to the tilted Gaussian peak.
    let log_integrand = |u: f64| -> Result<f64> {
        let log_gauss = beta * u - (u - mean).powi(2) / (2.0 * sd * sd) - log_peak;
        let log_normal = if inner_strike == 0.0 {
            0.0
        } else {
            let arg = delta_from_log(
                i * (log_x + u) - inner_strike.ln(),
                tau1,
                tau2,
                tau3,
                market,
            )?;
            norm_cdf(arg)?.ln()
        };
        Ok(log_gauss + log_normal)
    };
    // Rescale by the integrand's own maximum so the absolute tolerance is
    // meaningful even when the normal factor is tiny across the window.
    let mut log_max = f64::NEG_INFINITY;
    for k in 0..=SCAN_POINTS {
        let u = lo + (hi - lo) * k as f64 / SCAN_POINTS as f64;
        log_max = log_max.max(log_integrand(u)?);
    }
    if log_max == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let integrand = |u: f64| -> Result<f64> { Ok((log_integrand(u)? - log_max).exp()) };
    let integral = integrate(integrand, lo, hi, tol)?;
    let scale = (-market.r() * tau + beta * log_x + log_peak + log_max + log_norm).exp();
    Ok(scale * integral.value)
}
