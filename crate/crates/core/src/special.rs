//! Standard-normal distribution functions and the `δ`/`μ` helpers every
//! closed form in this crate is assembled from.
//!
//! Both CDFs accept `±∞` as ordinary inputs. NaN is rejected with
//! [`PricingError::Domain`] instead of being propagated.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::closed_form::MarketParams;
use crate::error::{ensure_not_nan, PricingError, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Correlation coefficient of a standard bivariate normal pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_nan() || !(-1.0..=1.0).contains(&rho) {
            return Err(PricingError::Domain(format!(
                "correlation must lie in [-1, 1], got {rho}"
            )));
        }
        Ok(Self(rho))
    }

    /// Clamps a value that is mathematically in `[-1, 1]` but may have
    /// drifted out by a rounding error.
    pub(crate) fn saturating(rho: f64) -> Result<Self> {
        ensure_not_nan("correlation", rho)?;
        Self::new(rho.clamp(-1.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Neg for Correlation {
    type Output = Correlation;

    fn neg(self) -> Self::Output {
        Correlation(-self.0)
    }
}

/// Arguments of `δ(Xⁱ/L, τ₁, τ₂, τ₃)`.
///
/// `ratio` is the already-formed `Xⁱ/L`. The `L = 0` convention is
/// expressed by `ratio = +∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaArgs {
    ratio: f64,
    tau1: f64,
    tau2: f64,
    tau3: f64,
}

impl DeltaArgs {
    pub fn new(ratio: f64, tau1: f64, tau2: f64, tau3: f64) -> Result<Self> {
        ensure_not_nan("ratio", ratio)?;
        if ratio <= 0.0 {
            return Err(PricingError::Domain(format!(
                "ratio must be > 0, got {ratio}"
            )));
        }
        crate::error::ensure_finite("tau1", tau1)?;
        crate::error::ensure_finite("tau2", tau2)?;
        crate::error::ensure_finite("tau3", tau3)?;
        if tau3 <= 0.0 {
            return Err(PricingError::Domain(format!(
                "tau3 must be > 0, got {tau3}"
            )));
        }
        Ok(Self {
            ratio,
            tau1,
            tau2,
            tau3,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn tau3(&self) -> f64 {
        self.tau3
    }
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / TWO_PI.sqrt()
}

/// Standard normal CDF `Φ(x)`, exact at `±∞`.
pub fn norm_cdf(x: f64) -> Result<f64> {
    ensure_not_nan("norm_cdf argument", x)?;
    Ok(phi(x))
}

// Low part of 1/√2: FRAC_1_SQRT_2 + SQRT_HALF_LO = 1/√2 to ~1e-33.
const SQRT_HALF_LO: f64 = -4.833646656726456518593584929348329e-17;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

// Φ(x) = erfc(z)/2 with z = −x/√2. The rounding error `dz` of z is
// x²·ε relative in the tail, so it is fed back through erfc'(z).
#[inline]
fn phi(x: f64) -> f64 {
    let z = -x * FRAC_1_SQRT_2;
    if !z.is_finite() {
        return 0.5 * libm::erfc(z);
    }
    let dz = (-x).mul_add(FRAC_1_SQRT_2, -z) - x * SQRT_HALF_LO;
    0.5 * (libm::erfc(z) - FRAC_2_SQRT_PI * (-z * z).exp() * dz)
}

/// Bivariate standard normal CDF `N₂(a₁, a₂; ρ) = P(X ≤ a₁, Y ≤ a₂)`.
pub fn binorm_cdf(a1: f64, a2: f64, corr: Correlation) -> Result<f64> {
    ensure_not_nan("binorm_cdf a1", a1)?;
    ensure_not_nan("binorm_cdf a2", a2)?;
    let rho = corr.value();
    if a1 == f64::NEG_INFINITY || a2 == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if a1 == f64::INFINITY {
        return Ok(phi(a2));
    }
    if a2 == f64::INFINITY {
        return Ok(phi(a1));
    }
    if rho == 1.0 {
        return Ok(phi(a1.min(a2)));
    }
    if rho == -1.0 {
        return Ok((phi(a1) + phi(a2) - 1.0).max(0.0));
    }
    if rho == 0.0 {
        return Ok(phi(a1) * phi(a2));
    }
    Ok(bvn_upper(-a1, -a2, rho))
}

// Gauss-Legendre abscissae (positive half) and weights for n = 6, 12, 20.
const GL6: [(f64, f64); 3] = [
    (0.9324695142031522, 0.1713244923791705),
    (0.6612093864662647, 0.3607615730481384),
    (0.2386191860831970, 0.4679139345726904),
];

const GL12: [(f64, f64); 6] = [
    (0.9815606342467191, 0.04717533638651177),
    (0.9041172563704750, 0.1069393259953183),
    (0.7699026741943050, 0.1600783285433464),
    (0.5873179542866171, 0.2031674267230659),
    (0.3678314989981802, 0.2334925365383547),
    (0.1252334085114692, 0.2491470458134029),
];

const GL20: [(f64, f64); 10] = [
    (0.9931285991850949, 0.01761400713915212),
    (0.9639719272779138, 0.04060142980038694),
    (0.9122344282513259, 0.06267204833410906),
    (0.8391169718222188, 0.08327674157670475),
    (0.7463319064601508, 0.1019301198172404),
    (0.6360536807265150, 0.1181945319615184),
    (0.5108670019508271, 0.1316886384491766),
    (0.3737060887154196, 0.1420961093183821),
    (0.2277858511416451, 0.1491729864726037),
    (0.07652652113349733, 0.1527533871307259),
];

fn gauss_legendre_for(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL6
    } else if rho_abs < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// `P(X > h, Y > k)` for finite `h`, `k` and `0 < |r| < 1`.
///
/// Drezner-Wesolowsky with Genz's double-precision refinements. Only `k`
/// is reflected for negative `r` in the high-correlation branch; reflecting
/// both limits loses accuracy for `r <= -0.925`.
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let nodes = gauss_legendre_for(r.abs());
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = 0.5 * r.asin();
        for &(x, w) in nodes {
            for s in [1.0 - x, 1.0 + x] {
                let sn = (asr * s).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / TWO_PI + phi(-h) * phi(-k);
        return bvn.clamp(0.0, 1.0);
    }

    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_sq = (1.0 - r) * (1.0 + r);
        let a = a_sq.sqrt();
        let b_sq = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 80.0;
        let asr = -0.5 * (b_sq / a_sq + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq) / 3.0 + c * d * a_sq * a_sq);
        }
        if hk > -100.0 {
            let b = b_sq.sqrt();
            let sp = TWO_PI.sqrt() * phi(-b / a);
            bvn -= (-0.5 * hk).exp() * sp * b * (1.0 - c * b_sq * (1.0 - d * b_sq) / 3.0);
        }
        let half_a = 0.5 * a;
        let mut acc = 0.0;
        for &(x, w) in nodes {
            for s in [1.0 - x, 1.0 + x] {
                let xs = (half_a * s).powi(2);
                let asr = -0.5 * (b_sq / xs + hk);
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-0.5 * hk * xs / (1.0 + rs).powi(2)).exp() / rs;
                    acc += w * asr.exp() * (sp - ep);
                }
            }
        }
        bvn = (half_a * acc - bvn) / TWO_PI;
    }
    if r > 0.0 {
        bvn += phi(-h.max(k));
    } else if h >= k {
        bvn = -bvn;
    } else {
        let l = if h < 0.0 {
            phi(k) - phi(h)
        } else {
            phi(-h) - phi(-k)
        };
        bvn = l - bvn;
    }
    bvn.clamp(0.0, 1.0)
}

/// `δ(Xⁱ/L, τ₁, τ₂, τ₃) = [ln(Xⁱ/L) + (r − q − σ²/2)τ₁ + σ²τ₂] / (σ√τ₃)`.
///
/// Returns `+∞` for `ratio = +∞`.
pub fn delta(args: DeltaArgs, market: &MarketParams) -> Result<f64> {
    delta_from_log(args.ratio.ln(), args.tau1, args.tau2, args.tau3, market)
}

/// `δ` taking `ln(ratio)` directly; infinite logs map to `±∞`.
pub(crate) fn delta_from_log(
    log_ratio: f64,
    tau1: f64,
    tau2: f64,
    tau3: f64,
    market: &MarketParams,
) -> Result<f64> {
    ensure_not_nan("log ratio", log_ratio)?;
    if tau3 <= 0.0 || tau3.is_nan() {
        return Err(PricingError::Domain(format!(
            "tau3 must be > 0, got {tau3}"
        )));
    }
    if log_ratio.is_infinite() {
        return Ok(log_ratio);
    }
    let sigma = market.sigma();
    let drift = market.r() - market.q() - 0.5 * sigma * sigma;
    let value = (log_ratio + drift * tau1 + sigma * sigma * tau2) / (sigma * tau3.sqrt());
    ensure_not_nan("delta", value)?;
    Ok(value)
}

/// `μ(β) = −r + β[r − q − σ²(1 − β)/2]`.
pub fn mu(beta: f64, market: &MarketParams) -> f64 {
    let sigma_sq = market.sigma() * market.sigma();
    -market.r() + beta * (market.r() - market.q() - 0.5 * sigma_sq * (1.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market(r: f64, q: f64, sigma: f64) -> MarketParams {
        MarketParams::new(r, q, sigma).unwrap()
    }

    fn corr(rho: f64) -> Correlation {
        Correlation::new(rho).unwrap()
    }

    // Composite Gauss-Legendre (20 nodes per panel) of the density on
    // [x_lo, x] with compensated summation; independent of erfc. Upper
    // half-line values go through 1 − ∫_x^∞.
    fn density_integral(x_lo: f64, x: f64, panels: usize) -> f64 {
        if x > 0.0 {
            return 1.0 - density_integral(x_lo, -x, panels);
        }
        let h = (x - x_lo) / panels as f64;
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for p in 0..panels {
            let mid = x_lo + (p as f64 + 0.5) * h;
            for &(node, w) in &GL20 {
                for s in [-node, node] {
                    let y = 0.5 * h * w * norm_pdf(mid + 0.5 * h * s) - carry;
                    let next = sum + y;
                    carry = (next - sum) - y;
                    sum = next;
                }
            }
        }
        sum
    }

    #[test]
    fn norm_cdf_reference_points() {
        assert_eq!(norm_cdf(0.0).unwrap(), 0.5);
        assert_eq!(norm_cdf(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(norm_cdf(f64::NEG_INFINITY).unwrap(), 0.0);
        // Φ(1.959963985) by quadrature of the density from -40.
        let oracle = density_integral(-40.0, 1.959963985, 400);
        assert!((oracle - 0.975).abs() < 1e-9);
        assert!((norm_cdf(1.959963985).unwrap() - oracle).abs() < 1e-15);
    }

    // 50-digit quadrature of the density, φ(x)∫₀^∞ e^{xs − s²/2} ds, mirrored
    // for x > 0.
    const PHI_REFERENCE: [(f64, f64); 16] = [
        (-37.5, 4.6053530095819548438e-308),
        (-20.0, 2.7536241186062336951e-89),
        (-8.5, 9.4795348222033183542e-18),
        (-5.0, 2.8665157187919391167e-7),
        (-3.2, 6.8713793791584803162e-4),
        (-1.959963985, 2.4999999973118443042e-2),
        (-0.7, 0.24196365222307302862),
        (-0.1, 0.46017216272297101633),
        (0.0, 0.5),
        (0.25, 0.59870632568292372424),
        (1.0, 0.84134474606854294859),
        (1.959963985, 0.97500000002688155696),
        (2.5, 0.99379033467422386483),
        (4.4, 0.99999458745609229615),
        (7.0, 0.99999999999872018746),
        (9.0, 0.99999999999999999989),
    ];

    #[test]
    fn norm_cdf_against_high_precision_reference() {
        for &(x, expect) in &PHI_REFERENCE {
            let got = norm_cdf(x).unwrap();
            assert!((got - expect).abs() <= 1e-15, "x = {x}: {got} vs {expect}");
            if expect < 1e-3 && expect > 1e-300 {
                assert!(
                    (got - expect).abs() <= 1e-14 * expect,
                    "relative, x = {x}: {got:e}"
                );
            }
        }
    }

    #[test]
    fn norm_cdf_matches_density_quadrature() {
        // f64 Gauss-Legendre carries its own ~1e-15 rounding floor.
        for i in -80..=80 {
            let x = i as f64 * 0.1;
            let oracle = density_integral(-40.0, x, 400);
            assert!(
                (norm_cdf(x).unwrap() - oracle).abs() < 3e-15,
                "x = {x}: {} vs {oracle}",
                norm_cdf(x).unwrap()
            );
            assert!((norm_cdf(x).unwrap() + norm_cdf(-x).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nan_is_rejected() {
        assert!(matches!(norm_cdf(f64::NAN), Err(PricingError::Domain(_))));
        assert!(binorm_cdf(f64::NAN, 0.0, corr(0.2)).is_err());
        assert!(binorm_cdf(0.0, f64::NAN, corr(0.2)).is_err());
        assert!(Correlation::new(f64::NAN).is_err());
    }

    #[test]
    fn correlation_range() {
        assert!(Correlation::new(1.0).is_ok());
        assert!(Correlation::new(-1.0).is_ok());
        assert!(Correlation::new(1.0 + 1e-15).is_err());
        assert!(Correlation::new(-1.5).is_err());
        assert_eq!(Correlation::saturating(1.0 + 1e-16).unwrap().value(), 1.0);
    }

    #[test]
    fn binorm_reductions() {
        let v = binorm_cdf(f64::INFINITY, 0.7, corr(0.5)).unwrap();
        assert_eq!(v, norm_cdf(0.7).unwrap());
        assert_eq!(binorm_cdf(0.0, 0.0, corr(0.0)).unwrap(), 0.25);
        assert_eq!(
            binorm_cdf(0.3, -0.4, corr(1.0)).unwrap(),
            norm_cdf(-0.4).unwrap()
        );
        let anti = binorm_cdf(0.3, 0.4, corr(-1.0)).unwrap();
        let expect = (norm_cdf(0.3).unwrap() + norm_cdf(0.4).unwrap() - 1.0).max(0.0);
        assert_eq!(anti, expect);
        assert_eq!(binorm_cdf(-0.3, -0.4, corr(-1.0)).unwrap(), 0.0);
        assert_eq!(binorm_cdf(f64::NEG_INFINITY, 2.0, corr(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn binorm_zero_at_zero_correlation_limit() {
        // Orthant probability P(X<0, Y<0) = 1/4 + asin(ρ)/(2π).
        for &rho in &[-0.99, -0.95, -0.9, -0.5, -0.1, 0.1, 0.5, 0.8, 0.93, 0.999] {
            let got = binorm_cdf(0.0, 0.0, corr(rho)).unwrap();
            let expect = 0.25 + rho.asin() / TWO_PI;
            assert!(
                (got - expect).abs() < 1e-14,
                "rho = {rho}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn delta_examples() {
        let m = market(0.04, 0.0, 0.5);
        let d = delta(DeltaArgs::new(1.0, 0.0, 0.0, 1.0).unwrap(), &m).unwrap();
        assert_eq!(d, 0.0);
        let d = delta(
            DeltaArgs::new(std::f64::consts::E, 0.0, 0.0, 1.0).unwrap(),
            &market(0.01, 0.02, 1.0),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        // (ln 1.39 + (0.04 - 0.125)·2) / (0.5·√2):
        // ln 1.39 = 0.3293037471426004, numerator = 0.1593037471426004,
        // denominator = 0.7071067811865476.
        let d = delta(DeltaArgs::new(139.0 / 100.0, 2.0, 0.0, 2.0).unwrap(), &m).unwrap();
        assert!((d - 0.2252895197459195).abs() < 1e-15, "{d}");
        let inf = delta(DeltaArgs::new(f64::INFINITY, 1.0, 0.0, 1.0).unwrap(), &m).unwrap();
        assert_eq!(inf, f64::INFINITY);
    }

    #[test]
    fn delta_args_validation() {
        assert!(DeltaArgs::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(DeltaArgs::new(-2.0, 1.0, 0.0, 1.0).is_err());
        assert!(DeltaArgs::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(DeltaArgs::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn mu_examples() {
        let m = market(0.05, 0.02, 0.3);
        assert_eq!(mu(0.0, &m), -0.05);
        assert!((mu(1.0, &m) + 0.02).abs() < 1e-16);
        // Shifted dividend q + a with β = 1 − 2(r − q − a)/σ² gives −r.
        let a = 0.015;
        let shifted = market(0.05, 0.02 + a, 0.3);
        let beta = 1.0 - 2.0 * (0.05 - 0.02 - a) / 0.09;
        assert!((mu(beta, &shifted) + 0.05).abs() < 1e-15);
    }

    #[test]
    fn density_plus_xi_cdf_positive() {
        for i in 0..=2000 {
            let xi = -10.0 + i as f64 * 0.01;
            let g = norm_pdf(xi) + xi * norm_cdf(xi).unwrap();
            assert!(g > 0.0, "xi = {xi}: {g}");
        }
    }
}
