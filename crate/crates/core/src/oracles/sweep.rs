//! Random admissible parameter draws for cross-checks.

use rand::Rng;

use crate::closed_form::{Direction, MarketParams, PowerBinaryParams};
use crate::credit::{BondSpec, OptionKind, OptionSpec};
use crate::error::Result;

/// A power-binary claim together with the point at which it is priced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBinaryCase {
    pub x: f64,
    pub t: f64,
    pub maturity: f64,
    pub params: PowerBinaryParams,
    pub market: MarketParams,
}

impl PowerBinaryCase {
    pub fn tau(&self) -> f64 {
        self.maturity - self.t
    }
}

/// A credit bond with an embedded option and an evaluation point strictly
/// above the barrier and before option expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreditCase {
    pub bond: BondSpec,
    pub option: OptionSpec,
    pub market: MarketParams,
    pub v: f64,
    pub t: f64,
}

fn draw_market<R: Rng>(rng: &mut R) -> MarketParams {
    MarketParams::new(
        rng.gen_range(-0.01..0.10),
        rng.gen_range(0.0..0.06),
        rng.gen_range(0.1..0.7),
    )
    .expect("drawn market is valid")
}

/// `β ∈ [−3, 3]`, `i ∈ {−1, 0, 1, 2}`, strikes within a few standard
/// deviations of `X`, either direction.
pub fn draw_power_binary<R: Rng>(rng: &mut R) -> PowerBinaryCase {
    let market = draw_market(rng);
    let x: f64 = rng.gen_range(20.0..400.0);
    let maturity: f64 = rng.gen_range(0.1..3.0);
    let t = rng.gen_range(0.0..0.9) * maturity;
    let sd = market.sigma() * (maturity - t).sqrt();
    let i = [-1.0, 0.0, 1.0, 2.0][rng.gen_range(0..4)];
    let direction = if rng.gen_bool(0.5) {
        Direction::Above
    } else {
        Direction::Below
    };
    let strike = if direction == Direction::Above && rng.gen_bool(0.15) {
        0.0
    } else {
        x * (rng.gen_range(-2.0..2.0) * sd).exp()
    };
    let inner_strike = if i == 0.0 && rng.gen_bool(0.3) {
        0.0
    } else {
        let centre = if i == 0.0 { 1.0 } else { x.powf(i) };
        centre * (rng.gen_range(-1.5..1.5) * sd * i.abs().max(1.0)).exp()
    };
    let params = PowerBinaryParams {
        beta: rng.gen_range(-3.0..3.0),
        i,
        inner_strike,
        strike,
        tau1: rng.gen_range(0.0..2.0),
        tau2: rng.gen_range(-1.0..1.0),
        tau3: rng.gen_range(0.05..2.0),
        direction,
    };
    PowerBinaryCase {
        x,
        t,
        maturity,
        params,
        market,
    }
}

/// Bond, option and evaluation point with `a ≠ 0` in general and the
/// redemption amount strictly inside its admissible bracket.
pub fn draw_credit<R: Rng>(rng: &mut R) -> Result<CreditCase> {
    let market = draw_market(rng);
    let maturity: f64 = rng.gen_range(0.5..5.0);
    let bond = BondSpec::new(
        maturity,
        rng.gen_range(-0.1..0.1),
        rng.gen_range(50.0..150.0),
        rng.gen_range(0.0..0.9),
    )?;
    let expiry = rng.gen_range(0.2..0.9) * maturity;
    let discount = (-market.r() * (maturity - expiry)).exp();
    let lo = bond.recovery() * discount;
    let redemption = lo + rng.gen_range(0.05..0.95) * (discount - lo);
    let kind = if rng.gen_bool(0.5) {
        OptionKind::Put
    } else {
        OptionKind::Call
    };
    let option = OptionSpec::new(expiry, redemption, kind)?;
    let t = rng.gen_range(0.0..0.95) * expiry;
    let v = bond.barrier_at(t) * rng.gen_range(1.02f64..4.0);
    Ok(CreditCase {
        bond,
        option,
        market,
        v,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::power_binary_price;
    use crate::credit::BondOption;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let c = draw_power_binary(&mut rng);
            let p = power_binary_price(c.x, c.t, c.maturity, &c.params, &c.market).unwrap();
            assert!(p.is_finite());
            let c = draw_credit(&mut rng).unwrap();
            assert!(c.v > c.bond.barrier_at(c.t) && c.t < c.option.expiry());
            BondOption::new(c.bond, c.option, c.market).unwrap();
        }
    }
}
