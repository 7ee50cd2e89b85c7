//! Prices a few power-binary claims in closed form and checks one against
//! Green's-function quadrature.

use credit_pricer::closed_form::{power_binary_price, Direction, MarketParams, PowerBinaryParams};
use credit_pricer::oracles::{quadrature_green, QuadTolerance};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.01, 0.3)?;
    let (x, t, maturity) = (100.0, 0.0, 1.0);

    // Cash digital, asset digital and a squared-asset claim.
    for (beta, label) in [
        (0.0, "cash digital"),
        (1.0, "asset digital"),
        (2.0, "X^2 above K"),
    ] {
        let p = PowerBinaryParams::power_digital(beta, 105.0, Direction::Above);
        let price = power_binary_price(x, t, maturity, &p, &market)?;
        println!("{label:<14} {price:.10}");
    }

    // A claim whose payoff carries a normal-CDF factor.
    let p = PowerBinaryParams {
        beta: 1.0,
        i: 1.0,
        inner_strike: 95.0,
        strike: 90.0,
        tau1: 0.5,
        tau2: 0.25,
        tau3: 0.5,
        direction: Direction::Above,
    };
    let closed = power_binary_price(x, t, maturity, &p, &market)?;
    let quad = quadrature_green(x, maturity - t, &p, &market, QuadTolerance::default())?;
    println!("closed form    {closed:.12}");
    println!("quadrature     {quad:.12}");
    println!("relative gap   {:.2e}", (closed - quad).abs() / quad.abs());
    Ok(())
}
