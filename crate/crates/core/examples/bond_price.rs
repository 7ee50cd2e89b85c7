//! Survival probability and price of a defaultable zero-coupon bond across
//! firm values and times.

use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{bond_price, survival_probability, BondSpec};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.0, 0.5)?;
    let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7)?;

    println!("{:>8} {:>6} {:>12} {:>12}", "V", "t", "W", "B");
    for t in [0.0, 0.5, 1.0, 1.5] {
        for v in [110.0, 139.0, 199.0, 300.0] {
            let w = survival_probability(v, t, &bond, &market)?;
            let b = bond_price(v, t, &bond, &market)?;
            println!("{v:>8} {t:>6} {w:>12.8} {b:>12.8}");
        }
    }

    // A barrier that grows toward maturity.
    let rising = BondSpec::new(2.0, 0.03, 100.0, 0.7)?;
    println!(
        "a = 0.03: V_b(0) = {:.4}, B(150, 0) = {:.8}",
        rising.barrier_at(0.0),
        bond_price(150.0, 0.0, &rising, &market)?
    );
    Ok(())
}
