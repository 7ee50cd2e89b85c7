//! Simulates the bond and a puttable bond under a growing barrier and
//! compares with the closed forms.

use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{
    bond_price, composite_price, BondOption, BondSpec, OptionKind, OptionSpec,
};
use credit_pricer::oracles::{mc_barrier_price, McSpec, MovingBarrier};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.0, 0.5)?;
    let bond = BondSpec::new(2.0, 0.02, 100.0, 0.7)?;
    let option = OptionSpec::new(1.0, 0.9, OptionKind::Put)?;
    let put = BondOption::new(bond, option, market)?;
    let barrier = MovingBarrier {
        growth: bond.barrier_growth(),
        level: bond.barrier_level(),
        maturity: bond.maturity(),
    };
    let rebate = |t: f64| 0.7 * (-0.04 * (2.0 - t)).exp();

    for bridge in [false, true] {
        let mc = McSpec::new(100_000, 100, 7)?.with_bridge_correction(bridge);
        let v = 180.0;
        let b = mc_barrier_price(|_| 1.0, rebate, 2.0, barrier, &market, &mc, v)?;
        let payoff = |x: f64| bond_price(x, 1.0, &bond, &market).map_or(f64::NAN, |b| b.max(0.9));
        let pb = mc_barrier_price(payoff, rebate, 1.0, barrier, &market, &mc, v)?;
        let (cb, cpb) = (
            bond_price(v, 0.0, &bond, &market)?,
            composite_price(v, 0.0, &put)?,
        );
        println!("bridge correction {bridge}");
        println!(
            "  bond     closed {cb:.6}  mc {:.6} ± {:.1e}  z = {:.2}",
            b.estimate,
            b.std_error,
            b.z_score(cb)
        );
        println!(
            "  puttable closed {cpb:.6}  mc {:.6} ± {:.1e}  z = {:.2}",
            pb.estimate,
            pb.std_error,
            pb.z_score(cpb)
        );
    }
    Ok(())
}
