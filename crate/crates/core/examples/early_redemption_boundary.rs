//! Solves for the firm value at which the bond is worth its redemption
//! price at option expiry.

use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{
    bond_price, early_redemption_boundary, BondSpec, OptionKind, OptionSpec,
};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.0, 0.5)?;
    let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7)?;

    for e in [0.8, 0.85, 0.9, 0.95] {
        let option = OptionSpec::new(1.0, e, OptionKind::Put)?;
        let k = early_redemption_boundary(&bond, &option, &market, 1e-10)?;
        let check = bond_price(k.k, 1.0, &bond, &market)?;
        println!(
            "E = {e:<5} K = {:>12.6}  B(K, T1) = {check:.10}  iterations = {}",
            k.k, k.iterations
        );
    }

    let low = OptionSpec::new(1.0, 0.5, OptionKind::Put)?;
    if let Err(e) = low.validate_against(&bond, &market) {
        println!("E = 0.5 rejected: {e}");
    }
    Ok(())
}
