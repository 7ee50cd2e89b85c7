//! Puttable and callable bond prices alongside the straight bond.

use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{
    bond_price, callable_bond_price, puttable_bond_price, BondSpec, OptionKind, OptionSpec,
};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.0, 0.5)?;
    let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7)?;
    let put = OptionSpec::new(1.0, 0.9, OptionKind::Put)?;
    let call = put.with_kind(OptionKind::Call);

    println!(
        "{:>6} {:>5} {:>12} {:>12} {:>12}",
        "V", "t", "B", "B+P", "B-C"
    );
    for t in [0.0, 0.5, 1.0, 1.5] {
        for v in [139.0, 199.0, 300.0] {
            let b = bond_price(v, t, &bond, &market)?;
            let pb = puttable_bond_price(v, t, &bond, &put, &market)?;
            let cb = callable_bond_price(v, t, &bond, &call, &market)?;
            println!("{v:>6} {t:>5} {b:>12.8} {pb:>12.8} {cb:>12.8}");
        }
    }
    Ok(())
}
