//! Put and call options on the defaultable bond, priced by the direct
//! formula and by composing power-binary claims.

use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{BondOption, BondSpec, OptionKind, OptionSpec};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.0, 0.5)?;
    let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7)?;
    let option = OptionSpec::new(1.0, 0.9, OptionKind::Put)?;
    let put = BondOption::new(bond, option, market)?;
    let call = BondOption::new(bond, option.with_kind(OptionKind::Call), market)?;
    println!("boundary K = {:.6}", put.boundary());

    println!(
        "{:>6} {:>5} {:>14} {:>14} {:>10}",
        "V", "t", "put", "call", "gap"
    );
    for t in [0.0, 0.5, 0.9] {
        for v in [139.0, 199.0, 300.0] {
            let p = put.price(v, t)?;
            let c = call.price(v, t)?;
            let gap = (put.price_literal(v, t)? - put.price_compositional(v, t)?).abs();
            println!("{v:>6} {t:>5} {p:>14.10} {c:>14.10} {gap:>10.1e}");
        }
    }
    Ok(())
}
