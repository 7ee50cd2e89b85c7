//! Solves the bond and put problems by finite differences and compares a
//! few points with the closed forms.

use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{bond_price, BondOption, BondSpec, OptionKind, OptionSpec};
use credit_pricer::oracles::{pde_bond_surface, pde_option_surface, GridSpec, Scheme};

fn main() -> credit_pricer::error::Result<()> {
    let market = MarketParams::new(0.04, 0.0, 0.5)?;
    let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7)?;
    let put = BondOption::new(bond, OptionSpec::new(1.0, 0.9, OptionKind::Put)?, market)?;

    for n in [201, 401, 801] {
        let grid = GridSpec::new(n, n - 1, 10.0, Scheme::CrankNicolson)?;
        let bonds = pde_bond_surface(&bond, &market, &grid)?;
        let puts = pde_option_surface(&put, &grid)?;
        let (v, t) = (199.0, 0.5);
        let b_err = (bonds.value_at(v, t)? - bond_price(v, t, &bond, &market)?).abs();
        let p_err = (puts.value_at(v, t)? - put.price(v, t)?).abs();
        println!("grid {n:>4}: |bond error| = {b_err:.2e}  |put error| = {p_err:.2e}");
    }
    Ok(())
}
