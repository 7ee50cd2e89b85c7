//! Runs every cross-oracle and invariant check on the default parameter set.

use credit_pricer::cli::{cmd_verify, RunConfig, Suite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = cmd_verify(&RunConfig::default(), Suite::All)?;
    println!("{report}");
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
