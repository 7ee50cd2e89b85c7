//! Writes the five figure CSVs for the default parameter set into a
//! temporary directory and prints a few samples of each.

use credit_pricer::cli::{build_figure, cmd_curves, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::default();
    let dir = std::env::temp_dir().join("credit-pricer-figures");
    for path in cmd_curves(&config, &[1, 2, 3, 4, 5], &dir)? {
        println!("wrote {}", path.display());
    }
    for number in 1..=5 {
        let fig = build_figure(&config, number)?;
        println!("figure {number}: {}", fig.title);
        for curve in &fig.curves {
            let first = curve.points[0];
            let last = curve.points[curve.points.len() - 1];
            println!(
                "  {:<12} {}={:.3}: {:.6}  ...  {}={:.3}: {:.6}",
                curve.ordinate_name,
                curve.abscissa_name,
                first.0,
                first.1,
                curve.abscissa_name,
                last.0,
                last.1
            );
        }
    }
    Ok(())
}
