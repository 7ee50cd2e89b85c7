use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use credit_pricer::cli::{
    cmd_boundary, cmd_curves, cmd_price, cmd_verify, resolve_seed, CliError, PriceTarget,
    RunConfig, Suite, SEED_ENV,
};

/// Defaultable bonds and bond options under a structural firm-value model.
#[derive(Parser)]
#[command(name = "credit-pricer", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; the built-in default is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (reports) or directory (curves).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides numerics.seed and the environment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Firm values to price at, overriding query.v.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    v: Option<Vec<f64>>,
    /// Times to price at, overriding query.t.
    #[arg(long, global = true, value_delimiter = ',')]
    t: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    PriceBond,
    PriceOption,
    PricePuttable,
    PriceCallable,
    Boundary,
    Curves {
        /// Figure number; all five when absent.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        figure: Option<u8>,
        #[arg(long)]
        samples: Option<usize>,
    },
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Prints the effective configuration as JSON.
    Config,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    config.numerics.seed = resolve_seed(args.seed, env.as_deref(), config.numerics.seed)?;
    if let Some(v) = args.v {
        config.query.v = v;
    }
    if let Some(t) = args.t {
        config.query.t = t;
    }
    let out = args.out.as_ref();
    match args.command {
        Command::PriceBond => emit(&cmd_price(&config, PriceTarget::Bond)?, out),
        Command::PriceOption => emit(&cmd_price(&config, PriceTarget::Option)?, out),
        Command::PricePuttable => emit(&cmd_price(&config, PriceTarget::Puttable)?, out),
        Command::PriceCallable => emit(&cmd_price(&config, PriceTarget::Callable)?, out),
        Command::Boundary => emit(&cmd_boundary(&config)?, out),
        Command::Config => emit(&(config.to_json() + "\n"), out),
        Command::Curves { figure, samples } => {
            if let Some(n) = samples {
                config.curves.samples = n;
            }
            let figures: Vec<u8> = figure.map_or_else(|| (1..=5).collect(), |f| vec![f]);
            let dir = out.cloned().unwrap_or_else(|| PathBuf::from("."));
            for path in cmd_curves(&config, &figures, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = cmd_verify(&config, suite)?;
            emit(&format!("{report}\n"), out)?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "{} of {} checks failed",
                    report.failures(),
                    report.checks.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
