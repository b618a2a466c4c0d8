//! Experiment driver for the funcest estimators. Every subcommand is
//! reproducible: rerunning with the same configuration and seed produces
//! byte-identical output files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use funcest_cli::commands::{self, CommonArgs};
use funcest_cli::table::OutputFormat;
use funcest_cli::CliError;

#[derive(Parser)]
#[command(
    name = "funcest",
    version,
    about = "Sparse estimation of precision-matrix functionals for time series: simulators, tuning, prediction, allocation and classification experiments"
)]
struct Cli {
    /// JSON experiment configuration; flags override config keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for replicate-level parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output file; written in the selected format (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, default_value = "csv")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from a randomly built linear-process model.
    Simulate,
    /// Solve the band-constrained estimate for a covariance/target pair.
    Estimate {
        /// CSV matrix holding the covariance estimate.
        #[arg(long)]
        s_csv: Option<PathBuf>,
        /// CSV vector holding the target.
        #[arg(long)]
        b_csv: Option<PathBuf>,
        /// Band half-width.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Replicated band-width selection (oracle and block data splitting).
    Tune,
    /// Replicated one-step prediction relative risks.
    Predict,
    /// Information-ratio tuned rolling backtest (synthetic or CSV returns).
    Portfolio,
    /// Two-class block-design classification (synthetic or CSV data).
    Classify,
    /// Print the theoretical convergence rate for a dependence/tail regime.
    Rates {
        /// subgaussian | exponential | polynomial.
        #[arg(long)]
        regime: Option<String>,
        /// Sub-exponential tail exponent (> 1/2).
        #[arg(long)]
        alpha: Option<f64>,
        /// Polynomial moment order (> 4).
        #[arg(long)]
        q: Option<f64>,
        /// Dependence index (> 1/2).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        /// Convergence rate of the plug-in target estimate (0 if observed).
        #[arg(long)]
        r_b: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Validation("workers: must be positive".into()));
        }
        // Replicate-to-worker assignment is deterministic given the seed, so
        // the pool size affects speed only.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let format = OutputFormat::parse(&cli.format).ok_or_else(|| {
        CliError::Validation(format!("format: unknown value {:?} (expected csv | json)", cli.format))
    })?;
    let common = CommonArgs { seed: cli.seed, out: cli.out.clone(), format };
    let config = cli.config.as_deref();

    match cli.command {
        Command::Simulate => commands::cmd_simulate(config, &common),
        Command::Estimate { s_csv, b_csv, lambda } => {
            commands::cmd_estimate(config, s_csv, b_csv, lambda, &common)
        }
        Command::Tune => commands::cmd_tune(config, &common),
        Command::Predict => commands::cmd_predict(config, &common),
        Command::Portfolio => commands::cmd_portfolio(config, &common),
        Command::Classify => commands::cmd_classify(config, &common),
        Command::Rates { regime, alpha, q, beta, n, p, r_b } => {
            commands::cmd_rates(config, regime, alpha, q, beta, n, p, r_b, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            match err {
                CliError::Validation(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}
