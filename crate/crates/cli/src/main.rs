//! `vcausal`: exit 0 when every check passes, 1 when a check fails or a
//! computation errors, 2 on usage errors and unreadable inputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vcausal_cli::battery::BatteryArgs;
use vcausal_cli::optimize::OptimizeArgs;
use vcausal_cli::project::ProjectArgs;
use vcausal_cli::reproduce::ReproduceArgs;
use vcausal_cli::{battery, certify, optimize, project, reproduce, spacetime, Outcome, UsageError};
use vcausal_core::optimizer::SearchConfig;

#[derive(Parser)]
#[command(name = "vcausal", version, about = "Checks and searches for hidden-influence models of tripartite correlations")]
struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate S on a state and measurements (the shipped ones by default),
    /// with the non-signaling deficit and AB locality. Exit 1 unless S < -2,
    /// the deficit is at most 1e-10 and the AB marginal is local.
    Reproduce {
        #[arg(long, requires = "measurements")]
        state: Option<PathBuf>,
        #[arg(long, requires = "state")]
        measurements: Option<PathBuf>,
    },
    /// Check I = S + 2 exactly and bound S by exact LP over the
    /// hidden-influence and non-signaling polytopes. Exit 1 if the identity
    /// fails, a certificate fails, the HI minimum is not -2 or the NS minimum
    /// is not below -2.
    Certify,
    /// Decide whether conditioned locality constrains the pair marginals
    /// beyond non-signaling, row by row. Exit 0 once every row is reported.
    Battery {
        /// Scenario in bracket notation; repeatable. Defaults to the three
        /// desk-scale rows.
        #[arg(long = "row")]
        rows: Vec<String>,
        /// Also attempt the larger rows (may run for hours).
        #[arg(long)]
        all: bool,
        /// Random LP directions to try when a projection exceeds its size guard.
        #[arg(long, default_value_t = 0)]
        directions: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// See-saw search for the lowest quantum value of S. Exit 1 if no value
    /// below -2 was found.
    Optimize {
        #[arg(long, default_value_t = SearchConfig::default().seeds)]
        seeds: usize,
        #[arg(long, default_value_t = SearchConfig::default().max_iterations)]
        iterations: usize,
        #[arg(long, default_value_t = SearchConfig::default().tolerance)]
        tolerance: f64,
        #[arg(long, default_value_t = SearchConfig::default().rng_seed)]
        seed: u64,
        #[arg(long, default_value_t = SearchConfig::default().sweeps)]
        sweeps: usize,
        /// Start from the shipped measurements.
        #[arg(long)]
        from_shipped: bool,
        /// Directory for state.json, measurements.json and log.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify events read from a JSON file {events, c, v, pattern}. Exit 1
    /// if the requested pattern fails.
    Spacetime { input: PathBuf },
    /// Fourier–Motzkin projection of an H-representation JSON file onto the
    /// listed coordinates. The row cap is read from VCAUSAL_FM_ROW_CAP.
    Project {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Reproduce { state, measurements } => reproduce::run(&ReproduceArgs { state, measurements }),
        Command::Certify => certify::run(),
        Command::Battery {
            rows,
            all,
            directions,
            seed,
        } => battery::run(&BatteryArgs {
            rows,
            all,
            directions,
            seed,
        }),
        Command::Optimize {
            seeds,
            iterations,
            tolerance,
            seed,
            sweeps,
            from_shipped,
            out,
        } => optimize::run(&OptimizeArgs {
            config: SearchConfig {
                seeds,
                max_iterations: iterations,
                tolerance,
                rng_seed: seed,
                sweeps,
            },
            from_shipped,
            out,
        }),
        Command::Spacetime { input } => spacetime::run(&input),
        Command::Project { input, keep, out } => project::run(&ProjectArgs { input, keep, out }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.json).expect("reports serialize")
                );
            } else {
                print!("{}", outcome.text);
            }
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
