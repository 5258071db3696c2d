use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riq::regimes::RegimeKind;

mod commands;
mod config;

#[derive(Parser, Debug)]
#[command(
    name = "riq",
    version,
    about = "Repeated quantum interaction models: exact dynamics, limit generators and certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the cross-module identity suite on a model.
    Validate(Common),
    /// Write every effective generator as a JSON file.
    Generators(Common),
    /// Sweep one regime and fit the convergence order.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_regime)]
        regime: RegimeKind,
        /// Macroscopic time.
        #[arg(long)]
        t: Option<f64>,
        /// Step counts of the sweep, coarse to fine.
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<u64>>,
    },
    /// Closed-form qubit results against the generic modules (d = n = 1).
    Qubit(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Model JSON, bare or wrapped as {"model": ..., "tau": ..., ...}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; reports go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled models and test observables; RIQ_SEED overrides it.
    #[arg(long)]
    seed: Option<u64>,
    /// Interaction time per step.
    #[arg(long)]
    tau: Option<f64>,
    /// Coupling strength (validate) or the fixed λ of the regime-2 sweep.
    #[arg(long)]
    lambda: Option<f64>,
    /// Eigenvalue clustering tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Sample a model with D excited system levels and N excited site levels.
    #[arg(long, value_parser = config::parse_dims, value_name = "D,N")]
    dims: Option<(usize, usize)>,
}

fn parse_regime(s: &str) -> Result<RegimeKind, String> {
    s.parse::<RegimeKind>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate(c) => commands::validate(c),
        Command::Generators(c) => commands::generators(c),
        Command::Converge { common, regime, t, k_list } => commands::converge(common, *regime, *t, k_list.clone()),
        Command::Qubit(c) => commands::qubit(c),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("riq: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
