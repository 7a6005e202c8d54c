//! `tmd`: tree mover's distance matrices, kernels, classification,
//! clustering, shift reports and stability checks from the command line.
//!
//! Exit codes: 0 success, 1 parse error, 2 I/O error, 3 configuration
//! error, 4 violated stability bound.

mod commands;
mod inputs;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::*;

#[derive(Parser, Debug)]
#[command(name = "tmd", version, about = "Tree mover's distance between attributed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pairwise distance matrix as CSV
    Dist(DistArgs),
    /// exp(-gamma * d) kernel from a distance matrix
    Gram(GramArgs),
    /// k-nearest-neighbor classification
    Knn(KnnArgs),
    /// k-medoids clustering with NMI and completeness against labels
    Cluster(ClusterArgs),
    /// Wasserstein-1 distance from a training set to test sets
    Shift(ShiftArgs),
    /// Check the GNN output-distance bound
    Lipschitz(LipschitzArgs),
    /// Perturbation bounds for graph edits
    Perturb(PerturbArgs),
    /// 1-WL distinguishability of two graphs
    Wl(WlArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Dist(a) => dist(a),
        Command::Gram(a) => gram(a),
        Command::Knn(a) => knn(a),
        Command::Cluster(a) => cluster(a),
        Command::Shift(a) => shift(a),
        Command::Lipschitz(a) => lipschitz(a),
        Command::Perturb(a) => perturb(a),
        Command::Wl(a) => wl(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
