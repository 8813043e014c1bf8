//! `ncg` command-line entry point. Parsing errors exit 2 (clap's usage
//! convention); library errors print one `error:` line and exit with the
//! code carried by the error kind.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use ncg_core::Result;

mod cfgfile;
mod commands;
mod svg;

use cfgfile::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "ncg", version, about = "nearest-category generalization toolkit")]
struct Cli {
    /// Optional key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Rayon thread-pool size (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate datasets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Train a classifier and write a checkpoint.
    Train(commands::TrainArgs),
    /// Evaluate a checkpoint against an OOD set and write a report.
    Eval(commands::EvalArgs),
    /// Run the sample-complexity simulation and write a summary.
    Theorem(commands::TheoremArgs),
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Two-dimensional three-cluster benchmark with an OOD cluster.
    ThreeCluster(commands::GenThreeClusterArgs),
    /// Cube-world draws from the mu and nu distributions.
    Theorem(commands::GenTheoremArgs),
    /// Apply a corruption to an existing OOD set.
    Corrupt(commands::GenCorruptArgs),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| ncg_core::NcgError::NumericalFailure(e.to_string()))?;
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(GenCommand::ThreeCluster(args)) => commands::gen_three_cluster(args, &file),
        Command::Gen(GenCommand::Theorem(args)) => commands::gen_theorem(args, &file),
        Command::Gen(GenCommand::Corrupt(args)) => commands::gen_corrupt(args, &file),
        Command::Train(args) => commands::train(args, &file),
        Command::Eval(args) => commands::eval(args, &file),
        Command::Theorem(args) => commands::theorem(args, &file),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
