use std::path::PathBuf;
use std::process::ExitCode;

use binloss_cli::{run, Command, Overrides};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "binloss",
    version,
    about = "Fisher-information loss from binning list-mode data"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// FIMs, loss report and detectability for one perturbation
    Analyze(RunArgs),
    /// Loss against the number of bins
    SweepBins(RunArgs),
    /// Band-limited convolution example at and around Nyquist binning
    ConvExample(RunArgs),
    /// Monte Carlo check of bin means against the model
    McValidate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides quadrature.nodes_per_axis
    #[arg(long)]
    nodes: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::SweepBins(a) => (Command::SweepBins, a),
        Cmd::ConvExample(a) => (Command::ConvExample, a),
        Cmd::McValidate(a) => (Command::McValidate, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        nodes: args.nodes,
    };
    match run(command, &args.config, &args.out, overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
