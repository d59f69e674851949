//! `learnbd`: generate instances, sample training cuts, train and evaluate
//! cut classifiers, solve with classic or learning Benders decomposition,
//! and tabulate runs.

mod commands;
mod config;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Flags};

#[derive(Parser)]
#[command(name = "learnbd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file and a sampled scenario CSV
    Generate(Flags),
    /// Sample training cuts along random paths and write the row CSV
    Phase1(Flags),
    /// Train one classifier per Δ from a row CSV
    Train(Flags),
    /// Accuracy of a trained model on labeled row sets
    Eval(Flags),
    /// Solve with classic Benders (bd) or the learning variant (learnbd)
    Solve(Flags),
    /// Comparison table and per-iteration panel data from run directories
    Report(Flags),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (flags, run): (&Flags, fn(&ExperimentConfig) -> anyhow::Result<()>) = match &cli.command {
        Command::Generate(f) => (f, commands::generate),
        Command::Phase1(f) => (f, commands::phase1),
        Command::Train(f) => (f, commands::train),
        Command::Eval(f) => (f, commands::eval),
        Command::Solve(f) => (f, commands::solve),
        Command::Report(f) => (f, commands::report),
    };
    let result = ExperimentConfig::resolve(flags).and_then(|cfg| run(&cfg));
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
