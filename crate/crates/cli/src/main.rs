mod commands;
mod config;
mod error;
mod fixture;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "lcrl", version, about = "Logically-constrained Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one learner per seed and write its artifacts
    Train(RunArgs),
    /// Train, then also solve the PSP fixpoint of the learned model
    Psp(RunArgs),
    /// Solve the explicit product exactly
    Oracle(RunArgs),
    /// Compare a training run against an oracle report
    Compare {
        /// Seed directory written by `train`
        #[arg(long)]
        run: PathBuf,
        /// oracle.json written by `oracle`
        #[arg(long)]
        oracle: PathBuf,
        /// Output directory; defaults to the run directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect or produce automaton files
    #[command(subcommand)]
    Automaton(AutomatonCommand),
}

#[derive(Subcommand)]
enum AutomatonCommand {
    /// Validate an automaton file and print its structure
    Check { path: PathBuf },
    /// Translate an LTL formula of the supported fragment
    Translate {
        formula: String,
        /// Atom names, separated by spaces or commas
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    region_size: Option<usize>,
    #[arg(long)]
    ltl: Option<String>,
    #[arg(long)]
    automaton: Option<String>,
    #[arg(long)]
    automaton_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    it_threshold: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    rp: Option<f64>,
    #[arg(long)]
    epsilon0: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => ExperimentConfig::parse(&fixture::read_text(path)?)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            fixture: self.fixture,
            region_size: self.region_size,
            ltl: self.ltl,
            automaton: self.automaton,
            automaton_file: self.automaton_file,
            mu: self.mu,
            gamma: self.gamma,
            rp: self.rp,
            episodes: self.episodes,
            it_threshold: self.it_threshold,
            epsilon0: self.epsilon0,
            tau: self.tau,
            stop_on_convergence: None,
            seeds: self.seed.map(|s| vec![s]),
            tol: self.tol,
            out: self.out,
        };
        Ok(flags.or(file))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(args) => commands::cmd_train(&args.resolve()?, false).map(drop),
        Command::Psp(args) => commands::cmd_train(&args.resolve()?, true).map(drop),
        Command::Oracle(args) => commands::cmd_oracle(&args.resolve()?).map(drop),
        Command::Compare { run, oracle, out } => commands::cmd_compare(&run, &oracle, out.as_deref()).map(drop),
        Command::Automaton(AutomatonCommand::Check { path }) => commands::cmd_automaton_check(&path).map(drop),
        Command::Automaton(AutomatonCommand::Translate { formula, alphabet, out }) => {
            commands::cmd_automaton_translate(&formula, &alphabet, out.as_deref()).map(drop)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
