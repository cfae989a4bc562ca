use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use granrtc::oracle::DEFAULT_BUDGET;

mod analyze;
mod inputs;
mod oracle;
mod summary;

#[derive(Parser)]
#[command(
    name = "granrtc",
    version,
    about = "Output arrival curves of mode-switching components"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check a model and its arrival curve.
    Validate(InputArgs),
    /// Analyse at several granularities, combine and tighten the results.
    Analyze(AnalyzeArgs),
    /// Compare the fine analysis with exhaustive run enumeration.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// Model file.
    pub model: PathBuf,
    /// Arrival curve file.
    pub arrival: PathBuf,
    /// Output curve length. Defaults to the arrival curve length.
    #[arg(long)]
    pub points: Option<usize>,
    /// Exploration horizon in time units.
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub granularities: Vec<u32>,
    /// Skip causality closure of the combined curve.
    #[arg(long)]
    pub no_closure: bool,
    /// Cross-check the fine analysis against the oracle when it fits its budget.
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Stop an analysis after this many explored states.
    #[arg(long)]
    pub state_budget: Option<u64>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Maximum number of search nodes the oracle may visit.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Mismatch(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

impl From<granrtc::Error> for Failure {
    fn from(e: granrtc::Error) -> Self {
        match e {
            granrtc::Error::BudgetExceeded(_) => Failure::Budget(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Validate(a) => inputs::validate(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::Oracle(a) => oracle::run(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Invalid(m) | Failure::Mismatch(m) | Failure::Budget(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
