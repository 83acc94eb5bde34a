//! Command-line front end: argument definitions, command dispatch and
//! report rendering. `main.rs` only prints what [`run`] returns.

mod classify;
mod contexts;
mod glue;
mod report;
mod simulate;

use std::fs;
use std::path::{Path, PathBuf};

use causeglue::format::LoadError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SEMANTIC: i32 = 3;
pub const EXIT_INADMISSIBLE_SEED: i32 = 4;
pub const EXIT_NOT_GLUABLE: i32 = 10;

#[derive(Debug, Parser)]
#[command(name = "causeglue", version, about = "Contextual classification and definite-order gluing of behaviours")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario file (`.scn`)
    #[arg(long, global = true, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Dynamics model file (`.model`)
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Also write machine-readable rows to this CSV file
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_csv: Option<PathBuf>,
    /// Master seed for every random draw
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Reject atom and posedness sets that are not up-closed instead of closing them
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seven-valued status of propositions across a context family
    Classify(ClassifyArgs),
    /// Decide whether the behaviour is a mixture of definite orders
    Glue(GlueArgs),
    /// Causal fraction and L1 distance to the gluable set
    Fraction(FractionArgs),
    /// Monte-Carlo statistics of a spin-network model
    Simulate(SimulateArgs),
    /// Print the context poset and its Hasse diagram
    Contexts,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Comma-separated context names
    #[arg(long, value_delimiter = ',', required = true)]
    pub family: Vec<String>,
    /// Proposition, e.g. `A<B` or `~(A<B) | chi`; repeatable
    #[arg(long = "prop")]
    pub props: Vec<String>,
    /// Force this atom at the maximal contexts when the file's behaviour glues
    #[arg(long, value_name = "ATOM")]
    pub bind_sep: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderSource {
    /// Every total order of the parties
    All,
    /// Only the total orders declared in [contexts]
    Contexts,
}

#[derive(Debug, Args)]
pub struct GlueArgs {
    #[arg(long, value_enum, default_value_t = OrderSource::All)]
    pub orders: OrderSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Cf,
    L1,
    Both,
}

#[derive(Debug, Args)]
pub struct FractionArgs {
    #[arg(long, value_enum, default_value_t = Measure::Both)]
    pub measure: Measure,
    /// Print a separating inequality when the behaviour does not glue
    #[arg(long)]
    pub witness: bool,
    #[arg(long, value_enum, default_value_t = OrderSource::All)]
    pub orders: OrderSource,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Parametric-time horizon; defaults to 50/r0
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Run the gluing test on the induced behaviour
    #[arg(long)]
    pub then_glue: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Load { path: String, source: LoadError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Load { source, .. } => match source {
                LoadError::Parse(_) => EXIT_PARSE,
                LoadError::Semantic { .. } => EXIT_SEMANTIC,
                LoadError::InadmissibleSeed => EXIT_INADMISSIBLE_SEED,
            },
            CliError::Usage(_) => EXIT_PARSE,
            CliError::Semantic(_) => EXIT_SEMANTIC,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub warnings: Vec<String>,
    pub code: i32,
}

impl Report {
    fn ok(text: String, warnings: Vec<String>) -> Self {
        Report {
            text,
            warnings,
            code: EXIT_OK,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Classify(a) => classify::run(g, a),
        Command::Glue(a) => glue::run_glue(g, a),
        Command::Fraction(a) => glue::run_fraction(g, a),
        Command::Simulate(a) => simulate::run(g, a),
        Command::Contexts => contexts::run(g),
    }
}

fn read_input(path: &Option<PathBuf>, flag: &str) -> Result<(String, String), CliError> {
    let path = path
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} PATH is required for this command")))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    Ok((path.display().to_string(), text))
}

fn load_error(path: &str) -> impl FnOnce(LoadError) -> CliError + '_ {
    move |source| CliError::Load {
        path: path.to_string(),
        source,
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
