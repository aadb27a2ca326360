use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tunav", version, about = "Auto-active verifier with tunable quantifier instantiation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify every proof function in FILES.
    Verify(VerifyArgs),
    /// Remove asserts that verification does not need.
    Minimize(MinimizeArgs),
    /// Compare two metrics files produced by `verify --metrics-out`.
    Compare(CompareArgs),
    /// Minimize, then time failures caused by removing random surviving asserts.
    SampleFailures(SampleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Conservative,
    AllTriggers,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScopeArg {
    Function,
    Project,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "conservative")]
    pub trigger_strategy: StrategyArg,
    /// Unfolding depth of recursive spec functions.
    #[arg(long, default_value_t = 1)]
    pub fuel: u32,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_rounds: u32,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_instantiations: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub time_budget_ms: u64,
    /// Do not auto-import the default prelude group.
    #[arg(long)]
    pub no_default_prelude: bool,
    /// Import a broadcast group or fact into every user module.
    #[arg(long = "import-group", value_name = "PATH")]
    pub import_group: Vec<String>,
    /// Ignore manual trigger marks in user code.
    #[arg(long)]
    pub strip_triggers: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,
    /// Omit wall times from all output.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Print the broadcast facts and groups each function used.
    #[arg(long)]
    pub broadcast_usage_info: bool,
    /// Write one SMT-LIB script per obligation into DIR.
    #[arg(long, value_name = "DIR")]
    pub emit_smtlib: Option<PathBuf>,
    /// Per-function metrics; JSON if the path ends in `.json`, else CSV.
    #[arg(long, value_name = "PATH")]
    pub metrics_out: Option<PathBuf>,
    /// Verify the prelude lemmas instead of FILES.
    #[arg(long)]
    pub prelude_only: bool,
}

#[derive(Args, Debug)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "function")]
    pub minimize_scope: ScopeArg,
    /// Rewrite the input files without the removed asserts.
    #[arg(long)]
    pub write: bool,
    #[arg(long, value_name = "PATH")]
    pub report_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    pub metrics_a: PathBuf,
    pub metrics_b: PathBuf,
    /// Per-function ratio table.
    #[arg(long, value_name = "PATH")]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
