//! Command-line front end for `cibound`: risk curves of a width function,
//! optimised lower bounds and `u**`, Monte-Carlo verification of the exact
//! risk formulas, and batch reproduction of the two result tables.

pub mod cache;
pub mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cibound", version, about = "Lower bounds for confidence intervals centred on a bootstrap smoothed estimator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coverage and scaled expected length of one interval over a grid of gamma
    RiskCurve(RiskCurveArgs),
    /// Optimise the priors at a fixed u, or search for u**
    Bound(BoundArgs),
    /// Compare the exact risks with Monte-Carlo estimates
    Verify(VerifyArgs),
    /// u** for every (alpha_tilde, |rho|) cell of the standard grid
    Table1(TableArgs),
    /// Gain and loss bounds at the standard u values
    Table2(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WidthKind {
    SdDelta,
    Constant,
    File,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Nominal non-coverage of the interval
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Size of the preliminary test
    #[arg(long)]
    pub alpha_tilde: f64,
    /// Correlation between the estimators of theta and tau
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct RiskCurveArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub width: WidthKind,
    /// Half-width for `--width constant` (defaults to z(alpha))
    #[arg(long)]
    pub value: Option<f64>,
    /// Width-function JSON for `--width file`
    #[arg(long, required_if_eq("width", "file"))]
    pub width_file: Option<PathBuf>,
    #[arg(long, default_value_t = 12.0)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub gamma_step: f64,
    /// Directory for the CSV, JSON and summary files
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = cibound::optimizer::OptimizerConfig::default().seed)]
    pub seed: u64,
    /// Random starting priors per (m1, m2)
    #[arg(long, default_value_t = cibound::optimizer::OptimizerConfig::default().multistarts)]
    pub starts: usize,
    /// Simplex iterations per start
    #[arg(long, default_value_t = cibound::optimizer::OptimizerConfig::default().max_iterations)]
    pub max_iterations: usize,
    /// Re-optimisations of the prior at the current u** estimate
    #[arg(long, default_value_t = cibound::optimizer::OptimizerConfig::default().u_passes)]
    pub passes: usize,
    /// Recompute even when a cached result exists
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["u", "u_star_star"]))]
pub struct BoundArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Bound on the maximum scaled expected length is 1 + u
    #[arg(long)]
    pub u: Option<f64>,
    /// Search for u** instead of bounding at a fixed u
    #[arg(long)]
    pub u_star_star: bool,
    /// Number of coverage masses (with --m2; otherwise a range is searched)
    #[arg(long, requires = "m2")]
    pub m1: Option<usize>,
    /// Number of SEL masses
    #[arg(long, requires = "m1")]
    pub m2: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Also write the optimiser trace as JSON lines (bypasses the cache)
    #[arg(long)]
    pub trace: bool,
    /// Directory for bound.json, bound.csv and the optional trace
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Monte-Carlo draws per estimate
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// JSON array of cases (defaults to a built-in set)
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Directory for the JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Test mode: simulate with the centre's sign flipped, which must be detected
    #[arg(long, hide = true)]
    pub flip_bias: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    /// Directory for the table CSV and JSON
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RiskCurve(a) => commands::risk_curve::run(&a),
        Command::Bound(a) => commands::bound::run(&a).map(|_| ()),
        Command::Verify(a) => commands::verify::run(&a),
        Command::Table1(a) => commands::tables::table1(&a),
        Command::Table2(a) => commands::tables::table2(&a),
    }
}
