use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "emphi", version, about = "Empirical phi-divergence tests for the difference of two means")]
pub struct Cli {
    /// Print solver diagnostics to standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test H0: delta = delta0.
    Test(TestArgs),
    /// Confidence interval for delta by test inversion.
    Ci(CiArgs),
    /// Coverage and mean width of the intervals by simulation.
    Simulate(SimulateArgs),
    /// Rejection rates over a grid of true differences.
    Power(PowerArgs),
    /// Intervals for the bundled Reid vapor pressure data.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Sample from population 1, one observation per row.
    #[arg(long)]
    pub x: PathBuf,
    /// Sample from population 2.
    #[arg(long)]
    pub y: PathBuf,
    /// Expected dimension of the observations.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Power,
    Kl,
}

/// Statistic selection shared by every subcommand.
#[derive(Debug, Args)]
pub struct StatArgs {
    /// gamma:<g>, z, loglik, kl, weighted[:<g>] or renyi:<a>; repeatable.
    #[arg(long = "stat", value_delimiter = ',')]
    pub stats: Vec<String>,
    /// Family used when no --stat is given.
    #[arg(long, value_enum, default_value_t = Family::Power)]
    pub family: Family,
    /// Power-divergence indices for --family power.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Vec<f64>,
    /// Add Renyi statistics of these orders.
    #[arg(long = "renyi-a", value_delimiter = ',', allow_hyphen_values = true)]
    pub renyi_a: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Null difference; comma separated for multivariate data.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub delta0: Vec<f64>,
    #[command(flatten)]
    pub stat: StatArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[command(flatten)]
    pub stat: StatArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Normal,
    Lognormal,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, value_enum)]
    pub case: Case,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Replications.
    #[arg(long = "R", short = 'R', default_value_t = 15_000)]
    pub replications: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[command(flatten)]
    pub stat: StatArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Replications for the width estimate; defaults to R / 5.
    #[arg(long = "R-width")]
    pub width_replications: Option<usize>,
    /// Skip the interval-width estimate.
    #[arg(long)]
    pub coverage_only: bool,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long = "delta-min", allow_hyphen_values = true)]
    pub delta_min: f64,
    #[arg(long = "delta-max", allow_hyphen_values = true)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
