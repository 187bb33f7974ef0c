use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Variability and AUC-interval analysis for ensembles of retrained models.
///
/// Every subcommand that reads data accepts `--config FILE` (TOML, JSON, or a
/// previous `summary.json`); flags given on the command line override it.
#[derive(Debug, Parser)]
#[command(name = "predvar", version, propagate_version = true)]
pub struct Cli {
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-(case, finding) variability records and their summary.
    Metrics(MetricsArgs),
    /// Group-average models and compare cv before and after.
    Ensemble(EnsembleArgs),
    /// Per-model AUC with optional confidence intervals.
    Auc(AucArgs),
    /// How many per-model intervals contain the cross-model mean AUC.
    Coverage(CoverageArgs),
    /// Write a synthetic predictions/labels pair.
    Simulate(SimulateArgs),
    /// Draw the limited evaluation set.
    SampleLimited(SampleArgs),
    /// Full pipeline: all tables, intervals, coverage and figure data.
    Report(ReportArgs),
}

/// Where the data comes from.
#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// Config file (TOML or JSON).
    #[arg(short, long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Long-format predictions CSV.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    /// Labels CSV.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Generator config file (TOML or JSON) instead of CSV inputs.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["predictions", "labels", "canonical"])]
    pub generator: Option<PathBuf>,
    /// Use the built-in 50-model, 14-finding synthetic configuration.
    #[arg(long, conflicts_with_all = ["predictions", "labels"])]
    pub canonical: bool,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict to these findings (comma separated).
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub findings: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AveragingArg {
    Probability,
    Logit,
}

#[derive(Debug, Args, Default)]
pub struct EnsembleOpts {
    /// Models per group.
    #[arg(long)]
    pub group_size: Option<usize>,
    /// Assign models to groups by a seeded shuffle.
    #[arg(long)]
    pub shuffle_groups: bool,
    /// Space in which group members are averaged.
    #[arg(long, value_enum)]
    pub averaging: Option<AveragingArg>,
}

#[derive(Debug, Args, Default)]
pub struct LimitedOpts {
    /// Evaluate on all cases instead of a sampled limited set.
    #[arg(long)]
    pub full_set: bool,
    /// Normal cases in the limited set.
    #[arg(long)]
    pub limited_normals: Option<usize>,
    /// Positives per finding in the limited set.
    #[arg(long)]
    pub limited_per_finding: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Write the records table here.
    #[arg(long, value_name = "FILE")]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub opts: EnsembleOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AucMethodArg {
    Point,
    Delong,
    Bootstrap,
    Empirical,
}

#[derive(Debug, Args)]
pub struct AucArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Point estimate only, or an interval method.
    #[arg(long, value_enum, default_value = "point")]
    pub method: AucMethodArg,
    /// Confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Bootstrap replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverageMethodArg {
    Delong,
    Bootstrap,
    Both,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Interval method(s) to audit.
    #[arg(long, value_enum, default_value = "both")]
    pub method: CoverageMethodArg,
    /// Confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Bootstrap replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[command(flatten)]
    pub limited: LimitedOpts,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Override the number of models.
    #[arg(long)]
    pub models: Option<usize>,
    /// Override the number of cases.
    #[arg(long)]
    pub cases: Option<usize>,
    /// Override the per-model log-odds noise.
    #[arg(long)]
    pub model_noise_sd: Option<f64>,
    /// Override the per-case log-odds noise.
    #[arg(long)]
    pub case_noise_sd: Option<f64>,
    /// Also write `predictions_wide.csv`.
    #[arg(long)]
    pub wide: bool,
    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Normal cases to draw.
    #[arg(long)]
    pub normals: Option<usize>,
    /// Positives to draw per finding.
    #[arg(long)]
    pub per_finding: Option<usize>,
    /// Write the selected case ids here.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub ensemble: EnsembleOpts,
    #[command(flatten)]
    pub limited: LimitedOpts,
    /// Confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Bootstrap replicates; 0 skips the bootstrap.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Histogram bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Case shown in `overlay.csv`.
    #[arg(long)]
    pub example_case: Option<String>,
    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
}
