use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when neither `--seed` nor `BETTEST_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_190_326;

#[derive(Debug, Parser)]
#[command(name = "bettest", version, about = "Test statistical hypotheses by betting")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Seed for anything simulated.
    #[arg(long, global = true, env = "BETTEST_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bet against a null on one outcome and report score, implied
    /// alternative and implied target.
    Test(TestArgs),
    /// Turn p-values into betting scores.
    Calibrate(CalibrateArgs),
    /// Run multi-round testing protocols.
    #[command(subcommand)]
    Protocol(ProtocolCommand),
    /// Capital as a function of a parameter, and the warranty sets it gives.
    Warranty(WarrantyArgs),
    /// Warranty interval for a quantity measured with errors in [-1, 1].
    Measure(MeasureArgs),
    /// Combine betting scores sequentially (product) and in parallel (mean).
    Combine(CombineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetKind {
    LikelihoodRatio,
    NeymanPearson,
    Calibrated,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Null model, e.g. `normal:0,10`, `chisq:11`, `discrete:@p.json`.
    #[arg(long)]
    pub null: String,
    /// Alternative model for likelihood-ratio and Neyman–Pearson bets.
    #[arg(long)]
    pub alt: Option<String>,
    /// Observed outcome.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(long, value_enum, default_value_t = BetKind::LikelihoodRatio)]
    pub bet: BetKind,
    /// Level for Neyman–Pearson bets and power.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Center of a two-sided calibrated test (normal nulls only).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// p-values to shrink; repeat or separate with commas.
    #[arg(long = "p", value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Include the standard table of levels 0.1 down to 1e-6.
    #[arg(long)]
    pub table: bool,
    /// Null law of a test statistic whose p-value to calibrate.
    #[arg(long)]
    pub null: Option<String>,
    /// Observed value of the statistic.
    #[arg(long, requires = "null", allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Center of a two-sided test; omit for upper-tailed.
    #[arg(long, requires = "null", allow_hyphen_values = true)]
    pub center: Option<f64>,
    /// Report the calibrated alternative's probability of deviating at
    /// least this far from the center.
    #[arg(long, requires = "center")]
    pub deviation: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ProtocolCommand {
    /// Run a protocol described by a JSON scenario.
    Run(ProtocolRunArgs),
}

#[derive(Debug, Args)]
pub struct ProtocolRunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct WarrantyArgs {
    /// Parameter family: `normal-mean:SD` or `bernoulli`.
    #[arg(long)]
    pub family: String,
    /// Strategy: `likelihood-ratio:SHIFT` or `confidence:ALPHA`.
    #[arg(long)]
    pub strategy: String,
    /// CSV of observations.
    #[arg(long)]
    pub data: PathBuf,
    /// Column name or 1-based position.
    #[arg(long)]
    pub column: Option<String>,
    /// Grid as `LO,HI` or `LO,HI,POINTS`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Levels to cut warranty sets at; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// CSV of measurements.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub column: Option<String>,
    /// Warranty level (capital Skeptic must reach to discredit a value).
    #[arg(long, default_value_t = 20.0)]
    pub level: f64,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
    /// Fixed tilt; by default tuned to the number of measurements.
    #[arg(long, conflicts_with = "horizon")]
    pub lambda: Option<f64>,
    /// Number of rounds to tune the tilt for.
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// CSV of betting scores.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub column: Option<String>,
}
