use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trimstat::{ContaminationSpec, DistributionSpec, Seed, Strategy};

#[derive(Debug, Parser)]
#[command(name = "trimstat", version, about = "Trimmed-mean estimation, tuning and Monte Carlo bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the mean of a data file (or a simulated sample).
    Estimate(EstimateArgs),
    /// Confidence interval from a data file with the precise-regime plan.
    Ci(CiArgs),
    /// Choose the trimming level for one of the planning regimes.
    Tune(TuneArgs),
    /// Replicate an estimator on simulated samples.
    Simulate(SimulateArgs),
    /// Monte Carlo or deterministic check of one inequality.
    Verify(VerifyArgs),
    /// Heavy-tail comparison of Catoni, sample mean and trimmed mean (k=6).
    Violin(ViolinArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Random seed; every report prints the one it used.
    #[arg(long, default_value_t = Seed::DEFAULT.0)]
    pub seed: u64,
    /// Write a JSON report to this path.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write tidy CSV rows to this path.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Worker threads for replicates. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Output {
    pub fn seed(&self) -> Seed {
        Seed(self.seed)
    }
}

#[derive(Debug, Args)]
pub struct Input {
    /// Data file: one number per line, `#` comments; `-` reads stdin.
    pub path: Option<PathBuf>,
    /// Take column J (0-indexed) of comma-separated lines.
    #[arg(long, value_name = "J")]
    pub column: Option<usize>,
    /// Simulate the data from FAMILY:PARAMS instead of reading a file.
    #[arg(long, value_name = "FAMILY:PARAMS", conflicts_with = "path")]
    pub dist: Option<DistributionSpec>,
    /// Sample size when simulating.
    #[arg(long, requires = "dist")]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Trim {
    /// Symmetric trimming level.
    #[arg(long, conflicts_with_all = ["k1", "k2"])]
    pub k: Option<usize>,
    /// Number of smallest points removed.
    #[arg(long)]
    pub k1: Option<usize>,
    /// Number of largest points removed.
    #[arg(long)]
    pub k2: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub trim: Trim,
    /// trimmed (uses --k/--k1/--k2), mean, mom:BLOCKS, catoni or catoni:SCALE.
    /// Catoni without a scale uses the sample standard deviation.
    #[arg(long, default_value = "trimmed")]
    pub estimator: String,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub input: Input,
    /// Two-sided level; x solves 1 - Phi(x) = alpha/2.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Moment order with a known ratio bound kappa.
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    /// Upper bound on nu_p / sigma.
    #[arg(long, default_value_t = 3f64.powf(0.25))]
    pub kappa: f64,
    #[arg(long, default_value_t = trimstat::tuning::DEFAULT_C_UNIVERSAL)]
    pub c_universal: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuneMode {
    All,
    Sharper,
    Multiple,
    Contaminated,
    Precise,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    pub mode: TuneMode,
    #[arg(long)]
    pub n: Option<usize>,
    /// Target deviation in units of sigma / sqrt(n).
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Scale used to turn constants into a half-width.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = trimstat::tuning::DEFAULT_C_UNIVERSAL)]
    pub c_universal: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "FAMILY:PARAMS")]
    pub dist: DistributionSpec,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[command(flatten)]
    pub trim: Trim,
    #[arg(long, default_value = "trimmed")]
    pub estimator: String,
    /// Fraction of points replaced after sampling.
    #[arg(long)]
    pub eps: Option<f64>,
    /// none, large_positive:M, large_negative:M, sign_flip, boundary_adversary:K.
    #[arg(long, requires = "eps")]
    pub strategy: Option<Strategy>,
    /// Also report P(|estimate - mean| > x sigma / sqrt(n)).
    #[arg(long)]
    pub x: Option<f64>,
    #[command(flatten)]
    pub out: Output,
}

impl SimulateArgs {
    pub fn contamination(&self) -> trimstat::Result<Option<ContaminationSpec>> {
        match self.eps {
            None => Ok(None),
            Some(eps) => {
                let strategy = self.strategy.unwrap_or(Strategy::None);
                ContaminationSpec::new(eps, strategy).map(Some)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyCase {
    Bernstein,
    OrderStatUpper,
    OrderStatLower,
    EmpiricalVariance,
    XiConcentration,
    WidthTail,
    WidthCorollary,
    ThmAllTail,
    ThmMultipleTail,
    ThmContaminated,
    GaussianPerturbation,
    PopulationBounds,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub case: VerifyCase,
    #[arg(long, value_name = "FAMILY:PARAMS")]
    pub dist: Option<DistributionSpec>,
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub trim: Trim,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Width multiplier; the smallest admissible value when absent.
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Comma-separated x grid for gaussian-perturbation.
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    /// Comma-separated a:b pairs for population-bounds.
    #[arg(long, value_delimiter = ',')]
    pub ab: Option<Vec<String>>,
    /// Comma-separated moment orders for population-bounds.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct ViolinArgs {
    #[command(flatten)]
    pub out: Output,
}
