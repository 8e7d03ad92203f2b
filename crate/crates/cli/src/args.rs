use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "statmean",
    version,
    about = "BLUE of the mean of stationary processes: variances, efficiencies, decay diagnostics",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Output file, or `json` / `csv` to choose the format on standard output.
    #[arg(long, global = true, value_name = "PATH|json|csv")]
    pub out: Option<String>,
    /// Output format; overrides the one implied by `--out`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file of flag values (keys are flag names); command-line flags win.
    /// A previous output or its manifest is accepted and re-runs that job.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true, env = "STATMEAN_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub const SUBCOMMANDS: [&str; 11] = [
    "classify",
    "covariance",
    "blue",
    "weights",
    "variance",
    "christoffel",
    "efficiency",
    "asymptote",
    "chebyshev",
    "decay",
    "simulate",
];

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Szegő-type classification of a spectral measure.
    Classify(ClassifyArgs),
    /// Covariances r(0..=n).
    Covariance(CovarianceArgs),
    /// BLUE weights and variance from the Toeplitz system.
    Blue(BlueArgs),
    /// Weights of a named estimator.
    Weights(WeightsArgs),
    /// Variance of a named estimator under a measure.
    Variance(VarianceArgs),
    /// Christoffel function curve at a probe point.
    Christoffel(ChristoffelArgs),
    /// Closed-form efficiency laws, or finite-sample efficiency curves.
    Efficiency(EfficiencyArgs),
    /// Limit constants of variances and covariances.
    Asymptote(AsymptoteArgs),
    /// Generalized Chebyshev polynomials on arcs of the unit circle.
    Chebyshev(ChebyshevArgs),
    /// Exponential decay rate of BLUE variances.
    Decay(DecayArgs),
    /// Monte Carlo variance of an estimator, or raw sample paths.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Covariance(_) => "covariance",
            Command::Blue(_) => "blue",
            Command::Weights(_) => "weights",
            Command::Variance(_) => "variance",
            Command::Christoffel(_) => "christoffel",
            Command::Efficiency(_) => "efficiency",
            Command::Asymptote(_) => "asymptote",
            Command::Chebyshev(_) => "chebyshev",
            Command::Decay(_) => "decay",
            Command::Simulate(_) => "simulate",
        }
    }

    pub fn parameters(&self) -> serde_json::Value {
        let v = match self {
            Command::Classify(a) => serde_json::to_value(a),
            Command::Covariance(a) => serde_json::to_value(a),
            Command::Blue(a) => serde_json::to_value(a),
            Command::Weights(a) => serde_json::to_value(a),
            Command::Variance(a) => serde_json::to_value(a),
            Command::Christoffel(a) => serde_json::to_value(a),
            Command::Efficiency(a) => serde_json::to_value(a),
            Command::Asymptote(a) => serde_json::to_value(a),
            Command::Chebyshev(a) => serde_json::to_value(a),
            Command::Decay(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionArg {
    #[default]
    Double,
    Dd,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Lse,
    Parabolic,
    Adenstedt,
    Blue,
    PseudoBest,
}

/// Estimator selection shared by `variance`, `efficiency`, `simulate`; the
/// Adenstedt exponent comes from the command's `--alpha`.
#[derive(Args, Debug, Serialize)]
pub struct EstimatorOpts {
    #[arg(long, value_enum, default_value = "lse")]
    pub estimator: EstimatorKind,
    /// Design model for the pseudo-best estimator (JSON file or inline JSON).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// Spectral model or measure (JSON file or inline JSON).
    #[arg(long)]
    pub model: String,
}

#[derive(Args, Debug, Serialize)]
pub struct CovarianceArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t)]
    pub precision: PrecisionArg,
}

#[derive(Args, Debug, Serialize)]
pub struct BlueArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t)]
    pub precision: PrecisionArg,
}

#[derive(Args, Debug, Serialize)]
pub struct WeightsArgs {
    #[arg(long, value_enum)]
    pub estimator: EstimatorKind,
    #[arg(long)]
    pub n: usize,
    /// Exponent of the Adenstedt estimator.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Model for the BLUE.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Design model for the pseudo-best estimator.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct VarianceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub estimator: EstimatorOpts,
    /// True spectral measure.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    /// Exponent of the Adenstedt estimator.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChristoffelArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    /// Complex point: `x`, `x+yi`, or polar `r@angle` (angle may use `pi`).
    #[arg(long, default_value = "1")]
    pub probe: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum EfficiencyLawArg {
    /// Adenstedt estimator of exponent alpha used at alpha + beta.
    #[value(name = "overestimation", alias = "eq7.8")]
    #[serde(rename = "overestimation")]
    Overestimation,
    #[value(name = "lse-asymptotic")]
    #[serde(rename = "lse-asymptotic")]
    LseAsymptotic,
    #[value(name = "samarov-taqqu")]
    #[serde(rename = "samarov-taqqu")]
    SamarovTaqqu,
    #[value(name = "beran-kunsch")]
    #[serde(rename = "beran-kunsch")]
    BeranKunsch,
}

#[derive(Args, Debug, Serialize)]
pub struct EfficiencyArgs {
    #[arg(long, value_enum, required_unless_present = "finite")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<EfficiencyLawArg>,
    /// Finite-sample efficiency curve of `--estimator` under `--model`.
    #[arg(long, conflicts_with = "law")]
    pub finite: bool,
    /// Law exponent, or the Adenstedt exponent with `--finite`.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub estimator: EstimatorOpts,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Orders: `start:stop:step` (inclusive) or a comma list.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoteLaw {
    /// lim n Var(BLUE) = 2 pi f(0).
    ShortMemory,
    /// lim n^{2 alpha + 1} Var(BLUE) for f_alpha g with g(0) = g0.
    GeneralClass,
    /// lim n^{2 alpha + 2} Var of the Adenstedt estimator of integer alpha under f_{alpha+1} g.
    Underestimation,
    /// Large-lag covariance of f_alpha against the exact value.
    Covariance,
    /// Limit of the Christoffel function inside the disk.
    DiskLimit,
    /// Szegő function D(f, z).
    SzegoFunction,
}

#[derive(Args, Debug, Serialize)]
pub struct AsymptoteArgs {
    #[arg(long, value_enum)]
    pub law: AsymptoteLaw,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    /// Lag for the covariance law.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Point inside the unit disk (same syntax as `--probe`).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChebyshevArgs {
    /// Closed arcs `a:b,c:d` in [-pi, pi]; angles may use `pi`, e.g. `0.5pi:pi,-pi:-0.5pi`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "complement_arc")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arcs: Option<String>,
    /// The region `alpha <= |lambda| <= pi`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complement_arc: Option<String>,
    #[arg(long, default_value = "8:48:4")]
    pub n_grid: String,
    /// Grid points per region (default max(64 n, 4096)).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecayArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value = "8:48:4")]
    pub n_grid: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub precision: PrecisionArg,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub estimator: EstimatorOpts,
    #[arg(long)]
    pub n: usize,
    /// Exponent of the Adenstedt estimator.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the sample paths `X(0..=n)` instead of the variance estimate.
    #[arg(long)]
    pub paths: bool,
}
