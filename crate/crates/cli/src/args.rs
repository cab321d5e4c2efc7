//! Flag definitions shared by the subcommands.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distboost_core::dist::Family;
use distboost_core::engine::Method;
use distboost_core::simgen::ScenarioId;
use distboost_core::tune::ResamplingKind;

#[derive(Debug, Parser)]
#[command(
    name = "distboost",
    version,
    about = "Distributional gradient boosting: multi-parameter models fitted by \
             component-wise boosting, with out-of-bag tuning and stability selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV file and write the model and risk trace.
    Fit(FitArgs),
    /// Search the stopping iteration by out-of-bag risk.
    Cv(CvArgs),
    /// Stability selection with per-family error-rate control.
    Stabsel(StabselArgs),
    /// Re-run the bundled simulation experiments at configurable scale.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Normal,
    Negbin,
    Zinb,
}

impl FamilyArg {
    pub fn to_family(self) -> Family {
        match self {
            FamilyArg::Normal => Family::Normal,
            FamilyArg::Negbin => Family::NegBin,
            FamilyArg::Zinb => Family::Zinb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cyclical,
    Inner,
    Outer,
}

impl MethodArg {
    pub fn to_method(self) -> Method {
        match self {
            MethodArg::Cyclical => Method::Cyclical,
            MethodArg::Inner => Method::NoncyclicalInner,
            MethodArg::Outer => Method::NoncyclicalOuter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanArg {
    Subsample,
    Bootstrap,
}

impl PlanArg {
    pub fn to_kind(self) -> ResamplingKind {
        match self {
            PlanArg::Subsample => ResamplingKind::SubsampleHalf,
            PlanArg::Bootstrap => ResamplingKind::Bootstrap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Linear,
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Convergence,
    Speed,
    Runtime,
    Stabsweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Conv,
    #[value(name = "1a")]
    S1a,
    #[value(name = "1b")]
    S1b,
    #[value(name = "2a")]
    S2a,
    #[value(name = "2b")]
    S2b,
    #[value(name = "3a")]
    S3a,
    #[value(name = "3b")]
    S3b,
}

impl ScenarioArg {
    pub fn to_id(self) -> ScenarioId {
        match self {
            ScenarioArg::Conv => ScenarioId::Conv,
            ScenarioArg::S1a => ScenarioId::S1A,
            ScenarioArg::S1b => ScenarioId::S1B,
            ScenarioArg::S2a => ScenarioId::S2A,
            ScenarioArg::S2b => ScenarioId::S2B,
            ScenarioArg::S3a => ScenarioId::S3A,
            ScenarioArg::S3b => ScenarioId::S3B,
        }
    }
}

/// Flags every subcommand carries.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Master seed; omitted seeds are generated and recorded in the manifest.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for resampling loops (fallback: DISTBOOST_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory the outputs and the run manifest are written to.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

/// Flags shared by the commands that read a user CSV.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV (header row required, '.' decimal separator).
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    pub response: String,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Step length of the boosting updates.
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    /// Base-learner type used for every covariate.
    #[arg(long, value_enum, default_value_t = LearnerArg::Linear)]
    pub learner: LearnerArg,
    /// Slope penalty for ridge base-learners.
    #[arg(long)]
    pub penalty: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Stopping iterations: a scalar for the noncyclical methods, a comma
    /// list (or a scalar applied to every parameter) for the cyclical one.
    #[arg(long, value_delimiter = ',', required = true)]
    pub mstop: Vec<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of resampling folds.
    #[arg(long, default_value_t = 25)]
    pub folds: usize,
    #[arg(long, value_enum, default_value_t = PlanArg::Subsample)]
    pub plan: PlanArg,
    /// Largest stopping value on each grid axis.
    #[arg(long)]
    pub grid_max: usize,
    #[arg(long, default_value_t = 10)]
    pub grid_length: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct StabselArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Base-learners selected per subsample (two of --q/--pi-thr/--pfer).
    #[arg(long)]
    pub q: Option<usize>,
    /// Selection-frequency threshold in (0.5, 1].
    #[arg(long)]
    pub pi_thr: Option<f64>,
    /// Per-family error rate to control.
    #[arg(long)]
    pub pfer: Option<f64>,
    /// Number of subsamples B.
    #[arg(long, default_value_t = 50)]
    pub subsamples: usize,
    /// Iteration budget per subsample fit.
    #[arg(long, default_value_t = 1500)]
    pub mstop_cap: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub experiment: ExperimentArg,
    /// Simulation replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Observations per simulated dataset.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Total base-learner updates per fit (convergence and speed).
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Noise-covariate counts for the speed experiment.
    #[arg(long, value_delimiter = ',')]
    pub noise_levels: Option<Vec<usize>>,
    /// Scenario for the stabsweep experiment.
    #[arg(long, value_enum, default_value_t = ScenarioArg::S1a)]
    pub scenario: ScenarioArg,
    /// Methods for the stabsweep experiment.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodArg>>,
    /// q values for the stabsweep experiment.
    #[arg(long, value_delimiter = ',')]
    pub q_values: Option<Vec<usize>>,
    /// Total covariate counts for the stabsweep experiment.
    #[arg(long, value_delimiter = ',')]
    pub p_values: Option<Vec<usize>>,
    /// Threshold grid for the stabsweep experiment.
    #[arg(long, default_value_t = 0.55)]
    pub pi_from: f64,
    #[arg(long, default_value_t = 0.99)]
    pub pi_to: f64,
    #[arg(long, default_value_t = 0.01)]
    pub pi_step: f64,
    /// Subsamples per stability-selection run.
    #[arg(long, default_value_t = 50)]
    pub subsamples: usize,
    #[arg(long, default_value_t = 1500)]
    pub mstop_cap: usize,
    /// Folds for the runtime benchmark.
    #[arg(long, default_value_t = 25)]
    pub folds: usize,
    #[arg(long, default_value_t = 300)]
    pub grid_max: usize,
    #[arg(long, default_value_t = 10)]
    pub grid_length: usize,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}
