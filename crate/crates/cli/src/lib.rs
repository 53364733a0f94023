//! Pipeline orchestration behind the `rfzone` binary: generate reads, train
//! the tree, evaluate the held-out fold, and chain everything from one seed.

use std::fmt;
use std::path::PathBuf;

use rfzone_core::dtree::SplitCriterion;

pub mod commands;
pub mod manifest;

pub use commands::{
    cmd_evaluate, cmd_generate, cmd_pipeline, cmd_train, cmd_weights, EvalOutcome, GenerateOutcome,
    PipelineOutcome, TrainOutcome, WeightsOutcome,
};

/// Binary version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors split by exit status: usage/config problems exit 2, runtime
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Which dataset the class weights are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Balanced weights from the full labeled dataset, before subsampling.
    PreSubsample,
    /// Balanced weights recomputed on the subsample.
    PostSubsample,
    /// No weighting.
    Uniform,
}

impl WeightMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightMode::PreSubsample => "pre-subsample",
            WeightMode::PostSubsample => "post-subsample",
            WeightMode::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pre-subsample" => Ok(WeightMode::PreSubsample),
            "post-subsample" => Ok(WeightMode::PostSubsample),
            "uniform" => Ok(WeightMode::Uniform),
            other => Err(format!(
                "unknown weight mode '{other}', expected pre-subsample, post-subsample or uniform"
            )),
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which half of the split to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fold {
    Train,
    Test,
}

impl std::str::FromStr for Fold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Fold::Train),
            "test" => Ok(Fold::Test),
            other => Err(format!("unknown fold '{other}', expected train or test")),
        }
    }
}

/// Simulation knobs shared by `generate` and `pipeline`.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub sessions: u32,
    pub reads_per_tag_per_session: u32,
    pub p0: f64,
    pub d0: f64,
    pub eta: f64,
    pub sigma: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        let model = rfzone_core::PropagationModel::default();
        let sim = rfzone_core::SimConfig::default();
        Self {
            sessions: sim.sessions,
            reads_per_tag_per_session: sim.reads_per_tag_per_session,
            p0: model.p0_dbm,
            d0: model.d0_m,
            eta: model.eta,
            sigma: model.sigma_db,
        }
    }
}

/// Training knobs shared by `train` and `pipeline`.
#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub subsample_target: usize,
    pub test_fraction: f64,
    pub criterion: SplitCriterion,
    pub max_depth: u32,
    pub min_samples_split: usize,
    pub weight_mode: WeightMode,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            subsample_target: 5000,
            test_fraction: 0.10,
            criterion: SplitCriterion::Gini,
            max_depth: 8,
            min_samples_split: 20,
            weight_mode: WeightMode::PreSubsample,
        }
    }
}

/// Evaluation knobs shared by `evaluate` and `pipeline`.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// 0 disables the bootstrap.
    pub bootstrap_resamples: u32,
    pub ci_level: f64,
    pub adjacent_cost: f64,
    pub non_adjacent_cost: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 1000,
            ci_level: 0.95,
            adjacent_cost: 1.0,
            non_adjacent_cost: 5.0,
        }
    }
}

/// Everything one `pipeline` invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub floorplan: Option<PathBuf>,
    pub sim: SimOptions,
    pub train: TrainOptions,
    pub eval: EvalOptions,
    pub seed: u64,
    pub out_dir: PathBuf,
}
