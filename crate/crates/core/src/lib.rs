//! RFID zone-inference toolkit.
//!
//! Simulates zone-labeled RSSI reads over a modeled floorplan, trains a
//! class-weighted decision tree on (reader IP, antenna, RSSI) features, and
//! evaluates zone predictions with confusion, precision/recall/F1,
//! adjacency-aware accuracy, cost-sensitive risk and bootstrap intervals.
//!
//! The pipeline stages map onto the modules:
//!
//! - [`floorplan`]: zone geometry, reader/antenna/container placement,
//!   adjacency graph.
//! - [`propagation`]: log-distance path-loss read simulation.
//! - [`dataset`]: CSV ingestion, feature encoding, labeling, stratified
//!   subsampling and session-granular splitting.
//! - [`classweights`]: balanced per-class weights.
//! - [`dtree`]: the weighted decision-tree classifier.
//! - [`metrics`]: the evaluation suite.
//! - [`report`]: plot-ready data files and report layout.

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod classweights;
pub mod dataset;
pub mod dtree;
pub mod floorplan;
pub mod metrics;
pub mod propagation;
pub mod report;
pub mod rng;

pub use classweights::{balanced_weights, ClassWeight, ClassWeightTable};
pub use dataset::{
    drop_nulls, encode_reader_ip, label_reads, session_split, stratified_subsample, FeatureRow,
    LabeledDataset, SplitPair,
};
pub use dtree::{fit, DecisionTree, Hyperparams, SplitCriterion, SplitRule};
pub use floorplan::{load_floorplan, AdjacencyGraph, Floorplan, ZoneId};
pub use metrics::{
    accuracy, adjacency_accuracy, bootstrap_ci, confusion, cost_risk, evaluate, macro_micro,
    per_class_prf, BootstrapConfig, ConfusionMatrix, CostMatrix, EvalReport,
};
pub use propagation::{generate_reads, rssi_at, PropagationModel, ReadRecord, ReadSet, SimConfig};
