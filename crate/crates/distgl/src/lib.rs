//! Distributed graph learning from smooth signals.
//!
//! Logical network nodes connected by a fixed communication graph
//! collaboratively infer a weighted data graph from the signals they hold,
//! while a ledger counts every scalar that crosses an edge. The crate
//! bundles the simulator, a centralized solver for the same objective, a
//! log-degree baseline, synthetic instance generation, accuracy metrics and
//! a reproducible experiment runner.

pub mod acceptance;
pub mod dist;
pub mod experiment;
pub mod graph;
pub mod init;
pub mod io;
pub mod ledger;
pub mod metrics;
pub mod node;
pub mod synth;

pub use dist::{
    centralized_cost, run_baseline_logdegree, run_centralized, run_distributed, symmetry_project,
    DownlinkVariant, GlobalRunConfig, OptimizerMode, RunResult,
};
pub use graph::{
    edge_differences, laplacian_from_weights, smoothness, CommGraph, DataGraph, EdgeDifferences,
    GraphError, SignalMatrix, UpperWeights,
};
pub use init::{naive_initialization_cost, run_initialization, InitError};
pub use ledger::{MessageLedger, Phase, Transport};
pub use metrics::{
    frobenius_error, normalized_frobenius_error, wasserstein_distance, MetricsError, MetricsReport,
    WassersteinSupport,
};
pub use node::{DataTermNormalization, NodeState};
pub use synth::{
    generate_comm_graph, generate_data_graph, generate_smooth_signals, GenConfig, GenError,
};
