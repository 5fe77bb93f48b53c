//! Fault-line analysis of signed interaction data.
//!
//! Ratings between users are pooled into a signed relation network, the
//! network is split into groups that minimise frustrated edges, and subsets of
//! the ratings (topics, time windows) are scored against that fixed split with
//! null-model-normalized polarization metrics.

pub mod inference;
pub mod io;
pub mod metrics;
pub mod partitioner;
pub mod pipeline;
pub mod seed;
pub mod signed;
pub mod stats;
pub mod synth;
pub mod timeline;

pub use inference::{build_relation_network, pair_posterior, BetaPrior, EdgeRule};
pub use metrics::{evaluate_network, evaluate_subset, MetricsConfig, MetricsReport};
pub use partitioner::{
    overlap_coefficient, select_k, solve_anneal, solve_exact, AnnealConfig, ExactConfig,
    PartitionSolution, SolveMethod,
};
pub use signed::{
    antagonism, frustration_count, interaction_frustration_count, Interaction, InteractionSubset,
    MissingNodePolicy, NodeMap, Partition, Selector, Sign, SignedNetwork,
};
