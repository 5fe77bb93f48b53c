//! Frustration-minimizing partitions.
//!
//! A solution for `k` uses exactly `k` non-empty groups. Small networks are
//! solved exactly by branch and bound; larger ones by multi-start relocation
//! with simulated annealing, which yields an upper bound on the optimum.

mod anneal;
mod exact;
mod overlap;
mod select;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signed::{frustration_count, Partition, SignedNetwork};

pub use anneal::{solve_anneal, AnnealConfig};
pub use exact::{solve_exact, ExactConfig};
pub use overlap::overlap_coefficient;
pub use select::{select_k, KSelection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionerError {
    #[error(
        "exact search supports at most {cap} nodes for k = {k}, network has {n}; use the annealing method"
    )]
    SizeLimit { n: usize, k: usize, cap: usize },
    #[error("cannot split {n} nodes into {k} non-empty groups")]
    TooFewNodes { n: usize, k: usize },
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("k must be at least {min}, got {k}")]
    InvalidK { k: usize, min: usize },
    #[error("empty k range")]
    EmptyKRange,
    #[error("invalid annealing configuration: {0}")]
    InvalidConfig(String),
    #[error("partitions are defined over different node sets")]
    NodeSetMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Anneal,
}

/// A partition together with its frustration and how it was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionSolution {
    pub partition: Partition,
    pub frustration: usize,
    pub frustrated_positive: usize,
    pub frustrated_negative: usize,
    pub method: Method,
    pub restarts_used: usize,
    /// Best frustration reached by each restart, in restart order.
    pub restart_best: Vec<usize>,
}

impl PartitionSolution {
    pub(crate) fn new(
        network: &SignedNetwork,
        partition: Partition,
        method: Method,
        restart_best: Vec<usize>,
    ) -> Self {
        let f = frustration_count(network, &partition).expect("partition built over network nodes");
        PartitionSolution {
            partition,
            frustration: f.total(),
            frustrated_positive: f.frustrated_positive,
            frustrated_negative: f.frustrated_negative,
            method,
            restarts_used: restart_best.len().max(1),
            restart_best,
        }
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }
}

/// Which solver to run for each `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SolveMethod {
    Exact(ExactConfig),
    Anneal(AnnealConfig),
    /// Exact whenever the network is within the exact size cap, annealing otherwise.
    Auto {
        #[serde(default)]
        exact: ExactConfig,
        #[serde(default)]
        anneal: AnnealConfig,
    },
}

impl Default for SolveMethod {
    fn default() -> Self {
        SolveMethod::Auto {
            exact: ExactConfig::default(),
            anneal: AnnealConfig::default(),
        }
    }
}

impl SolveMethod {
    pub fn solve(&self, network: &SignedNetwork, k: usize) -> Result<PartitionSolution, PartitionerError> {
        match self {
            SolveMethod::Exact(cfg) => solve_exact(network, k, cfg),
            SolveMethod::Anneal(cfg) => solve_anneal(network, k, cfg),
            SolveMethod::Auto { exact, anneal } => {
                if network.node_count() <= exact.cap_for(k) {
                    solve_exact(network, k, exact)
                } else {
                    solve_anneal(network, k, anneal)
                }
            }
        }
    }

    /// Fails when the exact method is forced on a network over the size cap.
    pub fn check_size(&self, n: usize, ks: &[usize]) -> Result<(), PartitionerError> {
        if let SolveMethod::Exact(cfg) = self {
            for &k in ks {
                let cap = cfg.cap_for(k);
                if n > cap {
                    return Err(PartitionerError::SizeLimit { n, k, cap });
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn check_common(network: &SignedNetwork, k: usize) -> Result<(), PartitionerError> {
    let n = network.node_count();
    if n == 0 {
        return Err(PartitionerError::EmptyNetwork);
    }
    if k == 0 {
        return Err(PartitionerError::InvalidK { k, min: 1 });
    }
    if n < k {
        return Err(PartitionerError::TooFewNodes { n, k });
    }
    Ok(())
}
