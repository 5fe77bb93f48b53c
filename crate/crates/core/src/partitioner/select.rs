use std::collections::BTreeMap;

use log::warn;
use serde::Serialize;

use super::{PartitionSolution, PartitionerError, SolveMethod};
use crate::signed::SignedNetwork;

#[derive(Debug, Clone, Serialize)]
pub struct KSelection {
    pub k_star: usize,
    pub solutions: BTreeMap<usize, PartitionSolution>,
    /// Values of k where the frustration curve rises and then falls again.
    pub shape_violations: Vec<usize>,
}

impl KSelection {
    pub fn best(&self) -> &PartitionSolution {
        &self.solutions[&self.k_star]
    }
}

/// Solves for each k in the range and keeps the one with least frustration,
/// preferring the smallest k on ties.
pub fn select_k(
    network: &SignedNetwork,
    k_range: &[usize],
    method: &SolveMethod,
) -> Result<KSelection, PartitionerError> {
    let mut ks: Vec<usize> = k_range.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(PartitionerError::EmptyKRange);
    }
    if let Some(&k) = ks.iter().find(|&&k| k < 2) {
        return Err(PartitionerError::InvalidK { k, min: 2 });
    }
    method.check_size(network.node_count(), &ks)?;

    let mut solutions = BTreeMap::new();
    for &k in &ks {
        solutions.insert(k, method.solve(network, k)?);
    }
    let k_star = *solutions
        .iter()
        .min_by_key(|(k, s)| (s.frustration, **k))
        .map(|(k, _)| k)
        .expect("non-empty");

    let curve: Vec<(usize, usize)> = solutions.iter().map(|(k, s)| (*k, s.frustration)).collect();
    let shape_violations = valley_violations(&curve);
    if !shape_violations.is_empty() {
        warn!(
            "frustration over k is not single-valleyed at k = {:?}: {:?}",
            shape_violations, curve
        );
    }
    Ok(KSelection {
        k_star,
        solutions,
        shape_violations,
    })
}

/// Points where the curve decreases after having increased.
fn valley_violations(curve: &[(usize, usize)]) -> Vec<usize> {
    let mut rising = false;
    let mut out = Vec::new();
    for w in curve.windows(2) {
        let ((_, a), (k, b)) = (w[0], w[1]);
        if b > a {
            rising = true;
        } else if b < a && rising {
            out.push(k);
        }
    }
    out
}
