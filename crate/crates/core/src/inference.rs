//! Relation inference: directed ratings between two users are pooled into a
//! Bernoulli relation whose parameter gets a beta posterior. Pairs with a
//! confident bias towards agreement or disagreement become signed edges.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signed::{EdgeEvidence, NodeMap, SignedEdge, SignedNetwork, Interaction, Sign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("beta prior parameters must be positive, got alpha0={0}, beta0={1}")]
    InvalidPrior(f64, f64),
    #[error("invalid edge rule: {0}")]
    InvalidRule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha0: f64,
    pub beta0: f64,
}

impl BetaPrior {
    pub fn new(alpha0: f64, beta0: f64) -> Result<Self, InferenceError> {
        let prior = BetaPrior { alpha0, beta0 };
        prior.validate()?;
        Ok(prior)
    }

    /// Beta(1, 1), for platforms where agreement and disagreement are equally informative.
    pub fn uniform() -> Self {
        BetaPrior {
            alpha0: 1.0,
            beta0: 1.0,
        }
    }

    /// Beta(1, 2), for platforms where negative ratings are scarce and carry more signal.
    pub fn skewed_negative() -> Self {
        BetaPrior {
            alpha0: 1.0,
            beta0: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        // written so that NaN fails too
        if !(self.alpha0 > 0.0 && self.beta0 > 0.0) {
            return Err(InferenceError::InvalidPrior(self.alpha0, self.beta0));
        }
        Ok(())
    }
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior::uniform()
    }
}

/// Thresholds an aggregated pair must pass to become an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRule {
    pub mean_high: f64,
    pub mean_low: f64,
    pub var_max: f64,
}

impl Default for EdgeRule {
    fn default() -> Self {
        EdgeRule {
            mean_high: 0.6,
            mean_low: 0.4,
            var_max: 1e-4,
        }
    }
}

impl EdgeRule {
    pub fn validate(&self) -> Result<(), InferenceError> {
        let ok = 0.0 <= self.mean_low
            && self.mean_low < 0.5
            && 0.5 < self.mean_high
            && self.mean_high <= 1.0
            && self.var_max > 0.0;
        if !ok {
            return Err(InferenceError::InvalidRule(format!(
                "need 0 <= mean_low < 0.5 < mean_high <= 1 and var_max > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Sign of the edge implied by a posterior, or `None` if the pair is undecided.
    pub fn classify(&self, posterior: Posterior) -> Option<Sign> {
        if posterior.variance >= self.var_max {
            return None;
        }
        if posterior.mean > self.mean_high {
            Some(Sign::Positive)
        } else if posterior.mean < self.mean_low {
            Some(Sign::Negative)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of Beta(alpha0 + pos, beta0 + neg).
pub fn pair_posterior(pos: u64, neg: u64, prior: BetaPrior) -> Posterior {
    let a = prior.alpha0 + pos as f64;
    let b = prior.beta0 + neg as f64;
    let s = a + b;
    Posterior {
        mean: a / s,
        variance: a * b / ((s + 1.0) * s * s),
    }
}

/// Positive/negative counts per unordered user pair.
///
/// Both directions of a pair pool into the same entry. Tallies from disjoint
/// shards of a stream can be merged in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairTally {
    counts: HashMap<(String, String), (u64, u64)>,
}

impl PairTally {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    pub fn add(&mut self, it: &Interaction) {
        let entry = self.counts.entry(Self::key(&it.rater, &it.author)).or_default();
        match it.sign {
            Sign::Positive => entry.0 += 1,
            Sign::Negative => entry.1 += 1,
        }
    }

    pub fn merge(&mut self, other: PairTally) {
        for (k, (p, n)) in other.counts {
            let e = self.counts.entry(k).or_default();
            e.0 += p;
            e.1 += n;
        }
    }

    pub fn counts(&self, a: &str, b: &str) -> (u64, u64) {
        self.counts
            .get(&Self::key(a, b))
            .copied()
            .unwrap_or_default()
    }

    pub fn pair_count(&self) -> usize {
        self.counts.len()
    }

    /// Applies the edge rule to every pair. Nodes are the endpoints of emitted edges.
    pub fn into_network(self, prior: BetaPrior, rule: EdgeRule) -> SignedNetwork {
        let mut accepted: Vec<((String, String), Sign, EdgeEvidence)> = self
            .counts
            .into_iter()
            .filter_map(|(pair, (pos, neg))| {
                let post = pair_posterior(pos, neg, prior);
                rule.classify(post).map(|sign| {
                    let ev = EdgeEvidence {
                        pos_count: pos,
                        neg_count: neg,
                        posterior_mean: post.mean,
                        posterior_var: post.variance,
                    };
                    (pair, sign, ev)
                })
            })
            .collect();
        accepted.sort_by(|a, b| a.0.cmp(&b.0));

        let nodes = Arc::new(
            NodeMap::new(accepted.iter().flat_map(|((a, b), _, _)| [a.as_str(), b.as_str()]))
                .expect("ids validated at ingest"),
        );
        let edges = accepted
            .iter()
            .map(|((a, b), sign, ev)| {
                let u = nodes.index_of(a).expect("indexed");
                let v = nodes.index_of(b).expect("indexed");
                SignedEdge::new(u, v, *sign).with_evidence(*ev)
            })
            .collect();
        SignedNetwork::from_indexed(nodes, edges).expect("pairs are unique and distinct")
    }
}

impl<'a> FromIterator<&'a Interaction> for PairTally {
    fn from_iter<I: IntoIterator<Item = &'a Interaction>>(iter: I) -> Self {
        let mut t = PairTally::new();
        for it in iter {
            t.add(it);
        }
        t
    }
}

/// Builds the signed relation network from a stream of interactions.
pub fn build_relation_network<'a, I>(
    interactions: I,
    prior: BetaPrior,
    rule: EdgeRule,
) -> Result<SignedNetwork, InferenceError>
where
    I: IntoIterator<Item = &'a Interaction>,
{
    prior.validate()?;
    rule.validate()?;
    let tally: PairTally = interactions.into_iter().collect();
    Ok(tally.into_network(prior, rule))
}

/// Parallel variant: shards the slice and merges per-shard tallies.
pub fn build_relation_network_par(
    interactions: &[Interaction],
    prior: BetaPrior,
    rule: EdgeRule,
) -> Result<SignedNetwork, InferenceError> {
    use rayon::prelude::*;

    prior.validate()?;
    rule.validate()?;
    let tally = interactions
        .par_chunks(16_384)
        .map(|chunk| chunk.iter().collect::<PairTally>())
        .reduce(PairTally::new, |mut a, b| {
            a.merge(b);
            a
        });
    Ok(tally.into_network(prior, rule))
}
