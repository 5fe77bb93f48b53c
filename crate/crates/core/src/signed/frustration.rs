use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::interaction::Sign;
use super::network::SignedNetwork;
use super::partition::{Partition, PartitionError};
use super::subset::InteractionSubset;

/// How interactions touching users outside the partition are handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingNodePolicy {
    Strict,
    #[default]
    Drop,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("interaction endpoint `{0}` has no group in the partition")]
    MissingEndpoint(String),
    #[error("metric `{metric}` is undefined: {reason}")]
    Undefined { metric: &'static str, reason: String },
}

impl MetricError {
    pub(crate) fn undefined(metric: &'static str, reason: impl Into<String>) -> Self {
        MetricError::Undefined {
            metric,
            reason: reason.into(),
        }
    }
}

/// Frustrated edges split by sign: positive edges across groups and negative
/// edges inside groups.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrustrationCount {
    pub frustrated_positive: usize,
    pub frustrated_negative: usize,
}

impl FrustrationCount {
    pub fn total(&self) -> usize {
        self.frustrated_positive + self.frustrated_negative
    }

    fn record(&mut self, sign: Sign, same_group: bool) {
        if sign.is_frustrated(same_group) {
            match sign {
                Sign::Positive => self.frustrated_positive += 1,
                Sign::Negative => self.frustrated_negative += 1,
            }
        }
    }
}

/// Frustration count of a network under a partition.
pub fn frustration_count(
    network: &SignedNetwork,
    partition: &Partition,
) -> Result<FrustrationCount, MetricError> {
    if !partition.same_nodes(network.nodes()) {
        let missing = network
            .nodes()
            .ids()
            .iter()
            .find(|id| partition.nodes().index_of(id).is_none());
        return Err(match missing {
            Some(id) => PartitionError::AssignmentIncomplete(id.clone()),
            None => PartitionError::NodeSetMismatch,
        }
        .into());
    }
    let mut count = FrustrationCount::default();
    for e in network.edges() {
        count.record(e.sign, partition.group(e.u) == partition.group(e.v));
    }
    Ok(count)
}

/// An interaction reduced to the groups of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupedInteraction {
    pub rater_group: usize,
    pub author_group: usize,
    pub sign: Sign,
}

impl GroupedInteraction {
    pub fn is_internal(&self) -> bool {
        self.rater_group == self.author_group
    }
}

/// Interactions of a subset mapped onto partition groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSubset {
    pub items: Vec<GroupedInteraction>,
    pub dropped: usize,
}

pub fn group_interactions(
    subset: &InteractionSubset,
    partition: &Partition,
    policy: MissingNodePolicy,
) -> Result<GroupedSubset, MetricError> {
    let mut items = Vec::with_capacity(subset.len());
    let mut dropped = 0;
    for it in subset.interactions() {
        let groups = (
            partition.group_of_id(&it.rater),
            partition.group_of_id(&it.author),
        );
        match groups {
            (Some(rater_group), Some(author_group)) => items.push(GroupedInteraction {
                rater_group,
                author_group,
                sign: it.sign,
            }),
            (r, _) => match policy {
                MissingNodePolicy::Drop => dropped += 1,
                MissingNodePolicy::Strict => {
                    let who = if r.is_none() { &it.rater } else { &it.author };
                    return Err(MetricError::MissingEndpoint(who.clone()));
                }
            },
        }
    }
    Ok(GroupedSubset { items, dropped })
}

/// Frustrated interactions in a subset; each occurrence counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetFrustration {
    pub count: FrustrationCount,
    pub evaluated: usize,
    pub dropped: usize,
}

pub fn interaction_frustration_count(
    subset: &InteractionSubset,
    partition: &Partition,
    policy: MissingNodePolicy,
) -> Result<SubsetFrustration, MetricError> {
    let grouped = group_interactions(subset, partition, policy)?;
    let mut count = FrustrationCount::default();
    for g in &grouped.items {
        count.record(g.sign, g.is_internal());
    }
    Ok(SubsetFrustration {
        count,
        evaluated: grouped.items.len(),
        dropped: grouped.dropped,
    })
}

/// Fraction of negative interactions in the subset.
pub fn antagonism(subset: &InteractionSubset) -> Result<f64, MetricError> {
    if subset.is_empty() {
        return Err(MetricError::undefined("antagonism", "empty subset"));
    }
    Ok(subset.negative_count() as f64 / subset.len() as f64)
}
