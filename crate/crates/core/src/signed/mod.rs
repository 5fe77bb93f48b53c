//! Signed graphs, partitions and the frustration count.

mod frustration;
mod interaction;
mod network;
mod partition;
mod subset;

pub use frustration::{
    antagonism, frustration_count, group_interactions, interaction_frustration_count,
    FrustrationCount, GroupedInteraction, GroupedSubset, MetricError, MissingNodePolicy,
    SubsetFrustration,
};
pub use interaction::{Interaction, InteractionError, Sign};
pub use network::{EdgeEvidence, GraphError, NodeMap, SignedEdge, SignedNetwork};
pub use partition::{canonical_labels, Partition, PartitionError};
pub use subset::{InteractionSubset, Selector, TimeWindow};
