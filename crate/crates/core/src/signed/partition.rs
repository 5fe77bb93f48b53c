use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::network::NodeMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("node `{0}` has no group assignment")]
    AssignmentIncomplete(String),
    #[error("node `{node}` assigned to group {group}, but k = {k}")]
    GroupOutOfRange { node: String, group: usize, k: usize },
    #[error("partition must have k >= 1")]
    ZeroGroups,
    #[error("partition has no non-empty group")]
    Empty,
    #[error("node `{0}` is not part of the network")]
    UnknownNode(String),
    #[error("node `{0}` assigned twice")]
    DuplicateNode(String),
    #[error("partition and network are defined over different node sets")]
    NodeSetMismatch,
}

/// Assignment of every node of a network to one of `k` groups.
///
/// Group labels are canonical: groups are ordered by descending size, ties by
/// their smallest node index, with empty groups last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    nodes: Arc<NodeMap>,
    groups: Vec<u32>,
    k: usize,
}

impl Partition {
    pub fn new(nodes: Arc<NodeMap>, groups: Vec<u32>, k: usize) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::ZeroGroups);
        }
        if groups.len() != nodes.len() {
            let missing = nodes.len().min(groups.len());
            return Err(if groups.len() < nodes.len() {
                PartitionError::AssignmentIncomplete(nodes.id(missing).to_string())
            } else {
                PartitionError::NodeSetMismatch
            });
        }
        if groups.is_empty() {
            return Err(PartitionError::Empty);
        }
        if let Some((i, &g)) = groups.iter().enumerate().find(|(_, &g)| g as usize >= k) {
            return Err(PartitionError::GroupOutOfRange {
                node: nodes.id(i).to_string(),
                group: g as usize,
                k,
            });
        }
        let groups = canonical_labels(&groups, k);
        Ok(Partition { nodes, groups, k })
    }

    /// Builds a partition from `(node id, group)` pairs; every node must appear once.
    pub fn from_pairs<I, S>(nodes: Arc<NodeMap>, pairs: I, k: usize) -> Result<Self, PartitionError>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: AsRef<str>,
    {
        let mut groups: Vec<Option<u32>> = vec![None; nodes.len()];
        for (id, g) in pairs {
            let id = id.as_ref();
            let idx = nodes
                .index_of(id)
                .ok_or_else(|| PartitionError::UnknownNode(id.to_string()))?;
            if groups[idx].replace(g).is_some() {
                return Err(PartitionError::DuplicateNode(id.to_string()));
            }
        }
        let groups = groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| g.ok_or_else(|| PartitionError::AssignmentIncomplete(nodes.id(i).to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(nodes, groups, k)
    }

    /// Everyone in group 0.
    pub fn single(nodes: Arc<NodeMap>) -> Result<Self, PartitionError> {
        let n = nodes.len();
        Self::new(nodes, vec![0; n], 1)
    }

    pub fn nodes(&self) -> &Arc<NodeMap> {
        &self.nodes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, node: usize) -> usize {
        self.groups[node] as usize
    }

    pub fn group_of_id(&self, id: &str) -> Option<usize> {
        self.nodes.index_of(id).map(|i| self.group(i))
    }

    pub fn assignment(&self) -> &[u32] {
        &self.groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.groups {
            sizes[g as usize] += 1;
        }
        sizes
    }

    pub fn non_empty_groups(&self) -> usize {
        self.group_sizes().iter().filter(|&&s| s > 0).count()
    }

    /// Node indices of each group.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &g) in self.groups.iter().enumerate() {
            out[g as usize].push(i);
        }
        out
    }

    pub(crate) fn same_nodes(&self, other: &NodeMap) -> bool {
        Arc::as_ptr(&self.nodes) == other as *const NodeMap || *self.nodes == *other
    }
}

/// Relabels groups into canonical order.
pub fn canonical_labels(groups: &[u32], k: usize) -> Vec<u32> {
    let mut size = vec![0usize; k];
    let mut first = vec![usize::MAX; k];
    for (i, &g) in groups.iter().enumerate() {
        let g = g as usize;
        size[g] += 1;
        if first[g] == usize::MAX {
            first[g] = i;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        size[b]
            .cmp(&size[a])
            .then(first[a].cmp(&first[b]))
            .then(a.cmp(&b))
    });
    let mut relabel = vec![0u32; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new as u32;
    }
    groups.iter().map(|&g| relabel[g as usize]).collect()
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Partition", 2)?;
        s.serialize_field("k", &self.k)?;
        let pairs: Vec<(&str, u32)> = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, &g)| (self.nodes.id(i), g))
            .collect();
        s.serialize_field("assignment", &pairs)?;
        s.end()
    }
}
