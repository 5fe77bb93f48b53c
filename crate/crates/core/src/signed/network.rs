use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::interaction::{validate_node_id, InteractionError, Sign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("parallel edge between `{0}` and `{1}`")]
    ParallelEdge(String, String),
    #[error("edge endpoint `{0}` is not a network node")]
    UnknownNode(String),
    #[error(transparent)]
    InvalidId(#[from] InteractionError),
}

/// Bidirectional mapping between opaque node ids and dense indices.
///
/// Indices follow the lexicographic order of the ids, so two maps built from
/// the same id set are identical regardless of insertion order.
#[derive(Debug, Clone, Default)]
pub struct NodeMap {
    ids: Vec<String>,
    index: HashMap<String, u32>,
}

impl PartialEq for NodeMap {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
    }
}

impl Eq for NodeMap {}

impl NodeMap {
    pub fn new<I, S>(ids: I) -> Result<Self, InteractionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        for id in &ids {
            validate_node_id(id)?;
        }
        ids.sort_unstable();
        ids.dedup();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        Ok(NodeMap { ids, index })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i as usize)
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

/// Aggregated rating evidence behind an inferred edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvidence {
    pub pos_count: u64,
    pub neg_count: u64,
    pub posterior_mean: f64,
    pub posterior_var: f64,
}

/// Undirected signed edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedEdge {
    pub u: usize,
    pub v: usize,
    pub sign: Sign,
    pub evidence: Option<EdgeEvidence>,
}

impl SignedEdge {
    pub fn new(a: usize, b: usize, sign: Sign) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        SignedEdge {
            u,
            v,
            sign,
            evidence: None,
        }
    }

    pub fn with_evidence(mut self, evidence: EdgeEvidence) -> Self {
        self.evidence = Some(evidence);
        self
    }
}

/// Undirected signed graph without parallel edges or self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedNetwork {
    nodes: Arc<NodeMap>,
    edges: Vec<SignedEdge>,
    adjacency: Vec<Vec<(usize, Sign)>>,
}

impl SignedNetwork {
    /// Builds a network over an indexed node set. Edges are sorted by `(u, v)`.
    pub fn from_indexed(nodes: Arc<NodeMap>, edges: Vec<SignedEdge>) -> Result<Self, GraphError> {
        let n = nodes.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut edges: Vec<SignedEdge> = edges
            .into_iter()
            .map(|e| {
                if e.u >= n {
                    return Err(GraphError::UnknownNode(format!("#{}", e.u)));
                }
                if e.v >= n {
                    return Err(GraphError::UnknownNode(format!("#{}", e.v)));
                }
                if e.u == e.v {
                    return Err(GraphError::SelfLoop(nodes.id(e.u).to_string()));
                }
                let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
                if !seen.insert((u, v)) {
                    return Err(GraphError::ParallelEdge(
                        nodes.id(u).to_string(),
                        nodes.id(v).to_string(),
                    ));
                }
                Ok(SignedEdge { u, v, ..e })
            })
            .collect::<Result<_, _>>()?;
        edges.sort_by_key(|e| (e.u, e.v));

        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.u].push((e.v, e.sign));
            adjacency[e.v].push((e.u, e.sign));
        }
        Ok(SignedNetwork {
            nodes,
            edges,
            adjacency,
        })
    }

    /// Builds a network from id-labelled edges. The node set is `extra_nodes`
    /// plus every edge endpoint.
    pub fn from_labelled<I, S>(
        extra_nodes: I,
        edges: Vec<(String, String, Sign, Option<EdgeEvidence>)>,
    ) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids = extra_nodes
            .into_iter()
            .map(Into::into)
            .chain(edges.iter().flat_map(|(a, b, _, _)| [a.clone(), b.clone()]));
        let nodes = Arc::new(NodeMap::new(ids)?);
        let indexed = edges
            .into_iter()
            .map(|(a, b, sign, evidence)| {
                let u = nodes.index_of(&a).expect("endpoint indexed");
                let v = nodes.index_of(&b).expect("endpoint indexed");
                if u == v {
                    return Err(GraphError::SelfLoop(a));
                }
                let mut e = SignedEdge::new(u, v, sign);
                e.evidence = evidence;
                Ok(e)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_indexed(nodes, indexed)
    }

    pub fn nodes(&self) -> &Arc<NodeMap> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, Sign)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn negative_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.sign.is_negative()).count()
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edge_count() - self.negative_edge_count()
    }

    /// Same topology with every sign replaced by `signs[i]` for edge `i`.
    pub fn with_signs(&self, signs: &[Sign]) -> SignedNetwork {
        assert_eq!(signs.len(), self.edges.len(), "one sign per edge");
        let edges = self
            .edges
            .iter()
            .zip(signs)
            .map(|(e, &sign)| SignedEdge { sign, ..*e })
            .collect();
        SignedNetwork::from_indexed(self.nodes.clone(), edges).expect("topology unchanged")
    }
}
