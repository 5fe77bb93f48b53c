use serde::{Deserialize, Serialize};

use super::{check_common, Method, PartitionSolution, PartitionerError};
use crate::signed::{canonical_labels, Partition, Sign, SignedNetwork};

/// Size limits for exhaustive search.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactConfig {
    /// Overrides the per-k default cap (25 nodes for k <= 2, 16 for k = 3, 13 above).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_nodes: Option<usize>,
}

impl ExactConfig {
    pub fn cap_for(&self, k: usize) -> usize {
        self.max_nodes.unwrap_or(match k {
            0..=2 => 25,
            3 => 16,
            _ => 13,
        })
    }
}

/// Minimum-frustration partition into exactly `k` non-empty groups.
///
/// Branch and bound over node assignments. Group labels follow a restricted
/// growth order so each unordered partition is visited once. Among optimal
/// partitions the lexicographically smallest canonical assignment is returned.
pub fn solve_exact(
    network: &SignedNetwork,
    k: usize,
    config: &ExactConfig,
) -> Result<PartitionSolution, PartitionerError> {
    check_common(network, k)?;
    let n = network.node_count();
    let cap = config.cap_for(k);
    if n > cap {
        return Err(PartitionerError::SizeLimit { n, k, cap });
    }
    let mut search = Search::new(network, k);
    search.descend(0, 0);
    let best = search.best.expect("n >= k guarantees a feasible assignment");
    let partition = Partition::new(network.nodes().clone(), best, k).expect("valid assignment");
    Ok(PartitionSolution::new(network, partition, Method::Exact, Vec::new()))
}

const UNASSIGNED: u32 = u32::MAX;

struct Search<'a> {
    network: &'a SignedNetwork,
    k: usize,
    order: Vec<usize>,
    group: Vec<u32>,
    // per node and group: positive / negative edges to assigned neighbours in that group
    pos_to: Vec<u32>,
    neg_to: Vec<u32>,
    pos_assigned: Vec<u32>,
    // sum over unassigned nodes of their cheapest group cost
    slack: usize,
    cost: usize,
    best_cost: usize,
    best: Option<Vec<u32>>,
}

impl<'a> Search<'a> {
    fn new(network: &'a SignedNetwork, k: usize) -> Self {
        let n = network.node_count();
        Search {
            network,
            k,
            order: connectivity_order(network),
            group: vec![UNASSIGNED; n],
            pos_to: vec![0; n * k],
            neg_to: vec![0; n * k],
            pos_assigned: vec![0; n],
            slack: 0,
            cost: 0,
            best_cost: usize::MAX,
            best: None,
        }
    }

    #[inline]
    fn place_cost(&self, v: usize, g: usize) -> usize {
        (self.neg_to[v * self.k + g] + self.pos_assigned[v] - self.pos_to[v * self.k + g]) as usize
    }

    fn min_cost(&self, v: usize) -> usize {
        (0..self.k).map(|g| self.place_cost(v, g)).min().unwrap_or(0)
    }

    fn assign(&mut self, v: usize, g: usize) {
        self.slack -= self.min_cost(v);
        self.cost += self.place_cost(v, g);
        self.group[v] = g as u32;
        for &(w, sign) in self.network.neighbors(v) {
            if self.group[w] != UNASSIGNED {
                continue;
            }
            let before = self.min_cost(w);
            match sign {
                Sign::Positive => {
                    self.pos_to[w * self.k + g] += 1;
                    self.pos_assigned[w] += 1;
                }
                Sign::Negative => self.neg_to[w * self.k + g] += 1,
            }
            self.slack = self.slack + self.min_cost(w) - before;
        }
    }

    fn unassign(&mut self, v: usize) {
        let g = self.group[v] as usize;
        for &(w, sign) in self.network.neighbors(v) {
            if self.group[w] != UNASSIGNED {
                continue;
            }
            let before = self.min_cost(w);
            match sign {
                Sign::Positive => {
                    self.pos_to[w * self.k + g] -= 1;
                    self.pos_assigned[w] -= 1;
                }
                Sign::Negative => self.neg_to[w * self.k + g] -= 1,
            }
            self.slack = self.slack + self.min_cost(w) - before;
        }
        self.group[v] = UNASSIGNED;
        self.cost -= self.place_cost(v, g);
        self.slack += self.min_cost(v);
    }

    fn descend(&mut self, depth: usize, used: usize) {
        let n = self.order.len();
        if depth == n {
            if used < self.k {
                return;
            }
            let canon = canonical_labels(&self.group, self.k);
            let better = self.cost < self.best_cost
                || (self.cost == self.best_cost && self.best.as_ref().is_some_and(|b| canon < *b));
            if better {
                self.best_cost = self.cost;
                self.best = Some(canon);
            }
            return;
        }
        let v = self.order[depth];
        let remaining_after = n - depth - 1;
        let open_limit = (used + 1).min(self.k);
        let mut candidates: Vec<(usize, usize)> = (0..open_limit)
            .filter(|&g| {
                let used_after = if g == used { used + 1 } else { used };
                remaining_after >= self.k - used_after
            })
            .map(|g| (self.place_cost(v, g), g))
            .collect();
        candidates.sort_unstable();
        for (c, g) in candidates {
            // bound: assigned cost + cost of v + cheapest placement of every other unassigned node
            let bound = self.cost + c + self.slack - self.min_cost(v);
            if bound > self.best_cost {
                continue;
            }
            self.assign(v, g);
            let used_after = if g == used { used + 1 } else { used };
            self.descend(depth + 1, used_after);
            self.unassign(v);
        }
    }
}

/// Visits nodes so that each next node has as many already-visited neighbours
/// as possible, which tightens bounds early.
fn connectivity_order(network: &SignedNetwork) -> Vec<usize> {
    let n = network.node_count();
    let mut visited = vec![false; n];
    let mut links = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !visited[v])
            .max_by(|&a, &b| {
                links[a]
                    .cmp(&links[b])
                    .then(network.degree(a).cmp(&network.degree(b)))
                    .then(b.cmp(&a))
            })
            .expect("unvisited node remains");
        visited[next] = true;
        order.push(next);
        for &(w, _) in network.neighbors(next) {
            links[w] += 1;
        }
    }
    order
}
