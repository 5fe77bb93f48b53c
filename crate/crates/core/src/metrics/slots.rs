use std::collections::BTreeMap;

use crate::signed::{GroupedSubset, MetricError, Partition, PartitionError, SignedNetwork};

/// Group pair of a set of signed elements. For undirected targets `source <= target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Category {
    pub source: usize,
    pub target: usize,
}

impl Category {
    pub fn is_internal(&self) -> bool {
        self.source == self.target
    }
}

/// Signed elements (edges or interactions) tallied by the groups of their
/// endpoints under a fixed partition.
///
/// Every metric here depends only on how many elements, and how many negative
/// ones, fall into each group pair; the null model and the bootstrap operate
/// on these tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSet {
    k: usize,
    directed: bool,
    categories: Vec<Category>,
    sizes: Vec<u64>,
    negatives: Vec<u64>,
}

/// Raw Cohesiveness and Divisiveness with additive per-group shares.
#[derive(Debug, Clone, PartialEq)]
pub struct CohDiv {
    pub cohesiveness: Option<f64>,
    pub divisiveness: Option<f64>,
    pub coh_by_group: Vec<f64>,
    pub div_by_group: Vec<f64>,
}

impl SlotSet {
    fn from_pairs<I>(k: usize, directed: bool, pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, bool)>,
    {
        let mut tally: BTreeMap<Category, (u64, u64)> = BTreeMap::new();
        for (a, b, negative) in pairs {
            let (source, target) = if directed || a <= b { (a, b) } else { (b, a) };
            let e = tally.entry(Category { source, target }).or_default();
            e.0 += 1;
            e.1 += negative as u64;
        }
        let mut categories = Vec::with_capacity(tally.len());
        let mut sizes = Vec::with_capacity(tally.len());
        let mut negatives = Vec::with_capacity(tally.len());
        for (c, (s, n)) in tally {
            categories.push(c);
            sizes.push(s);
            negatives.push(n);
        }
        SlotSet {
            k,
            directed,
            categories,
            sizes,
            negatives,
        }
    }

    /// Undirected edges of a relation network.
    pub fn from_network(network: &SignedNetwork, partition: &Partition) -> Result<Self, MetricError> {
        if partition.nodes().as_ref() != network.nodes().as_ref() {
            return Err(PartitionError::NodeSetMismatch.into());
        }
        Ok(Self::from_pairs(
            partition.k(),
            false,
            network
                .edges()
                .iter()
                .map(|e| (partition.group(e.u), partition.group(e.v), e.sign.is_negative())),
        ))
    }

    /// Directed interactions attributed to the rater's group.
    pub fn from_grouped(grouped: &GroupedSubset, k: usize) -> Self {
        Self::from_pairs(
            k,
            true,
            grouped
                .items
                .iter()
                .map(|g| (g.rater_group, g.author_group, g.sign.is_negative())),
        )
    }

    pub(crate) fn set_counts(&mut self, sizes: Vec<u64>, negatives: Vec<u64>) {
        debug_assert_eq!(sizes.len(), self.categories.len());
        debug_assert!(sizes.iter().zip(&negatives).all(|(s, n)| n <= s));
        self.sizes = sizes;
        self.negatives = negatives;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn negatives(&self) -> &[u64] {
        &self.negatives
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    pub fn total_negative(&self) -> u64 {
        self.negatives.iter().sum()
    }

    pub fn internal(&self) -> u64 {
        self.sum_where(&self.sizes, true)
    }

    pub fn external(&self) -> u64 {
        self.sum_where(&self.sizes, false)
    }

    fn sum_where(&self, values: &[u64], internal: bool) -> u64 {
        self.categories
            .iter()
            .zip(values)
            .filter(|(c, _)| c.is_internal() == internal)
            .map(|(_, v)| v)
            .sum()
    }

    /// Frustrated elements for the given negatives per category.
    pub fn frustrated_with(&self, negatives: &[u64]) -> u64 {
        self.categories
            .iter()
            .zip(self.sizes.iter().zip(negatives))
            .map(|(c, (&size, &neg))| if c.is_internal() { neg } else { size - neg })
            .sum()
    }

    pub fn frustrated(&self) -> u64 {
        self.frustrated_with(&self.negatives)
    }

    pub fn cohdiv(&self) -> CohDiv {
        self.cohdiv_with(&self.negatives)
    }

    /// Cohesiveness and Divisiveness for the given negatives per category.
    pub fn cohdiv_with(&self, negatives: &[u64]) -> CohDiv {
        let internal = self.internal() as f64;
        let external = self.external() as f64;
        let mut coh_by_group = vec![0.0; self.k];
        let mut div_by_group = vec![0.0; self.k];
        for (c, (&size, &neg)) in self.categories.iter().zip(self.sizes.iter().zip(negatives)) {
            if c.is_internal() {
                coh_by_group[c.source] += (size - neg) as f64;
            } else if self.directed {
                div_by_group[c.source] += neg as f64;
            } else {
                div_by_group[c.source] += 0.5 * neg as f64;
                div_by_group[c.target] += 0.5 * neg as f64;
            }
        }
        let scale = |v: &mut Vec<f64>, d: f64| {
            for x in v.iter_mut() {
                *x = if d > 0.0 { *x / d } else { 0.0 };
            }
        };
        let positive_internal: f64 = coh_by_group.iter().sum();
        let negative_external: f64 = div_by_group.iter().sum();
        scale(&mut coh_by_group, internal);
        scale(&mut div_by_group, external);
        CohDiv {
            cohesiveness: (internal > 0.0).then(|| positive_internal / internal),
            divisiveness: (external > 0.0).then(|| negative_external / external),
            coh_by_group,
            div_by_group,
        }
    }
}
