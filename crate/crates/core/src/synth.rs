//! Planted-partition signed networks and interaction streams.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::rng_for;
use crate::signed::{Interaction, NodeMap, Partition, SignedEdge, SignedNetwork, Sign};

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("cannot plant {k} groups on {n} nodes")]
    TooFewNodes { n: usize, k: usize },
    #[error("invalid planted configuration: {0}")]
    InvalidConfig(String),
    #[error("stream generation needs a temporal section")]
    MissingTemporal,
    #[error("stream duration must be positive")]
    EmptyDuration,
    #[error("planted network has no edges to draw interactions from")]
    NoPairs,
}

/// Interval whose interactions use a different sign-noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub start: i64,
    pub end: i64,
    pub sign_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalConfig {
    /// Epoch seconds of the first possible interaction.
    pub start: i64,
    /// Length of the stream in seconds.
    pub duration: i64,
    /// Expected interactions per day (Poisson).
    pub rate_per_day: f64,
    #[serde(default)]
    pub bursts: Vec<Burst>,
    /// Each interaction gets one tag drawn uniformly from this list, if non-empty.
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n: usize,
    pub k: usize,
    /// Group proportions; uniform when empty.
    #[serde(default)]
    pub group_weights: Vec<f64>,
    pub edge_density: f64,
    /// Probability of flipping the balance-consistent sign.
    pub sign_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalConfig>,
    #[serde(default)]
    pub seed: u64,
}

impl PlantedConfig {
    pub fn new(n: usize, k: usize, edge_density: f64, sign_noise: f64, seed: u64) -> Self {
        PlantedConfig {
            n,
            k,
            group_weights: Vec::new(),
            edge_density,
            sign_noise,
            temporal: None,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.k == 0 || self.n < self.k {
            return Err(SynthError::TooFewNodes { n: self.n, k: self.k });
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return bad(format!("edge_density {} not in (0, 1]", self.edge_density));
        }
        if !(0.0..=0.5).contains(&self.sign_noise) {
            return bad(format!("sign_noise {} not in [0, 0.5]", self.sign_noise));
        }
        if !self.group_weights.is_empty() {
            if self.group_weights.len() != self.k {
                return bad("group_weights needs one entry per group".into());
            }
            let sum: f64 = self.group_weights.iter().sum();
            if self.group_weights.iter().any(|&w| !(w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return bad("group_weights must be non-negative and sum to 1".into());
            }
        }
        if let Some(t) = &self.temporal {
            for b in &t.bursts {
                if !(0.0..=0.5).contains(&b.sign_noise) || b.end <= b.start {
                    return bad(format!("invalid burst {b:?}"));
                }
            }
            if !(t.rate_per_day >= 0.0) {
                return bad("rate_per_day must be non-negative".into());
            }
        }
        Ok(())
    }

    fn node_ids(&self) -> Vec<String> {
        let width = (self.n.max(2) - 1).to_string().len();
        (0..self.n).map(|i| format!("u{i:0width$}")).collect()
    }
}

/// Random signed network with balance-consistent signs flipped at rate `sign_noise`.
pub fn generate_network(config: &PlantedConfig) -> Result<(SignedNetwork, Partition), SynthError> {
    config.validate()?;
    let mut rng = rng_for(config.seed, 0);
    let weights = if config.group_weights.is_empty() {
        vec![1.0; config.k]
    } else {
        config.group_weights.clone()
    };
    let groups_dist = WeightedIndex::new(&weights)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let groups: Vec<u32> = (0..config.n).map(|_| groups_dist.sample(&mut rng) as u32).collect();

    let mut edges = Vec::new();
    for i in 0..config.n {
        for j in (i + 1)..config.n {
            if rng.random::<f64>() >= config.edge_density {
                continue;
            }
            let mut sign = Sign::balanced(groups[i] == groups[j]);
            if rng.random::<f64>() < config.sign_noise {
                sign = sign.flipped();
            }
            edges.push(SignedEdge::new(i, j, sign));
        }
    }
    let nodes = std::sync::Arc::new(NodeMap::new(config.node_ids()).expect("generated ids are valid"));
    let network = SignedNetwork::from_indexed(nodes.clone(), edges).expect("generated edges are valid");
    let planted = Partition::new(nodes, groups, config.k).expect("groups < k");
    Ok((network, planted))
}

#[derive(Debug, Clone)]
pub struct SyntheticStream {
    pub interactions: Vec<Interaction>,
    pub network: SignedNetwork,
    pub planted: Partition,
}

/// Timestamped interactions over the edges of the planted network.
///
/// Each interaction picks an edge uniformly and a random direction; its sign is
/// balance-consistent for the planted groups, flipped with the noise level in
/// force at its timestamp. Output is sorted by timestamp.
pub fn generate_stream(config: &PlantedConfig) -> Result<SyntheticStream, SynthError> {
    let temporal = config.temporal.as_ref().ok_or(SynthError::MissingTemporal)?;
    if temporal.duration <= 0 {
        return Err(SynthError::EmptyDuration);
    }
    let (network, planted) = generate_network(config)?;
    if network.edge_count() == 0 {
        return Err(SynthError::NoPairs);
    }
    let mut rng = rng_for(config.seed, 1);
    let expected = temporal.rate_per_day * temporal.duration as f64 / SECONDS_PER_DAY;
    let count = if expected > 0.0 {
        Poisson::new(expected)
            .map_err(|e| SynthError::InvalidConfig(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };

    let nodes = network.nodes();
    let mut interactions = Vec::with_capacity(count);
    for _ in 0..count {
        let t = temporal.start + rng.random_range(0..temporal.duration);
        let e = network.edges()[rng.random_range(0..network.edge_count())];
        let (rater, author) = if rng.random::<bool>() { (e.u, e.v) } else { (e.v, e.u) };
        let noise = temporal
            .bursts
            .iter()
            .find(|b| b.start <= t && t < b.end)
            .map_or(config.sign_noise, |b| b.sign_noise);
        let mut sign = Sign::balanced(planted.group(rater) == planted.group(author));
        if rng.random::<f64>() < noise {
            sign = sign.flipped();
        }
        let mut it = Interaction::new(nodes.id(rater), nodes.id(author), sign, t)
            .expect("distinct generated ids");
        if !temporal.tags.is_empty() {
            let tag = &temporal.tags[rng.random_range(0..temporal.tags.len())];
            it.tags.insert(tag.clone());
        }
        interactions.push(it);
    }
    interactions.sort_by_key(|it| it.timestamp);
    Ok(SyntheticStream {
        interactions,
        network,
        planted,
    })
}
