use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_common, Method, PartitionSolution, PartitionerError};
use crate::seed::{rng_for, StreamRng};
use crate::signed::{canonical_labels, Partition, Sign, SignedNetwork};

/// Simulated annealing schedule for the relocation search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub restarts: usize,
    /// Starting temperature; derived from `initial_acceptance` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_temperature: Option<f64>,
    /// Target share of accepted uphill moves at the starting temperature.
    pub initial_acceptance: f64,
    pub cooling_factor: f64,
    /// Relocation attempts per temperature level; the node count when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moves_per_temperature: Option<usize>,
    /// Consecutive levels without a new best before stopping.
    pub stall_levels: usize,
    /// Stalls only count once the temperature is below this fraction of the start.
    pub freeze_ratio: f64,
    pub max_levels: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            restarts: 200,
            initial_temperature: None,
            initial_acceptance: 0.8,
            cooling_factor: 0.95,
            moves_per_temperature: None,
            stall_levels: 3,
            freeze_ratio: 0.05,
            max_levels: 2_000,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<(), PartitionerError> {
        let bad = |msg: &str| Err(PartitionerError::InvalidConfig(msg.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be >= 1");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling_factor must be in (0, 1)");
        }
        if !(self.initial_acceptance > 0.0 && self.initial_acceptance < 1.0) {
            return bad("initial_acceptance must be in (0, 1)");
        }
        if let Some(t) = self.initial_temperature {
            if !(t > 0.0) {
                return bad("initial_temperature must be positive");
            }
        }
        if self.moves_per_temperature == Some(0) {
            return bad("moves_per_temperature must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.freeze_ratio) {
            return bad("freeze_ratio must be in [0, 1]");
        }
        Ok(())
    }
}

/// Best-of-restarts relocation search with simulated annealing.
///
/// Restart `i` draws from the stream `(config.seed, i)`, so the result does not
/// depend on how restarts are scheduled across threads.
pub fn solve_anneal(
    network: &SignedNetwork,
    k: usize,
    config: &AnnealConfig,
) -> Result<PartitionSolution, PartitionerError> {
    check_common(network, k)?;
    if k < 2 {
        return Err(PartitionerError::InvalidK { k, min: 2 });
    }
    config.validate()?;

    let runs: Vec<(usize, Vec<u32>)> = (0..config.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(config.seed, i as u64);
            let mut state = Relocation::random(network, k, &mut rng);
            state.anneal(config, &mut rng);
            (state.energy, canonical_labels(&state.group, k))
        })
        .collect();

    let restart_best = runs.iter().map(|(e, _)| *e).collect();
    let (_, best) = runs
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("restarts >= 1");
    let partition = Partition::new(network.nodes().clone(), best, k).expect("valid assignment");
    Ok(PartitionSolution::new(network, partition, Method::Anneal, restart_best))
}

/// Assignment plus per-node neighbour counts per group, for O(1) move deltas.
struct Relocation<'a> {
    network: &'a SignedNetwork,
    k: usize,
    group: Vec<u32>,
    sizes: Vec<usize>,
    pos_in: Vec<u32>,
    neg_in: Vec<u32>,
    pos_deg: Vec<u32>,
    energy: usize,
}

impl<'a> Relocation<'a> {
    fn random(network: &'a SignedNetwork, k: usize, rng: &mut StreamRng) -> Self {
        let n = network.node_count();
        let mut group: Vec<u32> = (0..n).map(|_| rng.random_range(0..k as u32)).collect();
        // seed every group with a distinct node so none starts empty
        let mut seeds: Vec<usize> = Vec::with_capacity(k);
        while seeds.len() < k {
            let v = rng.random_range(0..n);
            if !seeds.contains(&v) {
                seeds.push(v);
            }
        }
        for (g, &v) in seeds.iter().enumerate() {
            group[v] = g as u32;
        }
        Self::from_assignment(network, k, group)
    }

    fn from_assignment(network: &'a SignedNetwork, k: usize, group: Vec<u32>) -> Self {
        let n = network.node_count();
        let mut sizes = vec![0; k];
        for &g in &group {
            sizes[g as usize] += 1;
        }
        let mut pos_in = vec![0; n * k];
        let mut neg_in = vec![0; n * k];
        let mut pos_deg = vec![0; n];
        let mut energy = 0;
        for e in network.edges() {
            let (gu, gv) = (group[e.u] as usize, group[e.v] as usize);
            match e.sign {
                Sign::Positive => {
                    pos_in[e.u * k + gv] += 1;
                    pos_in[e.v * k + gu] += 1;
                    pos_deg[e.u] += 1;
                    pos_deg[e.v] += 1;
                }
                Sign::Negative => {
                    neg_in[e.u * k + gv] += 1;
                    neg_in[e.v * k + gu] += 1;
                }
            }
            if e.sign.is_frustrated(gu == gv) {
                energy += 1;
            }
        }
        Relocation {
            network,
            k,
            group,
            sizes,
            pos_in,
            neg_in,
            pos_deg,
            energy,
        }
    }

    #[inline]
    fn cost(&self, v: usize, g: usize) -> i64 {
        let i = v * self.k + g;
        self.neg_in[i] as i64 + self.pos_deg[v] as i64 - self.pos_in[i] as i64
    }

    #[inline]
    fn delta(&self, v: usize, to: usize) -> i64 {
        self.cost(v, to) - self.cost(v, self.group[v] as usize)
    }

    fn relocate(&mut self, v: usize, to: usize) {
        let from = self.group[v] as usize;
        let d = self.delta(v, to);
        self.energy = (self.energy as i64 + d) as usize;
        for &(w, sign) in self.network.neighbors(v) {
            let table = match sign {
                Sign::Positive => &mut self.pos_in,
                Sign::Negative => &mut self.neg_in,
            };
            table[w * self.k + from] -= 1;
            table[w * self.k + to] += 1;
        }
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.group[v] = to as u32;
    }

    /// Random node and different target group; `None` if the move would empty a group.
    fn propose(&self, rng: &mut StreamRng) -> Option<(usize, usize)> {
        let v = rng.random_range(0..self.group.len());
        let from = self.group[v] as usize;
        if self.sizes[from] <= 1 {
            return None;
        }
        let mut to = rng.random_range(0..self.k - 1);
        if to >= from {
            to += 1;
        }
        Some((v, to))
    }

    fn initial_temperature(&self, config: &AnnealConfig, rng: &mut StreamRng) -> f64 {
        if let Some(t) = config.initial_temperature {
            return t;
        }
        let samples = (2 * self.group.len()).max(32);
        let (sum, count) = (0..samples)
            .filter_map(|_| self.propose(rng))
            .map(|(v, to)| self.delta(v, to))
            .filter(|&d| d > 0)
            .fold((0i64, 0usize), |(s, c), d| (s + d, c + 1));
        if count == 0 {
            return 1.0;
        }
        let mean_uphill = sum as f64 / count as f64;
        -mean_uphill / config.initial_acceptance.ln()
    }

    fn anneal(&mut self, config: &AnnealConfig, rng: &mut StreamRng) {
        let n = self.group.len();
        let moves = config.moves_per_temperature.unwrap_or(n);
        let t0 = self.initial_temperature(config, rng);
        let mut temperature = t0;
        let mut best_energy = self.energy;
        let mut best = self.group.clone();
        let mut stall = 0;

        for _ in 0..config.max_levels {
            if best_energy == 0 {
                break;
            }
            let mut improved = false;
            for _ in 0..moves {
                let Some((v, to)) = self.propose(rng) else {
                    continue;
                };
                let d = self.delta(v, to);
                if d <= 0 || rng.random::<f64>() < (-(d as f64) / temperature).exp() {
                    self.relocate(v, to);
                    if self.energy < best_energy {
                        best_energy = self.energy;
                        best.copy_from_slice(&self.group);
                        improved = true;
                    }
                }
            }
            if improved || temperature > t0 * config.freeze_ratio {
                stall = 0;
            } else {
                stall += 1;
                if stall >= config.stall_levels {
                    break;
                }
            }
            temperature *= config.cooling_factor;
        }

        *self = Self::from_assignment(self.network, self.k, best);
        self.descend();
    }

    /// Best-improvement single-node moves until no move lowers the energy.
    fn descend(&mut self) {
        loop {
            let mut moved = false;
            for v in 0..self.group.len() {
                let from = self.group[v] as usize;
                if self.sizes[from] <= 1 {
                    continue;
                }
                let best = (0..self.k)
                    .filter(|&g| g != from)
                    .map(|g| (self.delta(v, g), g))
                    .min();
                if let Some((d, g)) = best {
                    if d < 0 {
                        self.relocate(v, g);
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitioner::{solve_exact, ExactConfig};
    use crate::signed::frustration_count;

    fn planted(n: usize) -> SignedNetwork {
        let names: Vec<String> = (0..n).map(|i| format!("v{i:03}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if (i * 7 + j * 13) % 3 == 0 {
                    let same = (i % 2) == (j % 2);
                    edges.push((names[i].clone(), names[j].clone(), Sign::balanced(same), None));
                }
            }
        }
        SignedNetwork::from_labelled(names.clone(), edges).unwrap()
    }

    #[test]
    fn recovers_balanced_network() {
        let g = planted(40);
        let cfg = AnnealConfig {
            restarts: 8,
            seed: 11,
            ..AnnealConfig::default()
        };
        let sol = solve_anneal(&g, 2, &cfg).unwrap();
        assert_eq!(sol.frustration, 0);
        assert_eq!(sol.restart_best.len(), 8);
        assert_eq!(sol.method, Method::Anneal);
    }

    #[test]
    fn energy_bookkeeping_matches_recount() {
        let g = planted(30);
        let mut rng = rng_for(3, 0);
        let mut state = Relocation::random(&g, 3, &mut rng);
        for _ in 0..500 {
            if let Some((v, to)) = state.propose(&mut rng) {
                state.relocate(v, to);
            }
        }
        let p = Partition::new(g.nodes().clone(), state.group.clone(), 3).unwrap();
        assert_eq!(state.energy, frustration_count(&g, &p).unwrap().total());
        assert!(state.sizes.iter().all(|&s| s > 0));
    }

    #[test]
    fn never_beats_exact() {
        let g = planted(14).with_signs(
            &(0..planted(14).edge_count())
                .map(|i| if i % 5 == 0 { Sign::Positive } else { Sign::Negative })
                .collect::<Vec<_>>(),
        );
        let exact = solve_exact(&g, 2, &ExactConfig::default()).unwrap();
        for seed in 0..5 {
            let cfg = AnnealConfig {
                restarts: 4,
                seed,
                ..AnnealConfig::default()
            };
            assert!(solve_anneal(&g, 2, &cfg).unwrap().frustration >= exact.frustration);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = planted(50);
        let cfg = AnnealConfig {
            restarts: 6,
            seed: 5,
            ..AnnealConfig::default()
        };
        let a = serde_json::to_string(&solve_anneal(&g, 3, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_anneal(&g, 3, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let g = planted(10);
        let cfg = AnnealConfig {
            cooling_factor: 1.0,
            ..AnnealConfig::default()
        };
        assert!(matches!(
            solve_anneal(&g, 2, &cfg),
            Err(PartitionerError::InvalidConfig(_))
        ));
        assert!(matches!(
            solve_anneal(&g, 1, &AnnealConfig::default()),
            Err(PartitionerError::InvalidK { .. })
        ));
    }
}
