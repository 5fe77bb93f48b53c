//! Fixtures shared by the benchmarks.

use faultline::signed::{Partition, SignedNetwork};
use faultline::synth::{generate_network, generate_stream, PlantedConfig, SyntheticStream, TemporalConfig};

/// Planted two-group network with 10% sign noise.
pub fn planted(n: usize, density: f64) -> (SignedNetwork, Partition) {
    generate_network(&PlantedConfig::new(n, 2, density, 0.1, 42)).expect("valid config")
}

/// Thirty days of interactions among `n` users at `rate_per_day`.
pub fn stream(n: usize, rate_per_day: f64) -> SyntheticStream {
    let mut cfg = PlantedConfig::new(n, 2, 0.3, 0.1, 42);
    cfg.temporal = Some(TemporalConfig {
        start: 1_600_000_000,
        duration: 30 * 86_400,
        rate_per_day,
        bursts: vec![],
        tags: vec![],
    });
    generate_stream(&cfg).expect("valid config")
}
