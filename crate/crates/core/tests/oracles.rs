//! Independent reference computations checked against the library.

use std::collections::BTreeSet;
use std::sync::Arc;

use faultline::metrics::{
    bootstrap_ci, null_ensemble, sample_null_negatives, shuffle_signs, BootstrapMetric,
    NullModelConfig, SlotSet,
};
use faultline::partitioner::{solve_anneal, solve_exact, AnnealConfig, ExactConfig};
use faultline::seed::rng_for;
use faultline::signed::{
    frustration_count, group_interactions, Interaction, InteractionSubset, MissingNodePolicy,
    NodeMap, Partition, Sign, SignedEdge, SignedNetwork,
};
use rand::Rng;

fn random_network(n: usize, m: usize, p_neg: f64, seed: u64) -> SignedNetwork {
    let mut rng = rng_for(seed, 0);
    let mut pairs = BTreeSet::new();
    let m = m.min(n * (n - 1) / 2);
    while pairs.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            let sign = if rng.random::<f64>() < p_neg { Sign::Negative } else { Sign::Positive };
            SignedEdge::new(a, b, sign)
        })
        .collect();
    let nodes = Arc::new(NodeMap::new((0..n).map(|i| format!("v{i:02}"))).unwrap());
    SignedNetwork::from_indexed(nodes, edges).unwrap()
}

/// Minimum frustration over every assignment that uses all `k` groups.
fn naive_min_frustration(net: &SignedNetwork, k: usize) -> usize {
    let n = net.node_count();
    let mut groups = vec![0usize; n];
    let mut best = usize::MAX;
    loop {
        let mut used = vec![false; k];
        for &g in &groups {
            used[g] = true;
        }
        if used.iter().all(|&u| u) {
            let f = net
                .edges()
                .iter()
                .filter(|e| e.sign.is_frustrated(groups[e.u] == groups[e.v]))
                .count();
            best = best.min(f);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            groups[i] += 1;
            if groups[i] < k {
                break;
            }
            groups[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn exact_matches_enumeration() {
    for seed in 0..30 {
        let n = 4 + (seed as usize % 7);
        let net = random_network(n, 2 * n, 0.5, seed);
        for k in [1, 2, 3] {
            let got = solve_exact(&net, k, &ExactConfig::default()).unwrap();
            assert_eq!(got.frustration, naive_min_frustration(&net, k), "seed {seed} n {n} k {k}");
            assert_eq!(got.partition.non_empty_groups(), k);
            let recount = frustration_count(&net, &got.partition).unwrap();
            assert_eq!(recount.total(), got.frustration);
        }
    }
}

#[test]
fn anneal_never_beats_exact_and_usually_matches() {
    let mut matched = 0;
    for seed in 0..10 {
        let net = random_network(12, 30, 0.4, 100 + seed);
        let exact = solve_exact(&net, 2, &ExactConfig::default()).unwrap();
        let cfg = AnnealConfig {
            restarts: 30,
            seed,
            ..AnnealConfig::default()
        };
        let approx = solve_anneal(&net, 2, &cfg).unwrap();
        assert!(approx.frustration >= exact.frustration);
        assert_eq!(approx.restart_best.len(), 30);
        assert_eq!(approx.frustration, *approx.restart_best.iter().min().unwrap());
        matched += (approx.frustration == exact.frustration) as usize;
    }
    assert!(matched >= 9, "anneal matched exact on {matched}/10");
}

fn subset(rows: &[(&str, &str, i8)]) -> InteractionSubset {
    InteractionSubset::whole(
        rows.iter()
            .map(|&(r, a, s)| Interaction::new(r, a, Sign::from_i8(s).unwrap(), 0).unwrap())
            .collect(),
    )
}

fn two_groups() -> Partition {
    let nodes = Arc::new(NodeMap::new(["a", "b", "c", "d", "e"]).unwrap());
    Partition::from_pairs(nodes, [("a", 0), ("b", 0), ("e", 0), ("c", 1), ("d", 1)], 2).unwrap()
}

/// Expected `1 - L / L~` over all placements of the negatives, skipping
/// placements with `L~ = 0`.
fn exact_sai(internal: &[bool], negative: &[bool]) -> Option<f64> {
    let m = internal.len();
    let observed = internal
        .iter()
        .zip(negative)
        .filter(|(&i, &neg)| i == neg)
        .count();
    let negatives = negative.iter().filter(|&&x| x).count();
    let mut sum = 0.0;
    let mut count = 0usize;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != negatives {
            continue;
        }
        let l = (0..m)
            .filter(|&i| internal[i] == (mask >> i & 1 == 1))
            .count();
        if l > 0 {
            sum += 1.0 - observed as f64 / l as f64;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

#[test]
fn monte_carlo_sai_tracks_enumeration() {
    let cases: [&[(&str, &str, i8)]; 4] = [
        &[("a", "b", 1), ("c", "d", 1), ("a", "c", -1), ("b", "d", 1), ("e", "c", -1)],
        &[("a", "b", -1), ("c", "d", 1), ("a", "c", 1), ("b", "d", -1), ("e", "a", 1), ("d", "e", -1)],
        &[("a", "b", 1), ("b", "a", 1), ("a", "c", -1), ("c", "a", 1), ("d", "c", 1), ("e", "d", -1), ("a", "e", 1)],
        &[("a", "c", -1), ("b", "c", -1), ("c", "d", 1), ("a", "b", 1), ("d", "a", 1), ("e", "b", -1), ("b", "e", 1), ("c", "a", -1)],
    ];
    let p = two_groups();
    for (i, rows) in cases.iter().enumerate() {
        let s = subset(rows);
        let g = group_interactions(&s, &p, MissingNodePolicy::Strict).unwrap();
        let internal: Vec<bool> = g.items.iter().map(|x| x.rater_group == x.author_group).collect();
        let negative: Vec<bool> = g.items.iter().map(|x| x.sign.is_negative()).collect();
        let want = exact_sai(&internal, &negative).unwrap();
        let slots = SlotSet::from_grouped(&g, 2);
        let got = null_ensemble(&slots, &NullModelConfig { instances: 20_000, seed: i as u64 }).unwrap();
        assert!((got.sai - want).abs() < 0.03, "case {i}: mc {} vs exact {want}", got.sai);
    }
}

#[test]
fn balanced_subset_is_exactly_one() {
    let s = subset(&[("a", "b", 1), ("c", "d", 1), ("a", "c", -1), ("d", "e", -1), ("e", "a", 1)]);
    let g = group_interactions(&s, &two_groups(), MissingNodePolicy::Strict).unwrap();
    let e = null_ensemble(&SlotSet::from_grouped(&g, 2), &NullModelConfig { instances: 1_000, seed: 0 }).unwrap();
    assert_eq!(e.sai, 1.0);
}

#[test]
fn count_sampler_matches_literal_shuffle() {
    // same mean frustration and same spread under both samplers
    let net = random_network(14, 40, 0.35, 7);
    let nodes = net.nodes().clone();
    let part = Partition::new(nodes, (0..14).map(|i| (i % 2) as u32).collect(), 2).unwrap();
    let slots = SlotSet::from_network(&net, &part).unwrap();
    let signs: Vec<Sign> = net.edges().iter().map(|e| e.sign).collect();
    let mut rng = rng_for(99, 0);
    let draws = 20_000;
    let (mut a, mut a2, mut b, mut b2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..draws {
        let x = slots.frustrated_with(&sample_null_negatives(&slots, &mut rng)) as f64;
        let shuffled = net.with_signs(&shuffle_signs(&signs, &mut rng));
        let y = frustration_count(&shuffled, &part).unwrap().total() as f64;
        a += x;
        a2 += x * x;
        b += y;
        b2 += y * y;
    }
    let n = draws as f64;
    let (ma, mb) = (a / n, b / n);
    let (va, vb) = (a2 / n - ma * ma, b2 / n - mb * mb);
    assert!((ma - mb).abs() < 0.1, "means {ma} vs {mb}");
    assert!((va / vb - 1.0).abs() < 0.06, "variances {va} vs {vb}");
}

#[test]
fn null_divisiveness_mean_is_the_negative_share() {
    let net = random_network(40, 300, 0.3, 11);
    let part = Partition::new(net.nodes().clone(), (0..40).map(|i| (i % 3) as u32).collect(), 3).unwrap();
    let slots = SlotSet::from_network(&net, &part).unwrap();
    let share = net.negative_edge_count() as f64 / net.edge_count() as f64;
    let e = null_ensemble(&slots, &NullModelConfig { instances: 5_000, seed: 1 }).unwrap();
    assert!((e.divisiveness_mean.unwrap() - share).abs() < 0.005);
    assert!((e.cohesiveness_mean.unwrap() - (1.0 - share)).abs() < 0.005);
}

#[test]
fn bootstrap_interval_brackets_raw_value_and_narrows() {
    let part = two_groups();
    let mut rows = Vec::new();
    for i in 0..40 {
        rows.push(("a", "b", if i % 5 == 0 { -1 } else { 1 }));
        rows.push(("a", "c", if i % 4 == 0 { 1 } else { -1 }));
    }
    let small = subset(&rows[..20]);
    let large = subset(&rows);
    let width = |s: &InteractionSubset| {
        let g = group_interactions(s, &part, MissingNodePolicy::Strict).unwrap();
        let slots = SlotSet::from_grouped(&g, 2);
        let raw = slots.cohdiv();
        let ci = bootstrap_ci(&slots, &[BootstrapMetric::Cohesiveness, BootstrapMetric::Divisiveness], 4_000, 5).unwrap();
        assert!(ci[0].lo <= raw.cohesiveness.unwrap() && raw.cohesiveness.unwrap() <= ci[0].hi);
        assert!(ci[1].lo <= raw.divisiveness.unwrap() && raw.divisiveness.unwrap() <= ci[1].hi);
        ci[0].hi - ci[0].lo
    };
    assert!(width(&large) < width(&small));
}
