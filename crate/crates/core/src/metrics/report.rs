use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_ci, BootstrapMetric};
use super::null_model::{null_ensemble, NullModelConfig};
use super::slots::SlotSet;
use super::{normalize_metric, normalized_line_index};
use crate::seed::derive_seed;
use crate::signed::{
    antagonism, group_interactions, InteractionSubset, MetricError, MissingNodePolicy, Partition,
    SignedNetwork,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub null: NullModelConfig,
    pub bootstrap_resamples: usize,
    pub missing_nodes: MissingNodePolicy,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            null: NullModelConfig::default(),
            bootstrap_resamples: 10_000,
            missing_nodes: MissingNodePolicy::Drop,
        }
    }
}

impl MetricsConfig {
    /// Same configuration with the random streams re-seeded.
    pub fn reseeded(&self, seed: u64) -> Self {
        MetricsConfig {
            null: NullModelConfig {
                seed,
                ..self.null
            },
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementCounts {
    pub internal: u64,
    pub external: u64,
    pub positive: u64,
    pub negative: u64,
}

/// A raw proportion next to its null-model mean and normalized value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedMetric {
    pub raw: f64,
    pub null_mean: f64,
    pub normalized: f64,
    /// Bootstrap interval of the raw value.
    pub ci95: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupContribution {
    pub group: usize,
    pub coh_raw: f64,
    pub coh_norm: f64,
    pub div_raw: f64,
    pub div_norm: f64,
}

/// Polarization metrics of one target (relation network or interaction subset)
/// against a fixed partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub selector: String,
    /// Elements in the target: edges for a network, interactions for a subset.
    pub n_interactions: usize,
    pub evaluated: usize,
    pub dropped: usize,
    pub k: usize,
    pub counts: ElementCounts,
    pub antagonism: f64,
    pub frustrated: u64,
    pub sai: f64,
    pub sai_ci95: (f64, f64),
    pub sai_excluded: usize,
    pub null_instances: usize,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_index: Option<f64>,
    pub cohesiveness: Option<NormalizedMetric>,
    pub divisiveness: Option<NormalizedMetric>,
    pub groups: Vec<GroupContribution>,
}

fn build_report(
    selector: String,
    n_interactions: usize,
    dropped: usize,
    antagonism: f64,
    slots: &SlotSet,
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricError> {
    let seed = config.null.seed;
    let null_cfg = NullModelConfig {
        instances: config.null.instances,
        seed: derive_seed(seed, 0),
    };
    let null = null_ensemble(slots, &null_cfg)?;
    let raw = slots.cohdiv();

    let mut wanted = Vec::new();
    if raw.cohesiveness.is_some() {
        wanted.push(BootstrapMetric::Cohesiveness);
    }
    if raw.divisiveness.is_some() {
        wanted.push(BootstrapMetric::Divisiveness);
    }
    let mut coh_ci = None;
    let mut div_ci = None;
    if config.bootstrap_resamples > 0 && !wanted.is_empty() {
        for m in wanted {
            match bootstrap_ci(slots, &[m], config.bootstrap_resamples, derive_seed(seed, 1)) {
                Ok(ci) => {
                    let iv = Some((ci[0].lo, ci[0].hi));
                    match m {
                        BootstrapMetric::Cohesiveness => coh_ci = iv,
                        BootstrapMetric::Divisiveness => div_ci = iv,
                    }
                }
                Err(e) => log::warn!("{selector}: {e}"),
            }
        }
    }

    let normalized = |raw: Option<f64>, null_mean: Option<f64>, ci95| {
        let (raw, null_mean) = (raw?, null_mean?);
        Some(NormalizedMetric {
            raw,
            null_mean,
            normalized: normalize_metric(raw, null_mean),
            ci95,
        })
    };
    let groups = (0..slots.k())
        .map(|g| GroupContribution {
            group: g,
            coh_raw: raw.coh_by_group[g],
            coh_norm: normalize_metric(raw.coh_by_group[g], null.coh_by_group_mean[g]),
            div_raw: raw.div_by_group[g],
            div_norm: normalize_metric(raw.div_by_group[g], null.div_by_group_mean[g]),
        })
        .collect();

    let negative = slots.total_negative();
    Ok(MetricsReport {
        selector,
        n_interactions,
        evaluated: slots.total() as usize,
        dropped,
        k: slots.k(),
        counts: ElementCounts {
            internal: slots.internal(),
            external: slots.external(),
            positive: slots.total() - negative,
            negative,
        },
        antagonism,
        frustrated: null.frustrated,
        sai: null.sai,
        sai_ci95: null.sai_ci95,
        sai_excluded: null.excluded,
        null_instances: null.instances,
        degenerate: null.degenerate,
        line_index: None,
        cohesiveness: normalized(raw.cohesiveness, null.cohesiveness_mean, coh_ci),
        divisiveness: normalized(raw.divisiveness, null.divisiveness_mean, div_ci),
        groups,
    })
}

/// Metrics of a relation network under its partition (global alignment).
pub fn evaluate_network(
    network: &SignedNetwork,
    partition: &Partition,
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricError> {
    let m = network.edge_count();
    if m == 0 {
        return Err(MetricError::undefined("antagonism", "network has no edges"));
    }
    let slots = SlotSet::from_network(network, partition)?;
    let antagonism = network.negative_edge_count() as f64 / m as f64;
    let mut report = build_report("network".into(), m, 0, antagonism, &slots, config)?;
    report.line_index = Some(normalized_line_index(m, report.frustrated as usize)?);
    Ok(report)
}

/// Metrics of an interaction subset against a fixed partition.
pub fn evaluate_subset(
    subset: &InteractionSubset,
    partition: &Partition,
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricError> {
    let antagonism = antagonism(subset)?;
    let grouped = group_interactions(subset, partition, config.missing_nodes)?;
    let slots = SlotSet::from_grouped(&grouped, partition.k());
    build_report(
        subset.selector().to_string(),
        subset.len(),
        grouped.dropped,
        antagonism,
        &slots,
        config,
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsReport {
    /// Flat CSV header for batch runs over `k` groups.
    pub fn csv_header(k: usize) -> Vec<String> {
        let mut h: Vec<String> = [
            "selector",
            "n_interactions",
            "antagonism",
            "sai",
            "sai_lo",
            "sai_hi",
            "coh_raw",
            "coh_norm",
            "div_raw",
            "div_norm",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend((0..k).map(|g| format!("coh_norm_g{g}")));
        h.extend((0..k).map(|g| format!("div_norm_g{g}")));
        h
    }

    pub fn csv_record(&self) -> Vec<String> {
        let coh = self.cohesiveness;
        let div = self.divisiveness;
        let mut r = vec![
            self.selector.clone(),
            self.n_interactions.to_string(),
            self.antagonism.to_string(),
            self.sai.to_string(),
            self.sai_ci95.0.to_string(),
            self.sai_ci95.1.to_string(),
            fmt_opt(coh.map(|m| m.raw)),
            fmt_opt(coh.map(|m| m.normalized)),
            fmt_opt(div.map(|m| m.raw)),
            fmt_opt(div.map(|m| m.normalized)),
        ];
        r.extend(self.groups.iter().map(|g| fmt_opt(coh.map(|_| g.coh_norm))));
        r.extend(self.groups.iter().map(|g| fmt_opt(div.map(|_| g.div_norm))));
        r
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::signed::{Interaction, NodeMap, Sign};

    fn partition() -> Partition {
        let nodes = Arc::new(NodeMap::new(["a", "b", "c", "d"]).unwrap());
        Partition::from_pairs(nodes, [("a", 0), ("b", 0), ("c", 1), ("d", 1)], 2).unwrap()
    }

    fn subset(rows: &[(&str, &str, i8)]) -> InteractionSubset {
        InteractionSubset::whole(
            rows.iter()
                .map(|&(r, a, s)| Interaction::new(r, a, Sign::from_i8(s).unwrap(), 0).unwrap())
                .collect(),
        )
    }

    fn quick() -> MetricsConfig {
        MetricsConfig {
            null: NullModelConfig {
                instances: 2_000,
                seed: 1,
            },
            bootstrap_resamples: 500,
            ..MetricsConfig::default()
        }
    }

    #[test]
    fn aligned_subset_report() {
        let s = subset(&[
            ("a", "b", 1),
            ("c", "d", 1),
            ("a", "c", -1),
            ("d", "b", -1),
            ("b", "a", 1),
            ("x", "a", -1),
        ]);
        let r = evaluate_subset(&s, &partition(), &quick()).unwrap();
        assert_eq!(r.sai, 1.0);
        assert_eq!(r.dropped, 1);
        assert_eq!(r.evaluated, 5);
        assert_eq!(r.n_interactions, 6);
        assert_eq!(r.antagonism, 0.5);
        let coh = r.cohesiveness.unwrap();
        assert_eq!(coh.raw, 1.0);
        let sum: f64 = r.groups.iter().map(|g| g.coh_raw).sum();
        assert!((sum - coh.raw).abs() < 1e-12);
        assert_eq!(r.csv_record().len(), MetricsReport::csv_header(2).len());
    }

    #[test]
    fn empty_subset_is_undefined() {
        assert!(evaluate_subset(&subset(&[]), &partition(), &quick()).is_err());
    }

    #[test]
    fn csv_header_order() {
        assert_eq!(
            MetricsReport::csv_header(2).join(","),
            "selector,n_interactions,antagonism,sai,sai_lo,sai_hi,coh_raw,coh_norm,div_raw,div_norm,\
             coh_norm_g0,coh_norm_g1,div_norm_g0,div_norm_g1"
        );
    }
}
