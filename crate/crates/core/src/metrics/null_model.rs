use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slots::SlotSet;
use crate::seed::rng_for;
use crate::signed::{MetricError, Sign};
use crate::stats::interval95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NullModelConfig {
    pub instances: usize,
    pub seed: u64,
}

impl Default for NullModelConfig {
    fn default() -> Self {
        NullModelConfig {
            instances: 10_000,
            seed: 0,
        }
    }
}

/// Negatives per category after a uniform shuffle of all signs over the
/// fixed elements.
///
/// Equivalent in distribution to permuting the sign multiset: the negatives
/// landing in each category follow a multivariate hypergeometric law, drawn
/// here one category at a time.
pub fn sample_null_negatives<R: Rng + ?Sized>(slots: &SlotSet, rng: &mut R) -> Vec<u64> {
    let mut remaining_total = slots.total();
    let mut remaining_neg = slots.total_negative();
    slots
        .sizes()
        .iter()
        .map(|&size| {
            let drawn = if remaining_neg == 0 {
                0
            } else if size == remaining_total {
                remaining_neg
            } else {
                Hypergeometric::new(remaining_total, remaining_neg, size)
                    .expect("counts are consistent")
                    .sample(rng)
            };
            remaining_total -= size;
            remaining_neg -= drawn;
            drawn
        })
        .collect()
}

/// Literal shuffle of a sign sequence, for reference and testing.
pub fn shuffle_signs<R: Rng + ?Sized>(signs: &[Sign], rng: &mut R) -> Vec<Sign> {
    let mut out = signs.to_vec();
    out.shuffle(rng);
    out
}

/// Summary of a sign-shuffling null ensemble over a fixed target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullEnsemble {
    pub instances: usize,
    /// Frustration of the observed signs.
    pub frustrated: u64,
    /// Mean over instances of `1 - L / L_null`.
    pub sai: f64,
    pub sai_ci95: (f64, f64),
    /// Instances with zero null frustration, left out of the SAI mean.
    pub excluded: usize,
    /// All elements share one sign, so every instance equals the observation.
    pub degenerate: bool,
    pub cohesiveness_mean: Option<f64>,
    pub divisiveness_mean: Option<f64>,
    pub coh_by_group_mean: Vec<f64>,
    pub div_by_group_mean: Vec<f64>,
}

struct Instance {
    null_frustrated: u64,
    coh: Option<f64>,
    div: Option<f64>,
    coh_by_group: Vec<f64>,
    div_by_group: Vec<f64>,
}

/// Runs the null ensemble. Instance `i` draws from stream `(config.seed, i)`.
pub fn null_ensemble(slots: &SlotSet, config: &NullModelConfig) -> Result<NullEnsemble, MetricError> {
    if config.instances == 0 {
        return Err(MetricError::undefined("sai", "null model needs at least one instance"));
    }
    if slots.total() == 0 {
        return Err(MetricError::undefined("sai", "no signed elements"));
    }
    let observed = slots.frustrated();
    let instances: Vec<Instance> = (0..config.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(config.seed, i as u64);
            let negatives = sample_null_negatives(slots, &mut rng);
            let cd = slots.cohdiv_with(&negatives);
            Instance {
                null_frustrated: slots.frustrated_with(&negatives),
                coh: cd.cohesiveness,
                div: cd.divisiveness,
                coh_by_group: cd.coh_by_group,
                div_by_group: cd.div_by_group,
            }
        })
        .collect();

    let mut ratios: Vec<f64> = instances
        .iter()
        .filter(|inst| inst.null_frustrated > 0)
        .map(|inst| 1.0 - observed as f64 / inst.null_frustrated as f64)
        .collect();
    let excluded = instances.len() - ratios.len();
    if ratios.is_empty() {
        return Err(MetricError::undefined(
            "sai",
            format!("null frustration is zero in all {} instances", instances.len()),
        ));
    }
    let sai = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let sai_ci95 = interval95(&mut ratios);

    let count = instances.len() as f64;
    let mean_of = |f: &dyn Fn(&Instance) -> Option<f64>| -> Option<f64> {
        let mut sum = 0.0;
        for inst in &instances {
            sum += f(inst)?;
        }
        Some(sum / count)
    };
    let k = slots.k();
    let mut coh_by_group_mean = vec![0.0; k];
    let mut div_by_group_mean = vec![0.0; k];
    for inst in &instances {
        for g in 0..k {
            coh_by_group_mean[g] += inst.coh_by_group[g] / count;
            div_by_group_mean[g] += inst.div_by_group[g] / count;
        }
    }
    let negatives = slots.total_negative();
    Ok(NullEnsemble {
        instances: instances.len(),
        frustrated: observed,
        sai,
        sai_ci95,
        excluded,
        degenerate: negatives == 0 || negatives == slots.total(),
        cohesiveness_mean: mean_of(&|i| i.coh),
        divisiveness_mean: mean_of(&|i| i.div),
        coh_by_group_mean,
        div_by_group_mean,
    })
}
