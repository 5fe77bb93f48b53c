use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::slots::SlotSet;
use crate::seed::rng_for;
use crate::signed::MetricError;
use crate::stats::interval95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapMetric {
    Cohesiveness,
    Divisiveness,
}

impl BootstrapMetric {
    fn name(self) -> &'static str {
        match self {
            BootstrapMetric::Cohesiveness => "cohesiveness",
            BootstrapMetric::Divisiveness => "divisiveness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapInterval {
    pub metric: BootstrapMetric,
    pub lo: f64,
    pub hi: f64,
    /// Resamples on which the metric was defined.
    pub defined: usize,
}

/// Draws `total` elements with replacement from cells with the given counts and
/// returns how many of each were drawn (a multinomial draw, via conditional
/// binomials).
fn resample_counts<R: Rng + ?Sized>(cells: &[u64], total: u64, rng: &mut R) -> Vec<u64> {
    let mut left_draws = total;
    let mut left_mass = total;
    cells
        .iter()
        .map(|&c| {
            let drawn = if left_draws == 0 || c == 0 {
                0
            } else if c == left_mass {
                left_draws
            } else {
                Binomial::new(left_draws, c as f64 / left_mass as f64)
                    .expect("probability in [0, 1]")
                    .sample(rng)
            };
            left_draws -= drawn;
            left_mass -= c;
            drawn
        })
        .collect()
}

/// Percentile 95% intervals of Cohesiveness/Divisiveness over resamples of the
/// elements with replacement, each of the original size.
pub fn bootstrap_ci(
    slots: &SlotSet,
    metrics: &[BootstrapMetric],
    resamples: usize,
    seed: u64,
) -> Result<Vec<BootstrapInterval>, MetricError> {
    let total = slots.total();
    if total == 0 {
        return Err(MetricError::undefined("bootstrap", "empty target"));
    }
    if resamples == 0 {
        return Err(MetricError::undefined("bootstrap", "zero resamples"));
    }
    // cells: per category, positives then negatives
    let cells: Vec<u64> = slots
        .sizes()
        .iter()
        .zip(slots.negatives())
        .flat_map(|(&s, &n)| [s - n, n])
        .collect();

    let mut rng = rng_for(seed, 0);
    let mut coh = Vec::with_capacity(resamples);
    let mut div = Vec::with_capacity(resamples);
    let mut resampled = slots.clone();
    for _ in 0..resamples {
        let drawn = resample_counts(&cells, total, &mut rng);
        let sizes: Vec<u64> = drawn.chunks(2).map(|c| c[0] + c[1]).collect();
        let negatives: Vec<u64> = drawn.chunks(2).map(|c| c[1]).collect();
        resampled.set_counts(sizes, negatives);
        let cd = resampled.cohdiv();
        coh.extend(cd.cohesiveness);
        div.extend(cd.divisiveness);
    }

    metrics
        .iter()
        .map(|&metric| {
            let values = match metric {
                BootstrapMetric::Cohesiveness => &mut coh,
                BootstrapMetric::Divisiveness => &mut div,
            };
            if values.len() * 2 < resamples {
                return Err(MetricError::undefined(
                    metric.name(),
                    format!(
                        "bootstrap interval undefined: metric defined on {} of {} resamples",
                        values.len(),
                        resamples
                    ),
                ));
            }
            let (lo, hi) = interval95(values);
            Ok(BootstrapInterval {
                metric,
                lo,
                hi,
                defined: values.len(),
            })
        })
        .collect()
}
