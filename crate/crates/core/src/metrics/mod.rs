//! Polarization metrics of a signed target under a fixed partition: alignment
//! against a sign-shuffling null model, Cohesiveness/Divisiveness with
//! bootstrap intervals, and per-group contributions.

mod bootstrap;
mod null_model;
mod report;
mod slots;

pub use bootstrap::{bootstrap_ci, BootstrapInterval, BootstrapMetric};
pub use null_model::{null_ensemble, sample_null_negatives, shuffle_signs, NullEnsemble, NullModelConfig};
pub use report::{
    evaluate_network, evaluate_subset, ElementCounts, GroupContribution, MetricsConfig,
    MetricsReport, NormalizedMetric,
};
pub use slots::{Category, CohDiv, SlotSet};

pub use crate::signed::MetricError;

/// Raw proportion minus its expectation under the null model.
pub fn normalize_metric(raw: f64, null_mean: f64) -> f64 {
    raw - null_mean
}

/// `1 - L / (m / 2)`: frustration relative to half the edges.
pub fn normalized_line_index(edges: usize, frustration: usize) -> Result<f64, MetricError> {
    if edges == 0 {
        return Err(MetricError::undefined("line_index", "no edges"));
    }
    Ok(1.0 - frustration as f64 / (edges as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_index_values() {
        assert_eq!(normalized_line_index(10, 0).unwrap(), 1.0);
        assert_eq!(normalized_line_index(10, 5).unwrap(), 0.0);
        assert_eq!(normalized_line_index(4, 1).unwrap(), 0.5);
        assert!(normalized_line_index(0, 0).is_err());
    }

    #[test]
    fn normalization_subtracts_null_mean() {
        assert_eq!(normalize_metric(0.75, 0.5), 0.25);
    }
}
