//! Rolling-window and topic subsets, metric time series and peak detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{evaluate_subset, MetricsConfig, MetricsReport};
use crate::seed::derive_seed;
use crate::signed::{Interaction, InteractionSubset, MetricError, Partition, Selector};
use crate::stats::{pearson, sample_std};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimelineError {
    #[error("no interactions to window")]
    NoInteractions,
    #[error("invalid timeline configuration: {0}")]
    InvalidConfig(String),
    #[error("no topic tags given")]
    NoTags,
    #[error("peak detection needs at least 3 defined points, found {0}")]
    TooFewPoints(usize),
    #[error("timeline comparison needs at least 3 paired points, found {0}")]
    TooFewPairs(usize),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("a compared series has zero variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingWindowConfig {
    /// Window width in seconds.
    pub width: i64,
    /// Advance between consecutive window ends, in seconds.
    pub step: i64,
}

impl Default for RollingWindowConfig {
    fn default() -> Self {
        RollingWindowConfig {
            width: 10 * 86_400,
            step: 5 * 86_400,
        }
    }
}

impl RollingWindowConfig {
    pub fn validate(&self) -> Result<(), TimelineError> {
        if self.width <= 0 || self.step <= 0 {
            return Err(TimelineError::InvalidConfig(format!(
                "width ({}) and step ({}) must be positive",
                self.width, self.step
            )));
        }
        Ok(())
    }
}

/// Window `[end - width, end)`; its values are reported at `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub end: i64,
    pub subset: InteractionSubset,
}

/// Rolling windows over `interactions`.
///
/// The first window ends at `t_min + width`; ends advance by `step` and the
/// sweep stops once a window end passes the last timestamp. Empty windows are
/// kept so downstream series show explicit gaps.
pub fn window_subsets(
    interactions: &[Interaction],
    config: &RollingWindowConfig,
) -> Result<Vec<Window>, TimelineError> {
    window_subsets_within(&InteractionSubset::whole(interactions.to_vec()), config)
}

/// Rolling windows over an existing subset; selectors are combined, so a topic
/// subset yields `topic&window` selectors.
pub fn window_subsets_within(
    base: &InteractionSubset,
    config: &RollingWindowConfig,
) -> Result<Vec<Window>, TimelineError> {
    config.validate()?;
    let mut sorted: Vec<&Interaction> = base.interactions().iter().collect();
    if sorted.is_empty() {
        return Err(TimelineError::NoInteractions);
    }
    sorted.sort_by_key(|it| it.timestamp);
    let t_min = sorted[0].timestamp;
    let t_max = sorted[sorted.len() - 1].timestamp;

    let mut windows = Vec::new();
    let mut end = t_min + config.width;
    loop {
        let start = end - config.width;
        let lo = sorted.partition_point(|it| it.timestamp < start);
        let hi = sorted.partition_point(|it| it.timestamp < end);
        let selector = base
            .selector()
            .and(&Selector::window(start, end))
            .unwrap_or_else(|| Selector::window(start, end));
        windows.push(Window {
            end,
            subset: InteractionSubset::select(sorted[lo..hi].iter().copied(), selector),
        });
        if end > t_max {
            break;
        }
        end += config.step;
    }
    Ok(windows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSubsets {
    /// One subset per requested tag, in request order.
    pub subsets: Vec<(String, InteractionSubset)>,
    /// Tags no interaction carries.
    pub empty: Vec<String>,
}

/// Subset per tag; an interaction belongs to every subset whose tag it carries.
pub fn topic_subsets<S: AsRef<str>>(
    interactions: &[Interaction],
    tags: &[S],
) -> Result<TopicSubsets, TimelineError> {
    if tags.is_empty() {
        return Err(TimelineError::NoTags);
    }
    let mut subsets = Vec::with_capacity(tags.len());
    let mut empty = Vec::new();
    for tag in tags {
        let tag = tag.as_ref();
        let subset = InteractionSubset::select(interactions, Selector::topic(tag));
        if subset.is_empty() {
            log::warn!("topic {tag:?}: no interactions carry this tag");
            empty.push(tag.to_string());
        }
        subsets.push((tag.to_string(), subset));
    }
    Ok(TopicSubsets { subsets, empty })
}

/// One point of a metric time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelinePoint {
    pub end: i64,
    pub n_interactions: usize,
    pub outcome: Result<MetricsReport, MetricError>,
}

impl TimelinePoint {
    /// Empty windows, undefined metrics and single-sign windows.
    pub fn is_gap(&self) -> bool {
        match &self.outcome {
            Ok(r) => r.degenerate,
            Err(_) => true,
        }
    }

    pub fn report(&self) -> Option<&MetricsReport> {
        self.outcome.as_ref().ok().filter(|_| !self.is_gap())
    }

    pub fn sai(&self) -> Option<f64> {
        self.report().map(|r| r.sai)
    }
}

/// Metrics per window against a fixed partition. Window `i` uses seed
/// `derive_seed(config.null.seed, i)`, so the series does not depend on
/// scheduling.
pub fn metric_timeline(
    windows: &[Window],
    partition: &Partition,
    config: &MetricsConfig,
) -> Vec<TimelinePoint> {
    windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let cfg = config.reseeded(derive_seed(config.null.seed, i as u64));
            TimelinePoint {
                end: w.end,
                n_interactions: w.subset.len(),
                outcome: evaluate_subset(&w.subset, partition, &cfg),
            }
        })
        .collect()
}

pub fn sai_series(points: &[TimelinePoint]) -> Vec<Option<f64>> {
    points.iter().map(TimelinePoint::sai).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeakConfig {
    /// Defaults to one sample standard deviation of the defined values.
    pub min_prominence: Option<f64>,
    /// Minimum index distance between reported peaks.
    pub min_separation: usize,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig {
            min_prominence: None,
            min_separation: 1,
        }
    }
}

/// Local maxima whose topographic prominence reaches the threshold.
///
/// A peak needs defined, strictly lower neighbours on both sides; plateaus
/// report their first index. Prominence is measured within the gap-free run
/// containing the peak. Peaks closer than `min_separation` are thinned
/// greedily, highest first.
pub fn detect_peaks(series: &[Option<f64>], config: &PeakConfig) -> Result<Vec<usize>, TimelineError> {
    let defined: Vec<f64> = series.iter().flatten().copied().collect();
    if defined.len() < 3 {
        return Err(TimelineError::TooFewPoints(defined.len()));
    }
    let min_prominence = match config.min_prominence {
        Some(p) if p > 0.0 => p,
        Some(p) => {
            return Err(TimelineError::InvalidConfig(format!(
                "min_prominence {p} must be positive"
            )))
        }
        None => sample_std(&defined),
    };
    if !(min_prominence > 0.0) {
        return Ok(Vec::new());
    }

    let mut candidates: Vec<(usize, f64)> = Vec::new();
    let mut i = 1;
    while i + 1 < series.len() {
        let (Some(v), Some(left)) = (series[i], series[i - 1]) else {
            i += 1;
            continue;
        };
        if left >= v {
            i += 1;
            continue;
        }
        // walk the plateau
        let mut j = i;
        while j + 1 < series.len() && series[j + 1] == Some(v) {
            j += 1;
        }
        if matches!(series.get(j + 1), Some(Some(right)) if *right < v)
            && prominence(series, i, j, v) >= min_prominence
        {
            candidates.push((i, v));
        }
        i = j + 1;
    }

    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut kept: Vec<usize> = Vec::new();
    for (idx, _) in candidates {
        if kept.iter().all(|&k| k.abs_diff(idx) >= config.min_separation) {
            kept.push(idx);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

fn prominence(series: &[Option<f64>], first: usize, last: usize, v: f64) -> f64 {
    let mut left_min = v;
    for x in series[..first].iter().rev() {
        match x {
            Some(x) if *x <= v => left_min = left_min.min(*x),
            _ => break,
        }
    }
    let mut right_min = v;
    for x in &series[last + 1..] {
        match x {
            Some(x) if *x <= v => right_min = right_min.min(*x),
            _ => break,
        }
    }
    v - left_min.max(right_min)
}

/// Pearson correlation over the points defined in both series.
pub fn compare_timelines(a: &[Option<f64>], b: &[Option<f64>]) -> Result<f64, TimelineError> {
    if a.len() != b.len() {
        return Err(TimelineError::LengthMismatch(a.len(), b.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .unzip();
    if xs.len() < 3 {
        return Err(TimelineError::TooFewPairs(xs.len()));
    }
    pearson(&xs, &ys).ok_or(TimelineError::ZeroVariance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signed::Sign;

    fn events(ts: impl IntoIterator<Item = i64>) -> Vec<Interaction> {
        ts.into_iter()
            .map(|t| Interaction::new("a", "b", Sign::Positive, t).unwrap())
            .collect()
    }

    fn defined(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn sweep_example() {
        let w = window_subsets(&events(0..20), &RollingWindowConfig { width: 10, step: 5 }).unwrap();
        let ends: Vec<i64> = w.iter().map(|w| w.end).collect();
        let sizes: Vec<usize> = w.iter().map(|w| w.subset.len()).collect();
        assert_eq!(ends, vec![10, 15, 20]);
        assert_eq!(sizes, vec![10, 10, 10]);
    }

    #[test]
    fn tiling_covers_each_event_once() {
        let ev = events([3, 4, 9, 17, 17, 40, 41, 88]);
        let w = window_subsets(&ev, &RollingWindowConfig { width: 7, step: 7 }).unwrap();
        assert_eq!(w.iter().map(|w| w.subset.len()).sum::<usize>(), ev.len());
        assert!(w.iter().any(|w| w.subset.is_empty()));
    }

    #[test]
    fn short_stream_gets_trailing_partial_window() {
        let w = window_subsets(&events(0..=10), &RollingWindowConfig { width: 10, step: 5 }).unwrap();
        let sizes: Vec<usize> = w.iter().map(|w| w.subset.len()).collect();
        assert_eq!(sizes, vec![10, 6]);
        let w = window_subsets(&events(0..5), &RollingWindowConfig { width: 10, step: 5 }).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn window_errors() {
        assert_eq!(
            window_subsets(&[], &RollingWindowConfig::default()).unwrap_err(),
            TimelineError::NoInteractions
        );
        assert!(window_subsets(&events([1]), &RollingWindowConfig { width: 0, step: 1 }).is_err());
    }

    #[test]
    fn topic_membership() {
        let ev = vec![
            Interaction::new("a", "b", Sign::Positive, 0).unwrap().with_tags(["x", "y"]),
            Interaction::new("a", "b", Sign::Negative, 1).unwrap().with_tags(["y"]),
        ];
        let t = topic_subsets(&ev, &["x", "y", "z"]).unwrap();
        let sizes: Vec<usize> = t.subsets.iter().map(|(_, s)| s.len()).collect();
        assert_eq!(sizes, vec![1, 2, 0]);
        assert_eq!(t.empty, vec!["z".to_string()]);
        assert_eq!(topic_subsets::<&str>(&ev, &[]).unwrap_err(), TimelineError::NoTags);
    }

    #[test]
    fn topic_windows_compose_selectors() {
        let ev: Vec<Interaction> = (0..20)
            .map(|t| Interaction::new("a", "b", Sign::Positive, t).unwrap().with_tags(["x"]))
            .collect();
        let topic = InteractionSubset::select(&ev, Selector::topic("x"));
        let w = window_subsets_within(&topic, &RollingWindowConfig { width: 10, step: 10 }).unwrap();
        assert_eq!(w[0].subset.selector().to_string(), "topic:x&window:0..10");
    }

    #[test]
    fn peak_examples() {
        let cfg = PeakConfig {
            min_prominence: Some(0.5),
            min_separation: 1,
        };
        assert_eq!(detect_peaks(&defined(&[0., 1., 0., 2., 0.]), &cfg).unwrap(), vec![1, 3]);
        assert!(detect_peaks(&defined(&[0., 1., 2., 3., 4.]), &cfg).unwrap().is_empty());
        assert_eq!(detect_peaks(&defined(&[0., 1., 1., 0.]), &cfg).unwrap(), vec![1]);
    }

    #[test]
    fn prominence_uses_higher_neighbour_bases() {
        // the small bump at 3 sits on the shoulder of the peak at 1
        let s = defined(&[0., 5., 3., 3.2, 3., 0.]);
        let cfg = PeakConfig {
            min_prominence: Some(0.5),
            min_separation: 1,
        };
        assert_eq!(detect_peaks(&s, &cfg).unwrap(), vec![1]);
        let cfg = PeakConfig {
            min_prominence: Some(0.1),
            min_separation: 1,
        };
        assert_eq!(detect_peaks(&s, &cfg).unwrap(), vec![1, 3]);
    }

    #[test]
    fn gaps_break_candidacy() {
        let s = vec![Some(0.), Some(1.), None, Some(0.), Some(2.), Some(0.)];
        let cfg = PeakConfig {
            min_prominence: Some(0.5),
            min_separation: 1,
        };
        assert_eq!(detect_peaks(&s, &cfg).unwrap(), vec![4]);
        assert_eq!(
            detect_peaks(&[None, Some(1.), None], &cfg).unwrap_err(),
            TimelineError::TooFewPoints(1)
        );
    }

    #[test]
    fn separation_thins_lower_peaks() {
        let s = defined(&[0., 2., 0., 3., 0., 1., 0.]);
        let cfg = PeakConfig {
            min_prominence: Some(0.5),
            min_separation: 3,
        };
        assert_eq!(detect_peaks(&s, &cfg).unwrap(), vec![3]);
    }

    #[test]
    fn default_prominence_is_one_std() {
        let s = defined(&[0., 0.1, 0., 0.05, 0., 3., 0., 0.1, 0.]);
        assert_eq!(detect_peaks(&s, &PeakConfig::default()).unwrap(), vec![5]);
    }

    #[test]
    fn compare_examples() {
        let a = defined(&[1., 3., 2., 5., 4.]);
        let neg: Vec<Option<f64>> = a.iter().map(|x| x.map(|v| -v)).collect();
        assert!((compare_timelines(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((compare_timelines(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        let short = vec![Some(1.), None, None, None, Some(2.)];
        assert_eq!(compare_timelines(&a, &short).unwrap_err(), TimelineError::TooFewPairs(2));
        assert_eq!(
            compare_timelines(&a, &defined(&[1.; 5])).unwrap_err(),
            TimelineError::ZeroVariance
        );
    }
}
