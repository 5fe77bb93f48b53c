use std::fmt;

use serde::{Deserialize, Serialize};

use super::interaction::Interaction;

/// Half-open time window `[start, end)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Predicate describing which interactions belong to a subset.
///
/// An empty selector matches the whole dataset; window and topic compose by
/// conjunction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<TimeWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

impl Selector {
    pub fn whole() -> Self {
        Selector::default()
    }

    pub fn window(start: i64, end: i64) -> Self {
        Selector {
            window: Some(TimeWindow { start, end }),
            topic: None,
        }
    }

    pub fn topic(tag: impl Into<String>) -> Self {
        Selector {
            window: None,
            topic: Some(tag.into()),
        }
    }

    pub fn matches(&self, it: &Interaction) -> bool {
        self.window.is_none_or(|w| w.contains(it.timestamp))
            && self.topic.as_deref().is_none_or(|t| it.has_tag(t))
    }

    /// Conjunction of two selectors. Windows intersect; conflicting topics
    /// cannot be expressed and return `None`.
    pub fn and(&self, other: &Selector) -> Option<Selector> {
        let window = match (self.window, other.window) {
            (Some(a), Some(b)) => Some(TimeWindow {
                start: a.start.max(b.start),
                end: a.end.min(b.end).max(a.start.max(b.start)),
            }),
            (a, b) => a.or(b),
        };
        let topic = match (&self.topic, &other.topic) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Some(Selector { window, topic })
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.topic, &self.window) {
            (None, None) => f.write_str("all"),
            (Some(t), None) => write!(f, "topic:{t}"),
            (None, Some(w)) => write!(f, "window:{}..{}", w.start, w.end),
            (Some(t), Some(w)) => write!(f, "topic:{t}&window:{}..{}", w.start, w.end),
        }
    }
}

/// Directed signed interactions matching a selector. Duplicates are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSubset {
    selector: Selector,
    interactions: Vec<Interaction>,
}

impl InteractionSubset {
    pub fn select<'a, I>(interactions: I, selector: Selector) -> Self
    where
        I: IntoIterator<Item = &'a Interaction>,
    {
        let interactions = interactions
            .into_iter()
            .filter(|it| selector.matches(it))
            .cloned()
            .collect();
        InteractionSubset {
            selector,
            interactions,
        }
    }

    pub fn whole(interactions: Vec<Interaction>) -> Self {
        InteractionSubset {
            selector: Selector::whole(),
            interactions,
        }
    }

    /// Narrows the subset by an additional selector.
    pub fn refine(&self, selector: &Selector) -> Option<Self> {
        let combined = self.selector.and(selector)?;
        Some(Self::select(&self.interactions, combined))
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn negative_count(&self) -> usize {
        self.interactions
            .iter()
            .filter(|it| it.sign.is_negative())
            .count()
    }

    /// Copy with every sign flipped.
    pub fn flipped(&self) -> Self {
        InteractionSubset {
            selector: self.selector.clone(),
            interactions: self
                .interactions
                .iter()
                .map(|it| Interaction {
                    sign: it.sign.flipped(),
                    ..it.clone()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signed::Sign;

    fn it(t: i64, tags: &[&str]) -> Interaction {
        Interaction::new("a", "b", Sign::Positive, t)
            .unwrap()
            .with_tags(tags.iter().copied())
    }

    #[test]
    fn selectors_compose_commutatively() {
        let data: Vec<_> = (0..20)
            .map(|t| it(t, if t % 3 == 0 { &["x"] } else { &["y"] }))
            .collect();
        let all = InteractionSubset::whole(data);
        let w = Selector::window(4, 15);
        let t = Selector::topic("x");
        let a = all.refine(&w).unwrap().refine(&t).unwrap();
        let b = all.refine(&t).unwrap().refine(&w).unwrap();
        assert_eq!(a, b);
        let ts: Vec<_> = a.interactions().iter().map(|i| i.timestamp).collect();
        assert_eq!(ts, vec![6, 9, 12]);
    }

    #[test]
    fn conflicting_topics_do_not_compose() {
        assert!(Selector::topic("a").and(&Selector::topic("b")).is_none());
    }

    #[test]
    fn selector_display() {
        assert_eq!(Selector::whole().to_string(), "all");
        assert_eq!(Selector::window(0, 10).to_string(), "window:0..10");
        assert_eq!(Selector::topic("covid").to_string(), "topic:covid");
    }
}
