use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sign of a rating or relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Positive,
    #[serde(rename = "-1")]
    Negative,
}

impl Sign {
    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    /// Balance-consistent sign for a pair: positive inside a group, negative across.
    pub fn balanced(same_group: bool) -> Sign {
        if same_group {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// Whether this sign violates balance for a pair that is (or is not) in the same group.
    #[inline]
    pub fn is_frustrated(self, same_group: bool) -> bool {
        match self {
            Sign::Positive => !same_group,
            Sign::Negative => same_group,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Positive => f.write_str("+1"),
            Sign::Negative => f.write_str("-1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InteractionError {
    #[error("rater and author are the same user `{0}`")]
    SelfRating(String),
    #[error("negative timestamp {0}")]
    NegativeTimestamp(i64),
    #[error("invalid node id `{0}`: ids must be non-empty and contain no whitespace")]
    InvalidNodeId(String),
}

/// One directed signed rating event: `rater` reacted to content posted by `author`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub rater: String,
    pub author: String,
    pub sign: Sign,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    #[serde(default)]
    pub tags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_id: Option<String>,
}

pub(crate) fn validate_node_id(id: &str) -> Result<(), InteractionError> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(InteractionError::InvalidNodeId(id.to_string()));
    }
    Ok(())
}

impl Interaction {
    pub fn new(
        rater: impl Into<String>,
        author: impl Into<String>,
        sign: Sign,
        timestamp: i64,
    ) -> Result<Self, InteractionError> {
        let rater = rater.into();
        let author = author.into();
        validate_node_id(&rater)?;
        validate_node_id(&author)?;
        if rater == author {
            return Err(InteractionError::SelfRating(rater));
        }
        if timestamp < 0 {
            return Err(InteractionError::NegativeTimestamp(timestamp));
        }
        Ok(Interaction {
            rater,
            author,
            sign,
            timestamp,
            tags: BTreeSet::new(),
            content_id: None,
        })
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_content_id(mut self, id: impl Into<String>) -> Self {
        self.content_id = Some(id.into());
        self
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }
}
