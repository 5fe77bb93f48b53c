//! Text formats: interaction logs (CSV/JSONL), network and partition files,
//! and the tabular artifacts of a pipeline run.

mod interactions;
mod network;
mod partition;
mod tables;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use interactions::{
    ingest, parse_sign, parse_timestamp, read_interactions, write_interactions_csv,
    write_interactions_jsonl, Ingested, InteractionFormat,
};
pub use network::{read_network, write_network, NetworkFile, NetworkProvenance};
pub use partition::{read_partition, write_partition};
pub use tables::{iso8601, write_report_rows, write_restarts_csv, write_timeline_csv};

/// Machine-readable class of a rejected input row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    SelfRating,
    BadSign,
    BadTimestamp,
    BadNodeId,
    UnknownColumn,
    MissingColumn,
    MalformedRow,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::SelfRating => "SELF_RATING",
            ErrorCode::BadSign => "BAD_SIGN",
            ErrorCode::BadTimestamp => "BAD_TIMESTAMP",
            ErrorCode::BadNodeId => "BAD_NODE_ID",
            ErrorCode::UnknownColumn => "UNKNOWN_COLUMN",
            ErrorCode::MissingColumn => "MISSING_COLUMN",
            ErrorCode::MalformedRow => "MALFORMED_ROW",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {code}: {message}")]
    Row {
        line: u64,
        code: ErrorCode,
        message: String,
    },
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IoError {
    pub(crate) fn row(line: u64, code: ErrorCode, message: impl Into<String>) -> Self {
        IoError::Row {
            line,
            code,
            message: message.into(),
        }
    }

    pub(crate) fn format(line: u64, message: impl Into<String>) -> Self {
        IoError::Format {
            line,
            message: message.into(),
        }
    }

    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            IoError::Row { code, .. } => Some(*code),
            _ => None,
        }
    }

    pub(crate) fn file(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
        move |source| IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }
}
