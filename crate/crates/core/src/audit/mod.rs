//! Audit events, per-account logs, the merged log archive and queries over it.
//!
//! Log files are JSON Lines, one event per line. Per-account logs are named
//! `logs/<account-id>.jsonl`; the merged archive is `logs/archive.jsonl`.

mod archive;
mod event;
mod query;

pub use archive::{merge_archives, LogArchive};
pub use event::{AuditEvent, EventKind};
pub use query::{denied_access_summary, query, ActionQuery, DeniedCell, EventFilter};

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("malformed event: {0}")]
    InvalidEvent(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    InvalidFilter(String),
}

/// File name of an account's log inside a log directory.
pub fn account_log_name(account: &str) -> String {
    format!("{account}.jsonl")
}

pub const ARCHIVE_FILE_NAME: &str = "archive.jsonl";
