use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use super::event::AuditEvent;
use super::AuditError;
use crate::time::Timestamp;

#[derive(Debug, Clone)]
struct Entry {
    key: (Timestamp, String, u64),
    event: AuditEvent,
}

/// Time-ordered event store. Ordering key is (time, source account, insertion
/// sequence), so late events land in place and ties keep arrival order.
#[derive(Debug, Clone, Default)]
pub struct LogArchive {
    entries: Vec<Entry>,
    next_seq: u64,
}

impl PartialEq for LogArchive {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.events().eq(other.events())
    }
}

impl Eq for LogArchive {}

impl LogArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &AuditEvent> + '_ {
        self.entries.iter().map(|e| &e.event)
    }

    /// Source accounts present in the archive.
    pub fn accounts_covered(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.event.source.as_str()).collect()
    }

    pub fn append(&mut self, event: AuditEvent) -> Result<(), AuditError> {
        event.validate()?;
        let key = (event.time, event.source.clone(), self.next_seq);
        self.next_seq += 1;
        let at = self.entries.partition_point(|e| e.key <= key);
        self.entries.insert(at, Entry { key, event });
        Ok(())
    }

    pub fn from_events(events: impl IntoIterator<Item = AuditEvent>) -> Result<Self, AuditError> {
        let mut archive = Self::new();
        for e in events {
            archive.append(e)?;
        }
        Ok(archive)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for event in self.events() {
            writeln!(out, "{}", event.to_json_line())?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("events serialize as UTF-8")
    }

    /// Reads one event per line; blank lines are skipped. Errors name the
    /// 1-based line number.
    pub fn read_jsonl(input: impl BufRead) -> Result<Self, AuditError> {
        let mut archive = Self::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| AuditError::Line {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let event = AuditEvent::from_json_line(&line).map_err(|e| AuditError::Line {
                line: idx + 1,
                message: e.to_string(),
            })?;
            archive.append(event)?;
        }
        Ok(archive)
    }
}

/// Merges per-account archives into one time-ordered archive. Ties on
/// (time, source) keep input-archive order, then per-archive sequence.
pub fn merge_archives<'a>(archives: impl IntoIterator<Item = &'a LogArchive>) -> LogArchive {
    type MergeKey<'k> = (Timestamp, &'k str, usize, u64);
    let mut keyed: Vec<(MergeKey<'_>, &AuditEvent)> = archives
        .into_iter()
        .enumerate()
        .flat_map(|(idx, archive)| {
            archive
                .entries
                .iter()
                .map(move |e| ((e.key.0, e.key.1.as_str(), idx, e.key.2), &e.event))
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let entries: Vec<Entry> = keyed
        .into_iter()
        .enumerate()
        .map(|(seq, (key, event))| Entry {
            key: (key.0, key.1.to_owned(), seq as u64),
            event: event.clone(),
        })
        .collect();
    LogArchive {
        next_seq: entries.len() as u64,
        entries,
    }
}
