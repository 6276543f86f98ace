use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use super::archive::LogArchive;
use super::event::{AuditEvent, EventKind};
use super::AuditError;
use crate::eval::Verdict;
use crate::policy::{Action, ActionPattern};
use crate::time::Timestamp;

/// Action selector for queries. Accepts every policy action pattern plus
/// `*:Operation` and `*:Prefix*`, which match across services.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionQuery {
    Pattern(ActionPattern),
    AnyService { operation: String, prefix: bool },
}

impl ActionQuery {
    pub fn matches(&self, action: &Action) -> bool {
        match self {
            ActionQuery::Pattern(p) => p.matches(action),
            ActionQuery::AnyService { operation, prefix: true } => {
                action.operation().starts_with(operation.as_str())
            }
            ActionQuery::AnyService { operation, prefix: false } => action.operation() == operation,
        }
    }
}

impl FromStr for ActionQuery {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || AuditError::InvalidFilter(format!("invalid action pattern `{s}`"));
        match s.strip_prefix("*:") {
            Some(rest) if rest != "*" => {
                let (operation, prefix) = match rest.strip_suffix('*') {
                    Some(op) => (op, true),
                    None => (rest, false),
                };
                let valid = !operation.is_empty()
                    && operation
                        .bytes()
                        .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
                if !valid {
                    return Err(invalid());
                }
                Ok(ActionQuery::AnyService {
                    operation: operation.to_owned(),
                    prefix,
                })
            }
            _ => s.parse().map(ActionQuery::Pattern).map_err(|_| invalid()),
        }
    }
}

impl fmt::Display for ActionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionQuery::Pattern(p) => p.fmt(f),
            ActionQuery::AnyService { operation, prefix } => {
                write!(f, "*:{operation}{}", if *prefix { "*" } else { "" })
            }
        }
    }
}

/// Conjunction of optional event predicates. The time range is half-open:
/// `since <= time < until`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub user: Option<String>,
    pub account: Option<String>,
    pub action: Option<ActionQuery>,
    pub kind: Option<EventKind>,
    pub verdict: Option<Verdict>,
    pub since: Option<Timestamp>,
    pub until: Option<Timestamp>,
}

impl EventFilter {
    pub fn validate(&self) -> Result<(), AuditError> {
        match (self.since, self.until) {
            (Some(since), Some(until)) if since > until => Err(AuditError::InvalidFilter(
                format!("time range is inverted ({since} > {until})"),
            )),
            _ => Ok(()),
        }
    }

    pub fn accepts(&self, e: &AuditEvent) -> bool {
        self.user.as_ref().is_none_or(|u| *u == e.user)
            && self.account.as_ref().is_none_or(|a| *a == e.account)
            && self.kind.is_none_or(|k| k == e.kind)
            && self.verdict.is_none_or(|v| v == e.verdict)
            && self.since.is_none_or(|s| e.time >= s)
            && self.until.is_none_or(|u| e.time < u)
            && self
                .action
                .as_ref()
                .is_none_or(|q| e.action.as_ref().is_some_and(|a| q.matches(a)))
    }
}

/// Events satisfying `filter`, in archive order.
pub fn query<'a>(archive: &'a LogArchive, filter: &EventFilter) -> Result<Vec<&'a AuditEvent>, AuditError> {
    filter.validate()?;
    Ok(archive.events().filter(|e| filter.accepts(e)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeniedCell {
    pub bucket_start: Timestamp,
    pub user: String,
    pub account: String,
    pub count: usize,
}

/// Deny events counted per (time bucket, user, account). Buckets are aligned
/// to the Unix epoch.
pub fn denied_access_summary(
    archive: &LogArchive,
    bucket: Duration,
) -> Result<Vec<DeniedCell>, AuditError> {
    let width = bucket.as_secs() as i64;
    if width <= 0 || bucket.subsec_nanos() != 0 {
        return Err(AuditError::InvalidFilter(
            "bucket must be a positive whole number of seconds".into(),
        ));
    }
    let mut cells: BTreeMap<(Timestamp, &str, &str), usize> = BTreeMap::new();
    for e in archive.events().filter(|e| e.verdict == Verdict::Deny) {
        let start = e.time.unix().div_euclid(width) * width;
        let start = Timestamp::from_unix(start).expect("bucket start within range");
        *cells.entry((start, &e.user, &e.account)).or_default() += 1;
    }
    Ok(cells
        .into_iter()
        .map(|((bucket_start, user, account), count)| DeniedCell {
            bucket_start,
            user: user.to_owned(),
            account: account.to_owned(),
            count,
        })
        .collect())
}
