use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;

use super::{LpError, Principal, Window};
use crate::audit::{AuditEvent, EventKind};
use crate::eval::{authorize, AccessRequest, Origin, Verdict};
use crate::org::{OrgError, Organization};
use crate::policy::{Action, Effect};
use crate::time::Timestamp;

/// Identifies one statement of one policy inside a permission set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StatementKey {
    pub permission_set: String,
    pub policy: String,
    pub statement: usize,
}

/// An allowed API call seen in the log.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    pub time: Timestamp,
    pub action: Action,
    pub resource: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageIndex {
    last_used: BTreeMap<StatementKey, Timestamp>,
    observations: BTreeMap<Principal, BTreeSet<Observation>>,
    actions_seen: BTreeSet<Action>,
}

impl UsageIndex {
    pub fn last_used(&self, key: &StatementKey) -> Option<Timestamp> {
        self.last_used.get(key).copied()
    }

    pub fn last_used_entries(&self) -> impl Iterator<Item = (&StatementKey, Timestamp)> {
        self.last_used.iter().map(|(k, t)| (k, *t))
    }

    pub fn observations(&self, principal: &Principal) -> impl Iterator<Item = &Observation> {
        self.observations.get(principal).into_iter().flatten()
    }

    pub fn observations_in(
        &self,
        principal: &Principal,
        window: &Window,
    ) -> impl Iterator<Item = &Observation> {
        let window = *window;
        self.observations(principal)
            .filter(move |o| window.contains(o.time))
    }

    pub fn principals(&self) -> impl Iterator<Item = &Principal> {
        self.observations.keys()
    }

    /// Every action that appears in an API call, allowed or denied.
    pub fn actions_seen(&self) -> &BTreeSet<Action> {
        &self.actions_seen
    }

    pub fn is_empty(&self) -> bool {
        self.last_used.is_empty() && self.observations.is_empty() && self.actions_seen.is_empty()
    }
}

/// Folds a time-ordered event stream into a [`UsageIndex`].
///
/// Allowed API calls are re-evaluated (with an empty request context) and
/// every identity `Allow` statement that matched is credited with the event
/// time.
pub fn build_usage_index<'a>(
    org: &Organization,
    events: impl IntoIterator<Item = &'a AuditEvent>,
) -> Result<UsageIndex, LpError> {
    let mut index = UsageIndex::default();
    let mut previous: Option<Timestamp> = None;
    for (i, event) in events.into_iter().enumerate() {
        if let Some(prev) = previous {
            if event.time < prev {
                return Err(LpError::OutOfOrder {
                    index: i,
                    time: event.time,
                    previous: prev,
                });
            }
        }
        previous = Some(event.time);

        let resolvable = if org.user(&event.user).is_none() {
            Err(OrgError::UnknownUser(event.user.clone()))
        } else if !org.has_account(&event.account) {
            Err(OrgError::UnknownAccount(event.account.clone()))
        } else {
            Ok(())
        };
        resolvable.map_err(|e| LpError::Event {
            index: i,
            source: e.into(),
        })?;

        if event.kind != EventKind::ApiCall {
            continue;
        }
        let (Some(action), Some(resource)) = (&event.action, &event.resource) else {
            continue;
        };
        index.actions_seen.insert(action.clone());
        if event.verdict != Verdict::Allow {
            continue;
        }

        let request = AccessRequest::new(&event.user, &event.account, action.clone(), resource);
        let decision =
            authorize(org, &request).map_err(|source| LpError::Event { index: i, source })?;
        for t in decision.contributing_identity_allows() {
            if let Origin::Identity { permission_set, policy } = &t.origin {
                let key = StatementKey {
                    permission_set: permission_set.clone(),
                    policy: policy.clone(),
                    statement: t.statement,
                };
                index.last_used.insert(key, event.time);
            }
        }
        index
            .observations
            .entry(Principal::new(&event.user, &event.account))
            .or_default()
            .insert(Observation {
                time: event.time,
                action: action.clone(),
                resource: resource.clone(),
            });
    }
    Ok(index)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnusedEntry {
    pub permission_set: String,
    pub policy: String,
    pub statement: usize,
    /// `None` when the statement was never credited.
    pub last_used: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnusedReport {
    pub as_of: Timestamp,
    pub threshold_days: u32,
    pub entries: Vec<UnusedEntry>,
}

impl UnusedReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "unused statements as of {} (threshold {} days): {}",
            self.as_of,
            self.threshold_days,
            self.entries.len()
        );
        let rows: Vec<[String; 3]> = self
            .entries
            .iter()
            .map(|e| {
                [
                    e.permission_set.clone(),
                    format!("{}#{}", e.policy, e.statement),
                    e.last_used.map_or_else(|| "never".to_owned(), |t| t.to_string()),
                ]
            })
            .collect();
        let header = ["PERMISSION SET", "STATEMENT", "LAST USED"];
        let width = |col: usize| {
            rows.iter()
                .map(|r| r[col].len())
                .chain([header[col].len()])
                .max()
                .unwrap_or(0)
        };
        let (w0, w1) = (width(0), width(1));
        let _ = writeln!(out, "{:<w0$}  {:<w1$}  {}", header[0], header[1], header[2]);
        for r in &rows {
            let _ = writeln!(out, "{:<w0$}  {:<w1$}  {}", r[0], r[1], r[2]);
        }
        out
    }
}

/// Lists every identity `Allow` statement whose last use is missing or
/// strictly before `as_of - threshold_days`. Never-used statements come
/// first, then the stalest; ties are ordered by ids.
pub fn unused_report(
    index: &UsageIndex,
    org: &Organization,
    as_of: Timestamp,
    threshold_days: u32,
) -> UnusedReport {
    let cutoff = as_of.minus_days(i64::from(threshold_days));
    let mut entries = Vec::new();
    for set in org.permission_sets() {
        for policy in &set.policies {
            for (idx, statement) in policy.statements().iter().enumerate() {
                if statement.effect() != Effect::Allow {
                    continue;
                }
                let key = StatementKey {
                    permission_set: set.id.clone(),
                    policy: policy.name().to_owned(),
                    statement: idx,
                };
                let last_used = index.last_used(&key);
                if last_used.is_none_or(|t| t < cutoff) {
                    entries.push(UnusedEntry {
                        permission_set: key.permission_set,
                        policy: key.policy,
                        statement: idx,
                        last_used,
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| {
        a.last_used
            .cmp(&b.last_used)
            .then_with(|| a.permission_set.cmp(&b.permission_set))
            .then_with(|| a.policy.cmp(&b.policy))
            .then_with(|| a.statement.cmp(&b.statement))
    });
    UnusedReport {
        as_of,
        threshold_days,
        entries,
    }
}
