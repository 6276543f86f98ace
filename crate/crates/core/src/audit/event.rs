use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::eval::Verdict;
use crate::policy::Action;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Login,
    ApiCall,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Login => "Login",
            EventKind::ApiCall => "ApiCall",
        })
    }
}

impl FromStr for EventKind {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Login" => Ok(EventKind::Login),
            "ApiCall" => Ok(EventKind::ApiCall),
            other => Err(AuditError::InvalidEvent(format!("unknown event kind `{other}`"))),
        }
    }
}

/// One recorded activity. `action` and `resource` are present exactly for
/// API calls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEvent {
    pub time: Timestamp,
    pub kind: EventKind,
    pub user: String,
    pub account: String,
    pub action: Option<Action>,
    pub resource: Option<String>,
    pub verdict: Verdict,
    /// Account whose trail produced the event.
    pub source: String,
}

impl AuditEvent {
    pub fn login(time: Timestamp, user: &str, account: &str, verdict: Verdict) -> Self {
        Self {
            time,
            kind: EventKind::Login,
            user: user.to_owned(),
            account: account.to_owned(),
            action: None,
            resource: None,
            verdict,
            source: account.to_owned(),
        }
    }

    pub fn api_call(
        time: Timestamp,
        user: &str,
        account: &str,
        action: Action,
        resource: &str,
        verdict: Verdict,
    ) -> Self {
        Self {
            time,
            kind: EventKind::ApiCall,
            user: user.to_owned(),
            account: account.to_owned(),
            action: Some(action),
            resource: Some(resource.to_owned()),
            verdict,
            source: account.to_owned(),
        }
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        let bad = |msg: &str| Err(AuditError::InvalidEvent(msg.to_owned()));
        if self.user.is_empty() || self.account.is_empty() || self.source.is_empty() {
            return bad("user, account and source must be non-empty");
        }
        match self.kind {
            EventKind::ApiCall => match (&self.action, &self.resource) {
                (Some(_), Some(r)) if !r.is_empty() && !r.contains('*') => Ok(()),
                (Some(_), Some(r)) if r.contains('*') => bad("resource must be concrete"),
                _ => bad("ApiCall events need an action and a resource"),
            },
            EventKind::Login => match (&self.action, &self.resource) {
                (None, None) => Ok(()),
                _ => bad("Login events carry no action or resource"),
            },
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&WireEvent::from(self)).expect("events always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, AuditError> {
        let wire: WireEvent =
            serde_json::from_str(line).map_err(|e| AuditError::InvalidEvent(e.to_string()))?;
        let action = if wire.action.is_empty() {
            None
        } else {
            Some(
                wire.action
                    .parse::<Action>()
                    .map_err(|e| AuditError::InvalidEvent(e.to_string()))?,
            )
        };
        let event = AuditEvent {
            time: wire.time,
            kind: wire.kind,
            user: wire.user,
            account: wire.account,
            action,
            resource: (!wire.resource.is_empty()).then_some(wire.resource),
            verdict: wire.verdict,
            source: wire.source,
        };
        event.validate()?;
        Ok(event)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEvent {
    time: Timestamp,
    kind: EventKind,
    user: String,
    account: String,
    #[serde(default)]
    action: String,
    #[serde(default)]
    resource: String,
    verdict: Verdict,
    source: String,
}

impl From<&AuditEvent> for WireEvent {
    fn from(e: &AuditEvent) -> Self {
        WireEvent {
            time: e.time,
            kind: e.kind,
            user: e.user.clone(),
            account: e.account.clone(),
            action: e.action.as_ref().map(ToString::to_string).unwrap_or_default(),
            resource: e.resource.clone().unwrap_or_default(),
            verdict: e.verdict,
            source: e.source.clone(),
        }
    }
}

impl Serialize for AuditEvent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WireEvent::from(self).serialize(serializer)
    }
}
