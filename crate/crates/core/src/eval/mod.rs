//! Authorization decisions over an [`Organization`].
//!
//! A request is decided in this order:
//!
//! 1. Collect identity statements (from the permission sets resolved for the
//!    user in the acting account) and resource statements (from the target
//!    resource's policy, if it is registered and has one).
//! 2. A statement matches when its action, resource and condition all match;
//!    resource statements must also name the user or the acting account.
//! 3. Any matching `Deny` wins: `ExplicitDeny`.
//! 4. Same account as the resource owner: an identity or a resource `Allow`
//!    suffices (`SameAccountAllow`).
//! 5. Cross-account: an identity `Allow` is required, plus either a resource
//!    `Allow` or a share of the resource with the acting account
//!    (`CrossAccountAllow`).
//! 6. Otherwise `ImplicitDeny`.
//!
//! Resources missing from the registry are treated as owned by the acting
//! account with no resource policy.

mod explain;
mod sink;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use explain::{explain, render_trace};
pub use sink::AuditSink;

use crate::audit::AuditEvent;
use crate::org::{OrgError, Organization};
use crate::policy::{Action, Context, Effect, Statement};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Allow,
    Deny,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Allow => "Allow",
            Verdict::Deny => "Deny",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Allow" => Ok(Verdict::Allow),
            "Deny" => Ok(Verdict::Deny),
            other => Err(format!("verdict must be Allow or Deny, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Reason {
    ExplicitDeny,
    ImplicitDeny,
    SameAccountAllow,
    CrossAccountAllow,
}

impl Reason {
    pub fn verdict(self) -> Verdict {
        match self {
            Reason::SameAccountAllow | Reason::CrossAccountAllow => Verdict::Allow,
            Reason::ExplicitDeny | Reason::ImplicitDeny => Verdict::Deny,
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Org(#[from] OrgError),
    #[error("request resource `{0}` contains a wildcard")]
    WildcardResource(String),
    #[error("request resource must not be empty")]
    EmptyResource,
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error("request {index}: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<EvalError>,
    },
}

/// An authorization query: `user`, acting in `account`, performs `action` on
/// `resource`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessRequest {
    pub user: String,
    pub account: String,
    pub action: Action,
    pub resource: String,
    #[serde(default)]
    pub context: Context,
    /// Event time used when the request is logged; optional in batch files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Timestamp>,
}

impl AccessRequest {
    pub fn new(user: &str, account: &str, action: Action, resource: &str) -> Self {
        Self {
            user: user.to_owned(),
            account: account.to_owned(),
            action,
            resource: resource.to_owned(),
            context: Context::new(),
            time: None,
        }
    }

    pub fn with_context(mut self, key: &str, value: &str) -> Self {
        self.context.insert(key.to_owned(), value.to_owned());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Malformed(e.to_string()))
    }

    fn check(&self, org: &Organization) -> Result<(), EvalError> {
        if org.user(&self.user).is_none() {
            return Err(OrgError::UnknownUser(self.user.clone()).into());
        }
        if !org.has_account(&self.account) {
            return Err(OrgError::UnknownAccount(self.account.clone()).into());
        }
        if self.resource.is_empty() {
            return Err(EvalError::EmptyResource);
        }
        if self.resource.contains('*') {
            return Err(EvalError::WildcardResource(self.resource.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Identity { permission_set: String, policy: String },
    Resource { arn: String },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Identity { permission_set, policy } => {
                write!(f, "permission set {permission_set} / {policy}")
            }
            Origin::Resource { arn } => write!(f, "resource policy of {arn}"),
        }
    }
}

/// How one statement fared against the request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchTrace {
    pub origin: Origin,
    pub statement: usize,
    pub effect: Effect,
    pub action_match: bool,
    pub resource_match: bool,
    pub condition_match: bool,
    /// Only set for resource-based statements.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub principal_match: Option<bool>,
}

impl MatchTrace {
    pub fn matched(&self) -> bool {
        self.action_match
            && self.resource_match
            && self.condition_match
            && self.principal_match.unwrap_or(true)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.origin, Origin::Identity { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub reason: Reason,
    /// Owner of the target resource (the acting account when unregistered).
    pub owner_account: String,
    pub cross_account: bool,
    /// A resource share lists the acting account.
    pub shared: bool,
    pub trace: Vec<MatchTrace>,
}

impl Decision {
    fn any(&self, identity: bool, effect: Effect) -> bool {
        self.trace
            .iter()
            .any(|t| t.is_identity() == identity && t.effect == effect && t.matched())
    }

    pub fn identity_allow(&self) -> bool {
        self.any(true, Effect::Allow)
    }

    pub fn resource_allow(&self) -> bool {
        self.any(false, Effect::Allow)
    }

    pub fn explicit_deny(&self) -> bool {
        self.trace.iter().any(|t| t.effect == Effect::Deny && t.matched())
    }

    /// Identity statements whose `Allow` matched.
    pub fn contributing_identity_allows(&self) -> impl Iterator<Item = &MatchTrace> {
        self.trace
            .iter()
            .filter(|t| t.is_identity() && t.effect == Effect::Allow && t.matched())
    }
}

fn trace_statement(
    origin: Origin,
    index: usize,
    statement: &Statement,
    request: &AccessRequest,
    resource_based: bool,
) -> MatchTrace {
    MatchTrace {
        origin,
        statement: index,
        effect: statement.effect(),
        action_match: statement.matches_action(&request.action),
        resource_match: statement.matches_resource(&request.resource),
        condition_match: statement.condition_holds(&request.context),
        principal_match: resource_based
            .then(|| statement.covers_principal(&request.user, &request.account)),
    }
}

/// Decides `request` against `org`, recording every consulted statement.
pub fn authorize(org: &Organization, request: &AccessRequest) -> Result<Decision, EvalError> {
    request.check(org)?;

    let mut trace = Vec::new();
    for resolved in org.resolve_identity_policies(&request.user, &request.account)? {
        for (idx, statement) in resolved.policy.statements().iter().enumerate() {
            let origin = Origin::Identity {
                permission_set: resolved.permission_set.to_owned(),
                policy: resolved.policy.name().to_owned(),
            };
            trace.push(trace_statement(origin, idx, statement, request, false));
        }
    }

    let (owner_account, resource_policy) = match org.resource_lookup(&request.resource) {
        Ok(resource) => (resource.owner_account.clone(), resource.policy.as_ref()),
        Err(_) => (request.account.clone(), None),
    };
    if let Some(policy) = resource_policy {
        for (idx, statement) in policy.statements().iter().enumerate() {
            let origin = Origin::Resource {
                arn: request.resource.clone(),
            };
            trace.push(trace_statement(origin, idx, statement, request, true));
        }
    }

    let cross_account = owner_account != request.account;
    let shared = cross_account && org.shares_covering(&request.resource, &request.account);
    let mut decision = Decision {
        verdict: Verdict::Deny,
        reason: Reason::ImplicitDeny,
        owner_account,
        cross_account,
        shared,
        trace,
    };

    decision.reason = if decision.explicit_deny() {
        Reason::ExplicitDeny
    } else if !cross_account && (decision.identity_allow() || decision.resource_allow()) {
        Reason::SameAccountAllow
    } else if cross_account && decision.identity_allow() && (decision.resource_allow() || shared) {
        Reason::CrossAccountAllow
    } else {
        Reason::ImplicitDeny
    };
    decision.verdict = decision.reason.verdict();
    Ok(decision)
}

/// Decides a batch in input order. Nothing is sent to `sink` unless every
/// request is valid; the first invalid request is reported by index.
///
/// Requests without a `time` are logged at `start` plus their index in
/// seconds.
pub fn simulate(
    org: &Organization,
    requests: &[AccessRequest],
    sink: Option<&dyn AuditSink>,
    start: Timestamp,
) -> Result<Vec<Decision>, EvalError> {
    let decisions = requests
        .iter()
        .enumerate()
        .map(|(index, request)| {
            authorize(org, request).map_err(|source| EvalError::Batch {
                index,
                source: Box::new(source),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(sink) = sink {
        for (index, (request, decision)) in requests.iter().zip(&decisions).enumerate() {
            let time = request
                .time
                .unwrap_or_else(|| start.plus_seconds(index as i64));
            sink.record(AuditEvent::api_call(
                time,
                &request.user,
                &request.account,
                request.action.clone(),
                &request.resource,
                decision.verdict,
            ));
        }
    }
    Ok(decisions)
}
