use std::fmt::Write;

use super::{authorize, AccessRequest, Decision, EvalError, MatchTrace, Origin, Reason};
use crate::org::Organization;
use crate::policy::Effect;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn failed_parts(t: &MatchTrace) -> Vec<&'static str> {
    let mut parts = Vec::new();
    if t.principal_match == Some(false) {
        parts.push("principal");
    }
    if !t.action_match {
        parts.push("action");
    }
    if !t.resource_match {
        parts.push("resource");
    }
    if !t.condition_match {
        parts.push("condition");
    }
    parts
}

fn label(t: &MatchTrace) -> String {
    match &t.origin {
        Origin::Identity { permission_set, policy } => {
            format!("identity {permission_set}/{policy}#{}", t.statement)
        }
        Origin::Resource { arn } => format!("resource {arn}#{}", t.statement),
    }
}

/// Deterministic text rendering of a decision and its trace.
pub fn render_trace(request: &AccessRequest, decision: &Decision) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "request: {} in {} -> {} on {}",
        request.user, request.account, request.action, request.resource
    );
    if !request.context.is_empty() {
        let ctx: Vec<_> = request.context.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "context: {}", ctx.join(", "));
    }
    let _ = writeln!(
        out,
        "resource owner: {} ({}), share: {}",
        decision.owner_account,
        if decision.cross_account { "cross-account" } else { "same account" },
        yes_no(decision.shared)
    );

    if decision.trace.is_empty() {
        let _ = writeln!(out, "statements: none");
    } else {
        let _ = writeln!(out, "statements:");
        for (n, t) in decision.trace.iter().enumerate() {
            let principal = t
                .principal_match
                .map(|p| format!("principal={} ", yes_no(p)))
                .unwrap_or_default();
            let outcome = if t.matched() {
                "matched".to_owned()
            } else {
                format!("no match ({})", failed_parts(t).join(", "))
            };
            let _ = writeln!(
                out,
                "  [{n}] {} {} {principal}action={} resource={} condition={} -> {outcome}",
                label(t),
                t.effect,
                yes_no(t.action_match),
                yes_no(t.resource_match),
                yes_no(t.condition_match),
            );
        }
    }

    let _ = writeln!(out, "rules:");
    let denies: Vec<_> = decision
        .trace
        .iter()
        .enumerate()
        .filter(|(_, t)| t.effect == Effect::Deny && t.matched())
        .map(|(n, t)| format!("[{n}] {}", label(t)))
        .collect();
    if denies.is_empty() {
        let _ = writeln!(out, "  explicit-deny: no matching Deny");
    } else {
        let _ = writeln!(out, "  explicit-deny: fired by {}", denies.join(", "));
    }
    if decision.reason != Reason::ExplicitDeny {
        let identity = decision.identity_allow();
        let resource = decision.resource_allow();
        if decision.cross_account {
            let ok = identity && (resource || decision.shared);
            let _ = writeln!(
                out,
                "  cross-account: identity Allow={}, resource Allow={}, share={} -> {}",
                yes_no(identity),
                yes_no(resource),
                yes_no(decision.shared),
                if ok { "satisfied" } else { "not satisfied" }
            );
        } else {
            let ok = identity || resource;
            let _ = writeln!(
                out,
                "  same-account: identity Allow={}, resource Allow={} -> {}",
                yes_no(identity),
                yes_no(resource),
                if ok { "satisfied" } else { "not satisfied" }
            );
        }
        if decision.reason == Reason::ImplicitDeny {
            let _ = writeln!(out, "  default: implicit deny");
        }
    }
    let _ = writeln!(out, "verdict: {} ({})", decision.verdict, decision.reason);
    out
}

/// Authorizes `request` and renders the trace.
pub fn explain(org: &Organization, request: &AccessRequest) -> Result<String, EvalError> {
    let decision = authorize(org, request)?;
    Ok(render_trace(request, &decision))
}
