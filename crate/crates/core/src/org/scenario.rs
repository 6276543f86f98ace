//! JSON scenario files.
//!
//! ```json
//! {
//!   "organization": {"management_account": "100000000000",
//!                    "root": {"name": "Root", "accounts": [...], "children": [...]}},
//!   "users": [{"id": "alice", "display_name": "Alice", "groups": ["red-frontend"]}],
//!   "groups": [{"id": "red-frontend", "display_name": "Team Red frontend"}],
//!   "permission_sets": [{"id": "frontend", "policies": [{"name": "web", "document": {...}}]}],
//!   "assignments": [{"group": "red-frontend", "account": "...", "permission_set": "frontend"}],
//!   "resources": [{"arn": "...", "owner_account": "...", "policy": {...}}],
//!   "shares": [{"resource": "...", "shared_with": ["..."]}]
//! }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::types::*;
use super::{OrgError, Violation};
use crate::policy::{policy_from_value, PolicyDocument};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireScenario {
    organization: WireOrganization,
    #[serde(default)]
    users: Vec<WireUser>,
    #[serde(default)]
    groups: Vec<WireGroup>,
    #[serde(default)]
    permission_sets: Vec<WirePermissionSet>,
    #[serde(default)]
    assignments: Vec<WireAssignment>,
    #[serde(default)]
    resources: Vec<WireResource>,
    #[serde(default)]
    shares: Vec<WireShare>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireOrganization {
    management_account: String,
    root: WireOu,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireOu {
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    accounts: Vec<WireAccount>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<WireOu>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireAccount {
    id: String,
    name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireUser {
    id: String,
    #[serde(default)]
    display_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    groups: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireGroup {
    id: String,
    #[serde(default)]
    display_name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WirePermissionSet {
    id: String,
    #[serde(default)]
    policies: Vec<WireNamedPolicy>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireNamedPolicy {
    name: String,
    document: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireAssignment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    user: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    account: String,
    permission_set: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireResource {
    arn: String,
    owner_account: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    policy: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireShare {
    resource: String,
    shared_with: BTreeSet<String>,
}

impl WireOu {
    fn into_unit(self) -> OrgUnit {
        OrgUnit {
            name: self.name,
            accounts: self
                .accounts
                .into_iter()
                .map(|a| Account { id: a.id, name: a.name })
                .collect(),
            children: self.children.into_iter().map(WireOu::into_unit).collect(),
        }
    }

    fn from_unit(unit: &OrgUnit) -> Self {
        Self {
            name: unit.name.clone(),
            accounts: unit
                .accounts
                .iter()
                .map(|a| WireAccount {
                    id: a.id.clone(),
                    name: a.name.clone(),
                })
                .collect(),
            children: unit.children.iter().map(WireOu::from_unit).collect(),
        }
    }
}

fn policy_value(doc: &PolicyDocument) -> serde_json::Value {
    serde_json::to_value(doc).expect("policy documents always serialize")
}

/// Decodes a scenario file. Problems inside embedded policies and assignment
/// subjects are returned as violations alongside the (partial) scenario so
/// that validation can report everything at once.
pub(crate) fn decode(text: &str) -> Result<(Scenario, Vec<Violation>), OrgError> {
    let wire: WireScenario = serde_json::from_str(text)?;
    let mut violations = Vec::new();

    let permission_sets = wire
        .permission_sets
        .into_iter()
        .map(|ps| {
            let policies = ps
                .policies
                .into_iter()
                .filter_map(|p| match policy_from_value(&p.name, p.document) {
                    Ok(doc) => Some(doc),
                    Err(err) => {
                        violations.push(Violation::InvalidPolicy {
                            owner: format!("permission set `{}`", ps.id),
                            policy: p.name,
                            reason: err.to_string(),
                        });
                        None
                    }
                })
                .collect();
            PermissionSet { id: ps.id, policies }
        })
        .collect();

    let resources = wire
        .resources
        .into_iter()
        .map(|r| {
            let policy = r.policy.and_then(|value| match policy_from_value(&r.arn, value) {
                Ok(doc) => Some(doc),
                Err(err) => {
                    violations.push(Violation::InvalidPolicy {
                        owner: format!("resource `{}`", r.arn),
                        policy: r.arn.clone(),
                        reason: err.to_string(),
                    });
                    None
                }
            });
            Resource {
                arn: r.arn,
                owner_account: r.owner_account,
                policy,
            }
        })
        .collect();

    let assignments = wire
        .assignments
        .into_iter()
        .filter_map(|a| {
            let subject = match (a.user, a.group) {
                (Some(u), None) => Subject::User(u),
                (None, Some(g)) => Subject::Group(g),
                (user, group) => {
                    violations.push(Violation::AmbiguousSubject {
                        account: a.account,
                        permission_set: a.permission_set,
                        user,
                        group,
                    });
                    return None;
                }
            };
            Some(Assignment {
                subject,
                account: a.account,
                permission_set: a.permission_set,
            })
        })
        .collect();

    let scenario = Scenario {
        management_account: wire.organization.management_account,
        root: wire.organization.root.into_unit(),
        users: wire
            .users
            .into_iter()
            .map(|u| SsoUser {
                id: u.id,
                display_name: u.display_name,
                groups: u.groups,
            })
            .collect(),
        groups: wire
            .groups
            .into_iter()
            .map(|g| SsoGroup {
                id: g.id,
                display_name: g.display_name,
            })
            .collect(),
        permission_sets,
        assignments,
        resources,
        shares: wire
            .shares
            .into_iter()
            .map(|s| ResourceShare {
                resource: s.resource,
                shared_with: s.shared_with,
            })
            .collect(),
    };
    Ok((scenario, violations))
}

pub(crate) fn encode(scenario: &Scenario) -> String {
    let wire = WireScenario {
        organization: WireOrganization {
            management_account: scenario.management_account.clone(),
            root: WireOu::from_unit(&scenario.root),
        },
        users: scenario
            .users
            .iter()
            .map(|u| WireUser {
                id: u.id.clone(),
                display_name: u.display_name.clone(),
                groups: u.groups.clone(),
            })
            .collect(),
        groups: scenario
            .groups
            .iter()
            .map(|g| WireGroup {
                id: g.id.clone(),
                display_name: g.display_name.clone(),
            })
            .collect(),
        permission_sets: scenario
            .permission_sets
            .iter()
            .map(|ps| WirePermissionSet {
                id: ps.id.clone(),
                policies: ps
                    .policies
                    .iter()
                    .map(|p| WireNamedPolicy {
                        name: p.name().to_owned(),
                        document: policy_value(p),
                    })
                    .collect(),
            })
            .collect(),
        assignments: scenario
            .assignments
            .iter()
            .map(|a| {
                let (user, group) = match &a.subject {
                    Subject::User(u) => (Some(u.clone()), None),
                    Subject::Group(g) => (None, Some(g.clone())),
                };
                WireAssignment {
                    user,
                    group,
                    account: a.account.clone(),
                    permission_set: a.permission_set.clone(),
                }
            })
            .collect(),
        resources: scenario
            .resources
            .iter()
            .map(|r| WireResource {
                arn: r.arn.clone(),
                owner_account: r.owner_account.clone(),
                policy: r.policy.as_ref().map(policy_value),
            })
            .collect(),
        shares: scenario
            .shares
            .iter()
            .map(|s| WireShare {
                resource: s.resource.clone(),
                shared_with: s.shared_with.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("scenarios always serialize")
}
