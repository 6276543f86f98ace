//! Organization model: OU tree, accounts, SSO users and groups, permission
//! sets and their assignments, resources and resource shares.
//!
//! [`Organization`] values are immutable. Updates such as
//! [`Organization::provision_account`] return a new value and share
//! untouched parts with the original.

mod scenario;
mod types;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub use types::{
    arn_account, Account, Assignment, OrgUnit, PermissionSet, Resource, ResourceShare, Scenario,
    SsoGroup, SsoUser, Subject,
};

use crate::policy::PolicyDocument;

/// One problem found while validating a scenario.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("management account `{0}` is not in the OU tree")]
    MissingManagementAccount(String),
    #[error("OU `{path}` has an invalid name `{name}`")]
    InvalidOuName { path: String, name: String },
    #[error("OU `{parent}` has more than one child named `{name}`")]
    DuplicateOuName { parent: String, name: String },
    #[error("account `{id}` appears more than once (OUs: {})", .ous.join(", "))]
    DuplicateAccount { id: String, ous: Vec<String> },
    #[error("account name `{0}` is used by more than one account")]
    DuplicateAccountName(String),
    #[error("{kind} with an empty id")]
    EmptyId { kind: &'static str },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("id `{0}` is used by both a user and an account")]
    IdCollision(String),
    #[error("user `{user}` is a member of unknown group `{group}`")]
    UnknownGroup { user: String, group: String },
    #[error("{owner}: policy `{policy}` is invalid: {reason}")]
    InvalidPolicy {
        owner: String,
        policy: String,
        reason: String,
    },
    #[error("permission set `{permission_set}` has two policies named `{policy}`")]
    DuplicatePolicyName { permission_set: String, policy: String },
    #[error("permission set `{permission_set}`: policy `{policy}` has a Principal element")]
    PrincipalInIdentityPolicy { permission_set: String, policy: String },
    #[error("assignment of `{permission_set}` to account `{account}` must name exactly one of user or group (user: {user:?}, group: {group:?})")]
    AmbiguousSubject {
        account: String,
        permission_set: String,
        user: Option<String>,
        group: Option<String>,
    },
    #[error("assignment {assignment} references unknown {missing}")]
    DanglingAssignment { assignment: String, missing: String },
    #[error("duplicate assignment {0}")]
    DuplicateAssignment(String),
    #[error("resource `{0}` contains a wildcard")]
    WildcardArn(String),
    #[error("resource `{arn}` is owned by unknown account `{owner}`")]
    UnknownOwner { arn: String, owner: String },
    #[error("resource `{arn}` names account `{arn_account}` but is owned by `{owner}`")]
    ArnAccountMismatch {
        arn: String,
        owner: String,
        arn_account: String,
    },
    #[error("resource `{arn}`: statement {statement} of its policy has no Principal")]
    MissingPrincipal { arn: String, statement: usize },
    #[error("share references unknown resource `{0}`")]
    UnknownShareResource(String),
    #[error("share of `{0}` lists no accounts")]
    EmptyShare(String),
    #[error("share of `{resource}` includes its owner `{owner}`")]
    ShareIncludesOwner { resource: String, owner: String },
    #[error("share of `{resource}` lists unknown account `{account}`")]
    UnknownShareAccount { resource: String, account: String },
}

#[derive(Debug, thiserror::Error)]
pub enum OrgError {
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{}", render_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown OU path `{0}`")]
    UnknownOu(String),
    #[error("account name `{0}` is already in use")]
    DuplicateAccountName(String),
    #[error("account name must not be empty")]
    EmptyAccountName,
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown account `{0}`")]
    UnknownAccount(String),
    #[error("unknown resource `{0}`")]
    UnknownResource(String),
    #[error("permission set `{0}` already exists")]
    PermissionSetExists(String),
}

fn render_violations(violations: &[Violation]) -> String {
    let mut out = format!("scenario has {} violation(s)", violations.len());
    for v in violations {
        out.push_str("\n  - ");
        out.push_str(&v.to_string());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AccountEntry {
    name: String,
    ou_path: String,
}

/// A permission-set policy that applies to a (user, account) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedPolicy<'a> {
    pub permission_set: &'a str,
    pub policy: &'a PolicyDocument,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Organization {
    management_account: String,
    root: Arc<OrgUnit>,
    accounts: Arc<BTreeMap<String, AccountEntry>>,
    users: Arc<BTreeMap<String, SsoUser>>,
    groups: Arc<BTreeMap<String, SsoGroup>>,
    permission_sets: Arc<BTreeMap<String, PermissionSet>>,
    assignments: Arc<Vec<Assignment>>,
    resources: Arc<BTreeMap<String, Resource>>,
    shares: Arc<Vec<ResourceShare>>,
}

/// Builds and validates an organization, reporting every violation found.
pub fn build_org(scenario: Scenario) -> Result<Organization, OrgError> {
    Organization::build(scenario)
}

/// Parses and builds a scenario file.
pub fn load_scenario(text: &str) -> Result<Organization, OrgError> {
    let (scenario, mut violations) = scenario::decode(text)?;
    match Organization::build(scenario) {
        Ok(org) if violations.is_empty() => Ok(org),
        Ok(_) => Err(OrgError::Invalid(violations)),
        Err(OrgError::Invalid(more)) => {
            violations.extend(more);
            Err(OrgError::Invalid(violations))
        }
        Err(other) => Err(other),
    }
}

fn join_path(parent: &str, name: &str) -> String {
    if parent == "/" {
        format!("/{name}")
    } else {
        format!("{parent}/{name}")
    }
}

/// Splits `/Red/Sub`, `Red/Sub` or `/` into OU names below the root.
fn path_segments(path: &str) -> Vec<&str> {
    path.split('/').filter(|s| !s.is_empty()).collect()
}

fn walk_units<'a>(
    unit: &'a OrgUnit,
    path: String,
    out: &mut Vec<(String, &'a OrgUnit)>,
) {
    out.push((path.clone(), unit));
    for child in &unit.children {
        walk_units(child, join_path(&path, &child.name), out);
    }
}

fn check_ids<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
    violations: &mut Vec<Violation>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.is_empty() {
            violations.push(Violation::EmptyId { kind });
        } else if !seen.insert(id) {
            violations.push(Violation::DuplicateId {
                kind,
                id: id.to_owned(),
            });
        }
    }
    seen
}

fn keyed<T>(items: Vec<T>, key: impl Fn(&T) -> &str) -> BTreeMap<String, T> {
    items
        .into_iter()
        .map(|item| (key(&item).to_owned(), item))
        .collect()
}

fn validate(scenario: &Scenario) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut units = Vec::new();
    walk_units(&scenario.root, "/".to_owned(), &mut units);

    let mut account_ous: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut account_names: BTreeMap<&str, usize> = BTreeMap::new();
    for (path, unit) in &units {
        let mut sibling_names = BTreeSet::new();
        for child in &unit.children {
            if child.name.is_empty() || child.name.contains('/') {
                violations.push(Violation::InvalidOuName {
                    path: path.clone(),
                    name: child.name.clone(),
                });
            }
            if !sibling_names.insert(child.name.as_str()) {
                violations.push(Violation::DuplicateOuName {
                    parent: path.clone(),
                    name: child.name.clone(),
                });
            }
        }
        for account in &unit.accounts {
            if account.id.is_empty() {
                violations.push(Violation::EmptyId { kind: "account" });
            }
            account_ous.entry(&account.id).or_default().push(path.clone());
            *account_names.entry(&account.name).or_default() += 1;
        }
    }
    for (id, ous) in &account_ous {
        if ous.len() > 1 {
            violations.push(Violation::DuplicateAccount {
                id: id.to_string(),
                ous: ous.clone(),
            });
        }
    }
    for (name, count) in &account_names {
        if *count > 1 {
            violations.push(Violation::DuplicateAccountName(name.to_string()));
        }
    }
    if !account_ous.contains_key(scenario.management_account.as_str()) {
        violations.push(Violation::MissingManagementAccount(
            scenario.management_account.clone(),
        ));
    }
    let account_exists = |id: &str| account_ous.contains_key(id);

    let group_ids = check_ids(
        "group",
        scenario.groups.iter().map(|g| g.id.as_str()),
        &mut violations,
    );
    let user_ids = check_ids(
        "user",
        scenario.users.iter().map(|u| u.id.as_str()),
        &mut violations,
    );
    let set_ids = check_ids(
        "permission set",
        scenario.permission_sets.iter().map(|p| p.id.as_str()),
        &mut violations,
    );

    for user in &scenario.users {
        if account_exists(&user.id) {
            violations.push(Violation::IdCollision(user.id.clone()));
        }
        for group in &user.groups {
            if !group_ids.contains(group.as_str()) {
                violations.push(Violation::UnknownGroup {
                    user: user.id.clone(),
                    group: group.clone(),
                });
            }
        }
    }

    for set in &scenario.permission_sets {
        let mut names = BTreeSet::new();
        for policy in &set.policies {
            if !names.insert(policy.name()) {
                violations.push(Violation::DuplicatePolicyName {
                    permission_set: set.id.clone(),
                    policy: policy.name().to_owned(),
                });
            }
            if policy.has_principals() {
                violations.push(Violation::PrincipalInIdentityPolicy {
                    permission_set: set.id.clone(),
                    policy: policy.name().to_owned(),
                });
            }
        }
    }

    let mut seen_assignments = BTreeSet::new();
    for a in &scenario.assignments {
        let mut missing = Vec::new();
        match &a.subject {
            Subject::User(u) if !user_ids.contains(u.as_str()) => {
                missing.push(format!("user `{u}`"))
            }
            Subject::Group(g) if !group_ids.contains(g.as_str()) => {
                missing.push(format!("group `{g}`"))
            }
            _ => {}
        }
        if !account_exists(&a.account) {
            missing.push(format!("account `{}`", a.account));
        }
        if !set_ids.contains(a.permission_set.as_str()) {
            missing.push(format!("permission set `{}`", a.permission_set));
        }
        for m in missing {
            violations.push(Violation::DanglingAssignment {
                assignment: a.to_string(),
                missing: m,
            });
        }
        if !seen_assignments.insert(a) {
            violations.push(Violation::DuplicateAssignment(a.to_string()));
        }
    }

    let mut owners: BTreeMap<&str, &str> = BTreeMap::new();
    for r in &scenario.resources {
        if r.arn.is_empty() {
            violations.push(Violation::EmptyId { kind: "resource" });
            continue;
        }
        if owners.insert(&r.arn, &r.owner_account).is_some() {
            violations.push(Violation::DuplicateId {
                kind: "resource",
                id: r.arn.clone(),
            });
        }
        if r.arn.contains('*') {
            violations.push(Violation::WildcardArn(r.arn.clone()));
        }
        if !account_exists(&r.owner_account) {
            violations.push(Violation::UnknownOwner {
                arn: r.arn.clone(),
                owner: r.owner_account.clone(),
            });
        }
        if let Some(segment) = arn_account(&r.arn) {
            if segment != r.owner_account {
                violations.push(Violation::ArnAccountMismatch {
                    arn: r.arn.clone(),
                    owner: r.owner_account.clone(),
                    arn_account: segment.to_owned(),
                });
            }
        }
        if let Some(policy) = &r.policy {
            for (idx, s) in policy.statements().iter().enumerate() {
                if s.principals().is_none() {
                    violations.push(Violation::MissingPrincipal {
                        arn: r.arn.clone(),
                        statement: idx,
                    });
                }
            }
        }
    }

    for share in &scenario.shares {
        let Some(owner) = owners.get(share.resource.as_str()) else {
            violations.push(Violation::UnknownShareResource(share.resource.clone()));
            continue;
        };
        if share.shared_with.is_empty() {
            violations.push(Violation::EmptyShare(share.resource.clone()));
        }
        for account in &share.shared_with {
            if account == owner {
                violations.push(Violation::ShareIncludesOwner {
                    resource: share.resource.clone(),
                    owner: account.clone(),
                });
            } else if !account_exists(account) {
                violations.push(Violation::UnknownShareAccount {
                    resource: share.resource.clone(),
                    account: account.clone(),
                });
            }
        }
    }

    violations
}

fn index_accounts(root: &OrgUnit) -> BTreeMap<String, AccountEntry> {
    let mut units = Vec::new();
    walk_units(root, "/".to_owned(), &mut units);
    units
        .into_iter()
        .flat_map(|(path, unit)| {
            unit.accounts.iter().map(move |a| {
                (
                    a.id.clone(),
                    AccountEntry {
                        name: a.name.clone(),
                        ou_path: path.clone(),
                    },
                )
            })
        })
        .collect()
}

impl Organization {
    pub fn build(scenario: Scenario) -> Result<Self, OrgError> {
        let violations = validate(&scenario);
        if !violations.is_empty() {
            return Err(OrgError::Invalid(violations));
        }
        Ok(Self::assemble(scenario))
    }

    fn assemble(s: Scenario) -> Self {
        Self {
            accounts: Arc::new(index_accounts(&s.root)),
            root: Arc::new(s.root),
            management_account: s.management_account,
            users: Arc::new(keyed(s.users, |u| &u.id)),
            groups: Arc::new(keyed(s.groups, |g| &g.id)),
            permission_sets: Arc::new(keyed(s.permission_sets, |p| &p.id)),
            assignments: Arc::new(s.assignments),
            resources: Arc::new(keyed(s.resources, |r| &r.arn)),
            shares: Arc::new(s.shares),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, OrgError> {
        load_scenario(text)
    }

    /// Exports the organization back to a scenario (ids ascending for users,
    /// groups, permission sets and resources).
    pub fn to_scenario(&self) -> Scenario {
        Scenario {
            management_account: self.management_account.clone(),
            root: (*self.root).clone(),
            users: self.users.values().cloned().collect(),
            groups: self.groups.values().cloned().collect(),
            permission_sets: self.permission_sets.values().cloned().collect(),
            assignments: (*self.assignments).clone(),
            resources: self.resources.values().cloned().collect(),
            shares: (*self.shares).clone(),
        }
    }

    pub fn to_json(&self) -> String {
        scenario::encode(&self.to_scenario())
    }

    pub fn management_account(&self) -> &str {
        &self.management_account
    }

    pub fn root(&self) -> &OrgUnit {
        &self.root
    }

    pub fn has_account(&self, id: &str) -> bool {
        self.accounts.contains_key(id)
    }

    /// Account ids, ascending.
    pub fn account_ids(&self) -> impl Iterator<Item = &str> {
        self.accounts.keys().map(String::as_str)
    }

    pub fn account_name(&self, id: &str) -> Option<&str> {
        self.accounts.get(id).map(|a| a.name.as_str())
    }

    /// Slash-separated path of the OU holding the account (`/` for the root).
    pub fn account_ou(&self, id: &str) -> Option<&str> {
        self.accounts.get(id).map(|a| a.ou_path.as_str())
    }

    pub fn user(&self, id: &str) -> Option<&SsoUser> {
        self.users.get(id)
    }

    pub fn users(&self) -> impl Iterator<Item = &SsoUser> {
        self.users.values()
    }

    pub fn groups(&self) -> impl Iterator<Item = &SsoGroup> {
        self.groups.values()
    }

    pub fn permission_set(&self, id: &str) -> Option<&PermissionSet> {
        self.permission_sets.get(id)
    }

    pub fn permission_sets(&self) -> impl Iterator<Item = &PermissionSet> {
        self.permission_sets.values()
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn resources(&self) -> impl Iterator<Item = &Resource> {
        self.resources.values()
    }

    pub fn shares(&self) -> &[ResourceShare] {
        &self.shares
    }

    pub fn ou(&self, path: &str) -> Result<&OrgUnit, OrgError> {
        let mut unit: &OrgUnit = &self.root;
        for segment in path_segments(path) {
            unit = unit
                .child(segment)
                .ok_or_else(|| OrgError::UnknownOu(path.to_owned()))?;
        }
        Ok(unit)
    }

    /// All accounts at or below the OU, depth-first in document order.
    pub fn accounts_in_subtree(&self, ou_path: &str) -> Result<Vec<String>, OrgError> {
        Ok(self
            .ou(ou_path)?
            .subtree_accounts()
            .into_iter()
            .map(|a| a.id.clone())
            .collect())
    }

    /// Returns a new organization with an account `name` added under
    /// `ou_path`, together with the fresh account id. `self` is unchanged.
    pub fn provision_account(
        &self,
        name: &str,
        ou_path: &str,
    ) -> Result<(Organization, String), OrgError> {
        if name.is_empty() {
            return Err(OrgError::EmptyAccountName);
        }
        self.ou(ou_path)?;
        if self.accounts.values().any(|a| a.name == name) {
            return Err(OrgError::DuplicateAccountName(name.to_owned()));
        }
        let id = self.fresh_account_id();

        let mut next = self.clone();
        let mut unit = Arc::make_mut(&mut next.root);
        for segment in path_segments(ou_path) {
            unit = unit.child_mut(segment).expect("path checked above");
        }
        unit.accounts.push(Account {
            id: id.clone(),
            name: name.to_owned(),
        });
        let canonical = path_segments(ou_path)
            .into_iter()
            .fold("/".to_owned(), |acc, s| join_path(&acc, s));
        Arc::make_mut(&mut next.accounts).insert(
            id.clone(),
            AccountEntry {
                name: name.to_owned(),
                ou_path: canonical,
            },
        );
        Ok((next, id))
    }

    /// Next 12-digit id after the largest numeric 12-digit id in use.
    fn fresh_account_id(&self) -> String {
        const FIRST: u64 = 100_000_000_000;
        const LAST: u64 = 999_999_999_999;
        let numeric = |id: &str| {
            (id.len() == 12 && id.bytes().all(|b| b.is_ascii_digit()))
                .then(|| id.parse::<u64>().ok())
                .flatten()
        };
        let max = self.accounts.keys().filter_map(|id| numeric(id)).max();
        let start = match max {
            Some(m) if m < LAST => m + 1,
            _ => FIRST,
        };
        (start..=LAST)
            .chain(FIRST..start)
            .map(|n| n.to_string())
            .find(|id| !self.accounts.contains_key(id) && !self.users.contains_key(id))
            .expect("12-digit account id space exhausted")
    }

    /// Policies from permission sets assigned to the pair directly or through
    /// any of the user's groups. Each permission set contributes once; sets
    /// are ordered by id, policies in declaration order.
    pub fn resolve_identity_policies(
        &self,
        user_id: &str,
        account_id: &str,
    ) -> Result<Vec<ResolvedPolicy<'_>>, OrgError> {
        let user = self
            .users
            .get(user_id)
            .ok_or_else(|| OrgError::UnknownUser(user_id.to_owned()))?;
        if !self.has_account(account_id) {
            return Err(OrgError::UnknownAccount(account_id.to_owned()));
        }
        let applies = |subject: &Subject| match subject {
            Subject::User(u) => u == user_id,
            Subject::Group(g) => user.groups.iter().any(|ug| ug == g),
        };
        let set_ids: BTreeSet<&str> = self
            .assignments
            .iter()
            .filter(|a| a.account == account_id && applies(&a.subject))
            .map(|a| a.permission_set.as_str())
            .collect();
        Ok(set_ids
            .into_iter()
            .filter_map(|id| self.permission_sets.get(id))
            .flat_map(|set| {
                set.policies.iter().map(move |policy| ResolvedPolicy {
                    permission_set: &set.id,
                    policy,
                })
            })
            .collect())
    }

    pub fn resource_lookup(&self, arn: &str) -> Result<&Resource, OrgError> {
        self.resources
            .get(arn)
            .ok_or_else(|| OrgError::UnknownResource(arn.to_owned()))
    }

    /// True iff some share of `arn` lists `account_id`. Owners never need one.
    pub fn shares_covering(&self, arn: &str, account_id: &str) -> bool {
        self.shares
            .iter()
            .any(|s| s.resource == arn && s.shared_with.contains(account_id))
    }

    /// What-if copy in which `set` (if any) is the only permission set the
    /// user holds in `account_id`: the user's group memberships and direct
    /// assignments for that account are dropped.
    pub fn with_sole_permission_set(
        &self,
        user_id: &str,
        account_id: &str,
        set: Option<PermissionSet>,
    ) -> Result<Organization, OrgError> {
        if !self.users.contains_key(user_id) {
            return Err(OrgError::UnknownUser(user_id.to_owned()));
        }
        if !self.has_account(account_id) {
            return Err(OrgError::UnknownAccount(account_id.to_owned()));
        }
        let mut next = self.clone();
        Arc::make_mut(&mut next.users)
            .get_mut(user_id)
            .expect("checked above")
            .groups
            .clear();
        let assignments = Arc::make_mut(&mut next.assignments);
        assignments.retain(|a| {
            !(a.account == account_id && a.subject == Subject::User(user_id.to_owned()))
        });
        if let Some(set) = set {
            if self.permission_sets.contains_key(&set.id) {
                return Err(OrgError::PermissionSetExists(set.id));
            }
            assignments.push(Assignment {
                subject: Subject::User(user_id.to_owned()),
                account: account_id.to_owned(),
                permission_set: set.id.clone(),
            });
            Arc::make_mut(&mut next.permission_sets).insert(set.id.clone(), set);
        }
        Ok(next)
    }
}
