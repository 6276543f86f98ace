use std::collections::BTreeSet;
use std::fmt;

use crate::policy::PolicyDocument;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Account {
    pub id: String,
    pub name: String,
}

/// A node of the organization tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrgUnit {
    pub name: String,
    pub accounts: Vec<Account>,
    pub children: Vec<OrgUnit>,
}

impl OrgUnit {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            accounts: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_account(mut self, id: impl Into<String>, name: impl Into<String>) -> Self {
        self.accounts.push(Account {
            id: id.into(),
            name: name.into(),
        });
        self
    }

    pub fn with_child(mut self, child: OrgUnit) -> Self {
        self.children.push(child);
        self
    }

    pub fn child(&self, name: &str) -> Option<&OrgUnit> {
        self.children.iter().find(|c| c.name == name)
    }

    pub(crate) fn child_mut(&mut self, name: &str) -> Option<&mut OrgUnit> {
        self.children.iter_mut().find(|c| c.name == name)
    }

    /// Accounts at or below this unit, depth-first in document order.
    pub fn subtree_accounts(&self) -> Vec<&Account> {
        let mut out = Vec::new();
        self.collect_accounts(&mut out);
        out
    }

    fn collect_accounts<'a>(&'a self, out: &mut Vec<&'a Account>) {
        out.extend(self.accounts.iter());
        for child in &self.children {
            child.collect_accounts(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsoUser {
    pub id: String,
    pub display_name: String,
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsoGroup {
    pub id: String,
    pub display_name: String,
}

/// A reusable bundle of identity-based policies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionSet {
    pub id: String,
    pub policies: Vec<PolicyDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    User(String),
    Group(String),
}

impl Subject {
    pub fn id(&self) -> &str {
        match self {
            Subject::User(id) | Subject::Group(id) => id,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::User(id) => write!(f, "user:{id}"),
            Subject::Group(id) => write!(f, "group:{id}"),
        }
    }
}

/// Grants a permission set to a user-account or group-account pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub subject: Subject,
    pub account: String,
    pub permission_set: String,
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.account, self.permission_set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub arn: String,
    pub owner_account: String,
    pub policy: Option<PolicyDocument>,
}

/// Account-level share of a resource, independent of principals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceShare {
    pub resource: String,
    pub shared_with: BTreeSet<String>,
}

/// Everything needed to build an [`Organization`](super::Organization).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub management_account: String,
    pub root: OrgUnit,
    pub users: Vec<SsoUser>,
    pub groups: Vec<SsoGroup>,
    pub permission_sets: Vec<PermissionSet>,
    pub assignments: Vec<Assignment>,
    pub resources: Vec<Resource>,
    pub shares: Vec<ResourceShare>,
}

impl Scenario {
    /// A scenario with only a root unit holding the management account.
    pub fn minimal(management_account: impl Into<String>) -> Self {
        let id = management_account.into();
        Self {
            root: OrgUnit::new("Root").with_account(id.clone(), "management"),
            management_account: id,
            users: Vec::new(),
            groups: Vec::new(),
            permission_sets: Vec::new(),
            assignments: Vec::new(),
            resources: Vec::new(),
            shares: Vec::new(),
        }
    }
}

/// The account segment of an ARN (`arn:partition:service:region:account:...`),
/// when present and non-empty.
pub fn arn_account(arn: &str) -> Option<&str> {
    let mut parts = arn.splitn(6, ':');
    if parts.next()? != "arn" {
        return None;
    }
    let account = parts.nth(3)?;
    parts.next()?;
    (!account.is_empty()).then_some(account)
}
