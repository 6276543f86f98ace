//! Reference authorizer written directly against scenario JSON, sharing no
//! code with the library: patterns are compiled to anchored regexes and
//! assignments are resolved from the raw document.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use regex::Regex;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleDecision {
    ExplicitDeny,
    ImplicitDeny,
    SameAccountAllow,
    CrossAccountAllow,
}

impl OracleDecision {
    pub fn name(self) -> &'static str {
        match self {
            OracleDecision::ExplicitDeny => "ExplicitDeny",
            OracleDecision::ImplicitDeny => "ImplicitDeny",
            OracleDecision::SameAccountAllow => "SameAccountAllow",
            OracleDecision::CrossAccountAllow => "CrossAccountAllow",
        }
    }

    pub fn allows(self) -> bool {
        matches!(self, OracleDecision::SameAccountAllow | OracleDecision::CrossAccountAllow)
    }
}

pub struct OracleOrg {
    user_groups: BTreeMap<String, BTreeSet<String>>,
    assignments: Vec<(Option<String>, Option<String>, String, String)>,
    set_statements: BTreeMap<String, Vec<Value>>,
    resources: BTreeMap<String, (String, Vec<Value>)>,
    shares: Vec<(String, BTreeSet<String>)>,
    regex_cache: RefCell<HashMap<String, Regex>>,
}

pub struct OracleRequest<'a> {
    pub user: &'a str,
    pub account: &'a str,
    pub action: &'a str,
    pub resource: &'a str,
    pub context: &'a BTreeMap<String, String>,
}

fn strings(v: &Value) -> Vec<String> {
    match v {
        Value::String(s) => vec![s.clone()],
        Value::Array(items) => items.iter().map(|i| i.as_str().unwrap().to_owned()).collect(),
        _ => Vec::new(),
    }
}

fn field(v: &Value, key: &str) -> String {
    v.get(key).and_then(Value::as_str).unwrap_or_default().to_owned()
}

fn statements(doc: &Value) -> Vec<Value> {
    doc["Statement"].as_array().cloned().unwrap_or_default()
}

impl OracleOrg {
    pub fn new(scenario: &Value) -> Self {
        let user_groups = scenario["users"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|u| {
                let groups = u.get("groups").map(strings).unwrap_or_default();
                (field(u, "id"), groups.into_iter().collect())
            })
            .collect();
        let assignments = scenario["assignments"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|a| {
                (
                    a.get("user").and_then(Value::as_str).map(str::to_owned),
                    a.get("group").and_then(Value::as_str).map(str::to_owned),
                    field(a, "account"),
                    field(a, "permission_set"),
                )
            })
            .collect();
        let set_statements = scenario["permission_sets"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|s| {
                let stmts = s["policies"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .flat_map(|p| statements(&p["document"]))
                    .collect();
                (field(s, "id"), stmts)
            })
            .collect();
        let resources = scenario["resources"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|r| {
                let stmts = r.get("policy").map(statements).unwrap_or_default();
                (field(r, "arn"), (field(r, "owner_account"), stmts))
            })
            .collect();
        let shares = scenario["shares"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|s| (field(s, "resource"), strings(&s["shared_with"]).into_iter().collect()))
            .collect();
        Self {
            user_groups,
            assignments,
            set_statements,
            resources,
            shares,
            regex_cache: RefCell::new(HashMap::new()),
        }
    }

    fn glob(&self, pattern: &str, text: &str) -> bool {
        let mut cache = self.regex_cache.borrow_mut();
        let re = cache.entry(pattern.to_owned()).or_insert_with(|| {
            let body: Vec<String> = pattern.split('*').map(regex::escape).collect();
            Regex::new(&format!("^{}$", body.join(".*"))).unwrap()
        });
        re.is_match(text)
    }

    fn condition_ok(&self, stmt: &Value, ctx: &BTreeMap<String, String>) -> bool {
        let Some(cond) = stmt.get("Condition").and_then(Value::as_object) else {
            return true;
        };
        cond.iter().all(|(op, clauses)| {
            clauses.as_object().unwrap().iter().all(|(key, values)| {
                let Some(actual) = ctx.get(key) else {
                    return false;
                };
                strings(values).iter().any(|v| match op.as_str() {
                    "StringEquals" => v == actual,
                    "StringLike" => self.glob(v, actual),
                    other => panic!("oracle does not know operator {other}"),
                })
            })
        })
    }

    fn statement_applies(&self, stmt: &Value, req: &OracleRequest) -> bool {
        strings(&stmt["Action"]).iter().any(|p| self.glob(p, req.action))
            && strings(&stmt["Resource"]).iter().any(|p| self.glob(p, req.resource))
            && self.condition_ok(stmt, req.context)
    }

    fn identity_statements(&self, user: &str, account: &str) -> Vec<&Value> {
        let groups = &self.user_groups[user];
        let mut sets = BTreeSet::new();
        for (u, g, a, set) in &self.assignments {
            let subject = u.as_deref() == Some(user) || g.as_ref().is_some_and(|g| groups.contains(g));
            if subject && a == account {
                sets.insert(set.as_str());
            }
        }
        sets.into_iter()
            .flat_map(|s| self.set_statements[s].iter())
            .collect()
    }

    pub fn authorize(&self, req: &OracleRequest) -> OracleDecision {
        let identity: Vec<&Value> = self
            .identity_statements(req.user, req.account)
            .into_iter()
            .filter(|s| self.statement_applies(s, req))
            .collect();
        let (owner, resource_stmts) = match self.resources.get(req.resource) {
            Some((owner, stmts)) => (owner.as_str(), stmts.iter().collect::<Vec<_>>()),
            None => (req.account, Vec::new()),
        };
        let resource: Vec<&Value> = resource_stmts
            .into_iter()
            .filter(|s| {
                strings(&s["Principal"])
                    .iter()
                    .any(|p| p == req.user || p == req.account)
            })
            .filter(|s| self.statement_applies(s, req))
            .collect();

        let effect = |s: &&Value| field(s, "Effect");
        if identity.iter().chain(&resource).any(|s| effect(s) == "Deny") {
            return OracleDecision::ExplicitDeny;
        }
        let id_allow = identity.iter().any(|s| effect(s) == "Allow");
        let res_allow = resource.iter().any(|s| effect(s) == "Allow");
        if owner == req.account {
            if id_allow || res_allow {
                OracleDecision::SameAccountAllow
            } else {
                OracleDecision::ImplicitDeny
            }
        } else {
            let shared = self
                .shares
                .iter()
                .any(|(r, with)| r == req.resource && with.contains(req.account));
            if id_allow && (res_allow || shared) {
                OracleDecision::CrossAccountAllow
            } else {
                OracleDecision::ImplicitDeny
            }
        }
    }
}
