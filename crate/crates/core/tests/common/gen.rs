//! Seeded random organizations and requests, produced as scenario JSON.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

pub const SMALL_ACTIONS: [&str; 4] = ["s3:GetObject", "s3:PutObject", "s3:ListBucket", "ec2:RunInstances"];

pub const ACTIONS: [&str; 10] = [
    "s3:GetObject",
    "s3:PutObject",
    "s3:ListBucket",
    "s3:DeleteObject",
    "ec2:RunInstances",
    "ec2:DescribeInstances",
    "ec2:TerminateInstances",
    "dynamodb:PutItem",
    "dynamodb:GetItem",
    "acm:DescribeCertificate",
];

#[derive(Debug, Clone)]
pub struct Shape {
    pub accounts: usize,
    pub users: usize,
    pub groups: usize,
    pub sets: usize,
    pub policies_per_set: usize,
    pub max_statements: usize,
    pub actions: Vec<&'static str>,
    /// Bucket ARNs; the first `registered` are in the resource registry.
    pub buckets: usize,
    pub registered: usize,
    pub conditions: bool,
    pub deny_rate: f64,
}

impl Shape {
    /// At most 3 accounts, 4 users, 6 identity statements, 4 actions and
    /// 3 resources.
    pub fn small() -> Self {
        Self {
            accounts: 3,
            users: 4,
            groups: 1,
            sets: 2,
            policies_per_set: 1,
            max_statements: 3,
            actions: SMALL_ACTIONS.to_vec(),
            buckets: 3,
            registered: 2,
            conditions: false,
            deny_rate: 0.2,
        }
    }

    pub fn large() -> Self {
        Self {
            accounts: 6,
            users: 12,
            groups: 4,
            sets: 6,
            policies_per_set: 2,
            max_statements: 4,
            actions: ACTIONS.to_vec(),
            buckets: 8,
            registered: 5,
            conditions: true,
            deny_rate: 0.2,
        }
    }
}

pub fn account_id(i: usize) -> String {
    format!("{}", 100_000_000_000u64 + i as u64 * 1_000_001)
}

pub fn bucket(i: usize) -> String {
    format!("arn:aws:s3:::b{i}")
}

pub fn action_pattern(rng: &mut impl Rng, actions: &[&str]) -> String {
    let action = *actions.choose(rng).unwrap();
    let (service, op) = action.split_once(':').unwrap();
    match rng.gen_range(0..10) {
        0 => "*".to_owned(),
        1 | 2 => format!("{service}:*"),
        3 | 4 => {
            let verb_end = op[1..].find(|c: char| c.is_ascii_uppercase()).map_or(op.len(), |i| i + 1);
            format!("{service}:{}*", &op[..verb_end])
        }
        _ => action.to_owned(),
    }
}

pub fn resource_pattern(rng: &mut impl Rng, shape: &Shape) -> String {
    match rng.gen_range(0..10) {
        0 | 1 => "*".to_owned(),
        2 => "arn:aws:s3:::b*".to_owned(),
        3 => format!("{}*", bucket(rng.gen_range(0..shape.buckets))),
        _ => bucket(rng.gen_range(0..shape.buckets)),
    }
}

fn condition(rng: &mut impl Rng) -> Value {
    match rng.gen_range(0..3) {
        0 => json!({"StringEquals": {"env": "prod"}}),
        1 => json!({"StringLike": {"env": ["p*", "qa"]}}),
        _ => json!({"StringEquals": {"team": ["red", "blue"]}}),
    }
}

pub fn statement(rng: &mut impl Rng, shape: &Shape, effect: &str, principal: Option<Value>) -> Value {
    let n_actions = rng.gen_range(1..=2);
    let actions: Vec<String> = (0..n_actions).map(|_| action_pattern(rng, &shape.actions)).collect();
    let n_res = rng.gen_range(1..=2);
    let resources: Vec<String> = (0..n_res).map(|_| resource_pattern(rng, shape)).collect();
    let mut s = json!({"Effect": effect, "Action": actions, "Resource": resources});
    if let Some(p) = principal {
        s["Principal"] = p;
    }
    if shape.conditions && rng.gen_bool(0.2) {
        s["Condition"] = condition(rng);
    }
    s
}

fn effect(rng: &mut impl Rng, shape: &Shape) -> &'static str {
    if rng.gen_bool(shape.deny_rate) {
        "Deny"
    } else {
        "Allow"
    }
}

fn principal(rng: &mut impl Rng, shape: &Shape) -> Value {
    let pick = |rng: &mut _| -> String {
        if Rng::gen_bool(rng, 0.5) {
            format!("u{}", Rng::gen_range(rng, 0..shape.users))
        } else {
            account_id(Rng::gen_range(rng, 0..shape.accounts))
        }
    };
    if rng.gen_bool(0.3) {
        json!([pick(rng), pick(rng)])
    } else {
        json!(pick(rng))
    }
}

pub fn scenario(rng: &mut impl Rng, shape: &Shape) -> Value {
    let accounts: Vec<Value> = (0..shape.accounts)
        .map(|i| json!({"id": account_id(i), "name": format!("acct-{i}")}))
        .collect();
    let groups: Vec<Value> = (0..shape.groups).map(|g| json!({"id": format!("g{g}")})).collect();
    let users: Vec<Value> = (0..shape.users)
        .map(|u| {
            let member: Vec<String> = (0..shape.groups)
                .filter(|_| rng.gen_bool(0.4))
                .map(|g| format!("g{g}"))
                .collect();
            json!({"id": format!("u{u}"), "groups": member})
        })
        .collect();
    let sets: Vec<Value> = (0..shape.sets)
        .map(|s| {
            let policies: Vec<Value> = (0..shape.policies_per_set)
                .map(|p| {
                    let n = rng.gen_range(1..=shape.max_statements);
                    let stmts: Vec<Value> = (0..n)
                        .map(|_| {
                            let e = effect(rng, shape);
                            statement(rng, shape, e, None)
                        })
                        .collect();
                    json!({"name": format!("p{p}"), "document": {"Version": "2012-10-17", "Statement": stmts}})
                })
                .collect();
            json!({"id": format!("ps{s}"), "policies": policies})
        })
        .collect();

    let mut seen = BTreeSet::new();
    let mut assignments = Vec::new();
    for _ in 0..(shape.users + shape.groups) * 2 {
        let account = account_id(rng.gen_range(0..shape.accounts));
        let set = format!("ps{}", rng.gen_range(0..shape.sets));
        let (kind, id) = if shape.groups > 0 && rng.gen_bool(0.3) {
            ("group", format!("g{}", rng.gen_range(0..shape.groups)))
        } else {
            ("user", format!("u{}", rng.gen_range(0..shape.users)))
        };
        if seen.insert((kind, id.clone(), account.clone(), set.clone())) {
            assignments.push(json!({kind: id, "account": account, "permission_set": set}));
        }
    }

    let mut resources = Vec::new();
    let mut shares = Vec::new();
    for b in 0..shape.registered {
        let owner_idx = rng.gen_range(0..shape.accounts);
        let mut r = json!({"arn": bucket(b), "owner_account": account_id(owner_idx)});
        if rng.gen_bool(0.6) {
            let n = rng.gen_range(1..=2);
            let stmts: Vec<Value> = (0..n)
                .map(|_| {
                    let e = effect(rng, shape);
                    let p = principal(rng, shape);
                    statement(rng, shape, e, Some(p))
                })
                .collect();
            r["policy"] = json!({"Version": "2012-10-17", "Statement": stmts});
        }
        resources.push(r);
        if rng.gen_bool(0.4) {
            let with: Vec<String> = (0..shape.accounts)
                .filter(|&a| a != owner_idx && rng.gen_bool(0.5))
                .map(account_id)
                .collect();
            if !with.is_empty() {
                shares.push(json!({"resource": bucket(b), "shared_with": with}));
            }
        }
    }

    json!({
        "organization": {
            "management_account": account_id(0),
            "root": {"name": "Root", "accounts": accounts},
        },
        "users": users,
        "groups": groups,
        "permission_sets": sets,
        "assignments": assignments,
        "resources": resources,
        "shares": shares,
    })
}

/// A random request as JSON (`user`, `account`, `action`, `resource`,
/// `context`).
pub fn request(rng: &mut impl Rng, shape: &Shape) -> Value {
    let mut context = serde_json::Map::new();
    if shape.conditions {
        if rng.gen_bool(0.5) {
            context.insert("env".into(), json!(["prod", "dev", "qa"].choose(rng).unwrap()));
        }
        if rng.gen_bool(0.3) {
            context.insert("team".into(), json!(["red", "blue"].choose(rng).unwrap()));
        }
    }
    json!({
        "user": format!("u{}", rng.gen_range(0..shape.users)),
        "account": account_id(rng.gen_range(0..shape.accounts)),
        "action": shape.actions.choose(rng).unwrap(),
        "resource": bucket(rng.gen_range(0..shape.buckets)),
        "context": context,
    })
}

/// Every (user, account, action, resource) request over `shape`, without
/// context.
pub fn all_requests(shape: &Shape) -> Vec<Value> {
    let mut out = Vec::new();
    for u in 0..shape.users {
        for a in 0..shape.accounts {
            for action in &shape.actions {
                for b in 0..shape.buckets {
                    out.push(json!({
                        "user": format!("u{u}"),
                        "account": account_id(a),
                        "action": action,
                        "resource": bucket(b),
                    }));
                }
            }
        }
    }
    out
}

/// Adds `stmt` to a randomly chosen identity policy, or to a resource policy
/// when `stmt` carries a Principal.
pub fn add_statement(rng: &mut impl Rng, scenario: &Value, stmt: Value) -> Value {
    let mut next = scenario.clone();
    if stmt.get("Principal").is_some() {
        let resources = next["resources"].as_array_mut().unwrap();
        if resources.is_empty() {
            return next;
        }
        let r = resources.choose_mut(rng).unwrap();
        match r.get_mut("policy") {
            Some(p) => p["Statement"].as_array_mut().unwrap().push(stmt),
            None => r["policy"] = json!({"Version": "2012-10-17", "Statement": [stmt]}),
        }
    } else {
        let sets = next["permission_sets"].as_array_mut().unwrap();
        let set = sets.choose_mut(rng).unwrap();
        let policy = set["policies"].as_array_mut().unwrap().choose_mut(rng).unwrap();
        policy["document"]["Statement"].as_array_mut().unwrap().push(stmt);
    }
    next
}

pub fn random_principal(rng: &mut impl Rng, shape: &Shape) -> Value {
    principal(rng, shape)
}
