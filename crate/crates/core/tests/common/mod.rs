#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::collections::BTreeMap;

use iamsim::eval::{AccessRequest, Decision};
use iamsim::org::Organization;
use serde_json::Value;

pub use oracle::{OracleDecision, OracleOrg};

pub fn load(scenario: &Value) -> Organization {
    Organization::from_json(&scenario.to_string()).expect("generated scenario is valid")
}

pub fn to_request(v: &Value) -> AccessRequest {
    serde_json::from_value(v.clone()).expect("generated request is valid")
}

pub fn context_of(v: &Value) -> BTreeMap<String, String> {
    v.get("context")
        .and_then(Value::as_object)
        .map(|m| m.iter().map(|(k, v)| (k.clone(), v.as_str().unwrap().to_owned())).collect())
        .unwrap_or_default()
}

/// Library and oracle agree on `request`; returns the oracle decision or a
/// description of the disagreement.
pub fn compare(org: &Organization, oracle: &OracleOrg, request: &Value) -> Result<OracleDecision, String> {
    let req = to_request(request);
    let ctx = context_of(request);
    let expected = oracle.authorize(&oracle::OracleRequest {
        user: &req.user,
        account: &req.account,
        action: &req.action.to_string(),
        resource: &req.resource,
        context: &ctx,
    });
    let got: Decision = iamsim::eval::authorize(org, &req).map_err(|e| e.to_string())?;
    if got.reason.to_string() == expected.name() {
        Ok(expected)
    } else {
        Err(format!("request {request}: library {} vs oracle {}", got.reason, expected.name()))
    }
}
