use super::*;
use crate::audit::AuditEvent;
use crate::eval::Verdict;
use crate::org::{build_org, Assignment, Organization, OrgUnit, PermissionSet, Resource, Scenario, SsoUser, Subject};
use crate::policy::{parse_named_policy, parse_policy, ActionLevel, VerbTable};

const ACCT: &str = "111111111111";
const X: &str = "arn:aws:s3:::bucket-x";
const Y: &str = "arn:aws:s3:::bucket-y";

fn ts(s: &str) -> Timestamp {
    s.parse().unwrap()
}

fn org() -> Organization {
    let mut s = Scenario::minimal("000000000000");
    s.root = OrgUnit::new("Root")
        .with_account("000000000000", "management")
        .with_account(ACCT, "work");
    s.users = vec![SsoUser { id: "u".into(), display_name: String::new(), groups: vec![] }];
    let storage = parse_named_policy(
        "storage",
        r#"{"Version":"2012-10-17","Statement":[
            {"Effect":"Allow","Action":"s3:*","Resource":"*"},
            {"Effect":"Allow","Action":"s3:Get*","Resource":"*"},
            {"Effect":"Deny","Action":"s3:DeleteBucket","Resource":"*"}]}"#,
    )
    .unwrap();
    let compute = parse_named_policy(
        "compute",
        r#"{"Version":"2012-10-17","Statement":[{"Effect":"Allow","Action":"ec2:*","Resource":"*"}]}"#,
    )
    .unwrap();
    s.permission_sets = vec![
        PermissionSet { id: "ps".into(), policies: vec![storage, compute] },
        PermissionSet { id: "spare".into(), policies: vec![] },
    ];
    s.assignments = vec![Assignment {
        subject: Subject::User("u".into()),
        account: ACCT.into(),
        permission_set: "ps".into(),
    }];
    s.resources = [X, Y]
        .into_iter()
        .map(|arn| Resource { arn: arn.into(), owner_account: ACCT.into(), policy: None })
        .collect();
    build_org(s).unwrap()
}

fn call(time: &str, action: &str, resource: &str, verdict: Verdict) -> AuditEvent {
    AuditEvent::api_call(ts(time), "u", ACCT, action.parse().unwrap(), resource, verdict)
}

fn key(policy: &str, statement: usize) -> StatementKey {
    StatementKey { permission_set: "ps".into(), policy: policy.into(), statement }
}

fn principal() -> Principal {
    Principal::new("u", ACCT)
}

fn window() -> Window {
    "2024-01-01T00:00:00Z..2024-12-31T00:00:00Z".parse().unwrap()
}

fn generate(events: &[AuditEvent], level: ActionLevel) -> Result<GeneratedPolicy, LpError> {
    let org = org();
    let index = build_usage_index(&org, events).unwrap();
    generate_least_privilege(&org, &index, &VerbTable::default(), &principal(), level, window(), 7)
}

#[test]
fn empty_stream_gives_empty_index() {
    let index = build_usage_index(&org(), []).unwrap();
    assert!(index.is_empty());
}

#[test]
fn single_allow_credits_every_matching_statement() {
    let events = [call("2024-03-01T00:00:00Z", "s3:GetObject", X, Verdict::Allow)];
    let index = build_usage_index(&org(), &events).unwrap();
    let t = ts("2024-03-01T00:00:00Z");
    assert_eq!(index.last_used(&key("storage", 0)), Some(t));
    assert_eq!(index.last_used(&key("storage", 1)), Some(t));
    assert_eq!(index.last_used(&key("compute", 0)), None);
    assert_eq!(index.observations(&principal()).count(), 1);
}

#[test]
fn last_used_is_latest() {
    let events = [
        call("2024-03-01T00:00:00Z", "s3:PutObject", X, Verdict::Allow),
        call("2024-03-05T00:00:00Z", "s3:PutObject", Y, Verdict::Allow),
    ];
    let index = build_usage_index(&org(), &events).unwrap();
    assert_eq!(index.last_used(&key("storage", 0)), Some(ts("2024-03-05T00:00:00Z")));
}

#[test]
fn denied_calls_are_seen_but_not_credited() {
    let events = [call("2024-03-01T00:00:00Z", "s3:DeleteBucket", X, Verdict::Deny)];
    let index = build_usage_index(&org(), &events).unwrap();
    assert_eq!(index.last_used_entries().count(), 0);
    assert_eq!(index.observations(&principal()).count(), 0);
    assert!(index.actions_seen().contains(&"s3:DeleteBucket".parse().unwrap()));
}

#[test]
fn out_of_order_and_unknown_principals_fail() {
    let events = [
        call("2024-03-02T00:00:00Z", "s3:GetObject", X, Verdict::Allow),
        call("2024-03-01T00:00:00Z", "s3:GetObject", X, Verdict::Allow),
    ];
    assert!(matches!(build_usage_index(&org(), &events), Err(LpError::OutOfOrder { index: 1, .. })));
    let mut stranger = call("2024-03-01T00:00:00Z", "s3:GetObject", X, Verdict::Allow);
    stranger.user = "nobody".into();
    assert!(matches!(build_usage_index(&org(), [&stranger]), Err(LpError::Event { index: 0, .. })));
}

#[test]
fn unused_report_threshold_and_order() {
    let events = [
        call("2024-01-10T00:00:00Z", "ec2:RunInstances", X, Verdict::Allow),
        call("2024-06-30T00:00:00Z", "s3:PutObject", X, Verdict::Allow),
    ];
    let org = org();
    let index = build_usage_index(&org, &events).unwrap();
    let report = unused_report(&index, &org, ts("2024-07-01T00:00:00Z"), 90);
    let listed: Vec<_> = report
        .entries
        .iter()
        .map(|e| (e.policy.as_str(), e.statement, e.last_used))
        .collect();
    // storage#0 was used yesterday; the Deny statement is never listed.
    assert_eq!(
        listed,
        [("storage", 1, None), ("compute", 0, Some(ts("2024-01-10T00:00:00Z")))]
    );
    assert_eq!(report.to_text(), unused_report(&index, &org, ts("2024-07-01T00:00:00Z"), 90).to_text());
    assert!(report.to_text().contains("never"));
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["entries"][0]["last_used"], serde_json::Value::Null);
}

#[test]
fn level_four_groups_by_action() {
    let events = [
        call("2024-03-01T00:00:00Z", "s3:GetObject", X, Verdict::Allow),
        call("2024-03-02T00:00:00Z", "s3:PutObject", X, Verdict::Allow),
    ];
    let g = generate(&events, ActionLevel::Exact).unwrap();
    let expected = parse_policy(
        r#"{"Version":"2012-10-17","Statement":[
            {"Effect":"Allow","Action":"s3:GetObject","Resource":"arn:aws:s3:::bucket-x"},
            {"Effect":"Allow","Action":"s3:PutObject","Resource":"arn:aws:s3:::bucket-x"}]}"#,
    )
    .unwrap();
    assert_eq!(g.document.statements(), expected.statements());
    assert_eq!(g.verification.coverage, 1.0);
    assert_eq!(g.verification.excess, 0.0);
    assert!(g.verified);
}

#[test]
fn level_two_collapses_to_service() {
    let events = [
        call("2024-03-01T00:00:00Z", "s3:GetObject", X, Verdict::Allow),
        call("2024-03-02T00:00:00Z", "s3:PutObject", X, Verdict::Allow),
    ];
    let g = generate(&events, ActionLevel::Service).unwrap();
    assert_eq!(
        g.document.to_json(),
        r#"{"Version":"2012-10-17","Statement":[{"Effect":"Allow","Action":"s3:*","Resource":"*"}]}"#
    );
    assert_eq!(g.verification.coverage, 1.0);
    // Only GetObject and PutObject were seen, both observed on X; Y is new.
    assert_eq!(g.verification.universe, 2);
    assert_eq!(g.verification.excess, 1.0);
}

#[test]
fn singleton_and_errors() {
    let events = [call("2024-03-01T00:00:00Z", "s3:GetObject", Y, Verdict::Allow)];
    let g = generate(&events, ActionLevel::Exact).unwrap();
    assert_eq!(g.document.statements().len(), 1);
    assert_eq!(g.document.statements()[0].actions().len(), 1);
    assert_eq!(g.document.statements()[0].resources().len(), 1);
    assert!(matches!(generate(&events, ActionLevel::All), Err(LpError::Level(1))));
    assert!(matches!(generate(&[], ActionLevel::Exact), Err(LpError::NoObservations { .. })));
    let outside = [call("2023-03-01T00:00:00Z", "s3:GetObject", Y, Verdict::Allow)];
    assert!(matches!(generate(&outside, ActionLevel::Exact), Err(LpError::NoObservations { .. })));
}

#[test]
fn level_three_counts_fallbacks() {
    let events = [
        call("2024-03-01T00:00:00Z", "s3:GetObject", X, Verdict::Allow),
        call("2024-03-02T00:00:00Z", "s3:RestoreObject", X, Verdict::Allow),
    ];
    let g = generate(&events, ActionLevel::Verb).unwrap();
    let actions: Vec<_> = g
        .document
        .statements()
        .iter()
        .map(|s| s.actions()[0].to_string())
        .collect();
    assert_eq!(actions, ["s3:Get*", "s3:RestoreObject"]);
    assert_eq!(g.fallbacks, 1);
}

#[test]
fn principal_and_window_parsing() {
    assert_eq!("u@1".parse::<Principal>().unwrap(), Principal::new("u", "1"));
    assert!("u@".parse::<Principal>().is_err());
    assert!("2024-02-01T00:00:00Z..2024-01-01T00:00:00Z".parse::<Window>().is_err());
    assert!("2024-01-01T00:00:00Z".parse::<Window>().is_err());
    assert_eq!(window().to_string(), "2024-01-01T00:00:00Z..2024-12-31T00:00:00Z");
}
