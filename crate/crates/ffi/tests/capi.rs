use std::ffi::{CStr, CString};
use std::ptr;

use iamsim_ffi::*;

const FIGURE: &str = include_str!("../../../scenarios/shared-bucket.json");
const FIGURE_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/shared-bucket.json");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = iamsim_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn take(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { iamsim_string_free(p) };
    s
}

fn load() -> *mut IamsimOrg {
    let mut org = ptr::null_mut();
    let status = unsafe { iamsim_org_from_json(c(FIGURE).as_ptr(), &mut org) };
    assert_eq!(status, IamsimStatus::Ok);
    assert!(!org.is_null());
    org
}

fn request(user: &str, account: &str) -> CString {
    c(&format!(
        r#"{{"user":"{user}","account":"{account}","action":"s3:ListBucket","resource":"arn:aws:s3:::bucket-s"}}"#
    ))
}

#[test]
fn figure_decisions_through_handle() {
    let org = load();
    let cases = [
        ("user1", "111111111111", IamsimVerdict::Allow, IamsimReason::SameAccountAllow),
        ("user2", "222222222222", IamsimVerdict::Deny, IamsimReason::ImplicitDeny),
        ("user3", "333333333333", IamsimVerdict::Allow, IamsimReason::CrossAccountAllow),
    ];
    for (user, account, verdict, reason) in cases {
        let mut v = IamsimVerdict::Deny;
        let mut r = IamsimReason::ExplicitDeny;
        let status = unsafe { iamsim_authorize(org, request(user, account).as_ptr(), &mut v, &mut r) };
        assert_eq!(status, IamsimStatus::Ok);
        assert_eq!((v, r), (verdict, reason), "{user}");
        assert_eq!(last_error(), None);
    }
    unsafe { iamsim_org_free(org) };
}

#[test]
fn load_from_file_and_missing_file() {
    let mut org = ptr::null_mut();
    assert_eq!(unsafe { iamsim_org_from_file(c(FIGURE_PATH).as_ptr(), &mut org) }, IamsimStatus::Ok);
    unsafe { iamsim_org_free(org) };

    let mut org = ptr::null_mut();
    let status = unsafe { iamsim_org_from_file(c("/no/such/scenario.json").as_ptr(), &mut org) };
    assert_eq!(status, IamsimStatus::Io);
    assert!(org.is_null());
    assert!(last_error().unwrap().contains("/no/such/scenario.json"));
}

#[test]
fn invalid_inputs_set_last_error() {
    let mut org = ptr::null_mut();
    let status = unsafe { iamsim_org_from_json(c("{}").as_ptr(), &mut org) };
    assert_eq!(status, IamsimStatus::InvalidInput);
    assert!(last_error().is_some());

    let org = load();
    let (mut v, mut r) = (IamsimVerdict::Allow, IamsimReason::ExplicitDeny);
    let status = unsafe { iamsim_authorize(org, request("ghost", "111111111111").as_ptr(), &mut v, &mut r) };
    assert_eq!(status, IamsimStatus::InvalidInput);
    assert!(last_error().unwrap().contains("ghost"));

    let status = unsafe { iamsim_authorize(org, ptr::null(), &mut v, &mut r) };
    assert_eq!(status, IamsimStatus::NullArgument);
    let status = unsafe { iamsim_authorize(ptr::null(), request("user1", "111111111111").as_ptr(), &mut v, &mut r) };
    assert_eq!(status, IamsimStatus::NullArgument);
    unsafe { iamsim_org_free(org) };
}

#[test]
fn explain_and_simulate_return_owned_strings() {
    let org = load();
    let mut out = ptr::null_mut();
    let status = unsafe { iamsim_explain(org, request("user2", "222222222222").as_ptr(), &mut out) };
    assert_eq!(status, IamsimStatus::Ok);
    let text = take(out);
    assert!(text.contains("not satisfied"), "{text}");
    assert!(text.ends_with("verdict: Deny (ImplicitDeny)\n"));

    let batch = [("user1", "111111111111"), ("user2", "222222222222"), ("user3", "333333333333")]
        .map(|(u, a)| request(u, a).into_string().unwrap())
        .join("\n");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { iamsim_simulate(org, c(&batch).as_ptr(), &mut out) }, IamsimStatus::Ok);
    let lines = take(out);
    let verdicts: Vec<&str> = lines
        .lines()
        .map(|l| if l.contains("\"Allow\"") { "Allow" } else { "Deny" })
        .collect();
    assert_eq!(verdicts, ["Allow", "Deny", "Allow"]);

    let mut out = ptr::null_mut();
    let bad = format!("{batch}\nnot json");
    assert_eq!(unsafe { iamsim_simulate(org, c(&bad).as_ptr(), &mut out) }, IamsimStatus::InvalidInput);
    assert!(out.is_null());
    assert!(last_error().unwrap().starts_with("line 4"));
    unsafe { iamsim_org_free(org) };
}

#[test]
fn policy_normalize_and_levels() {
    let listing = r#"{ "Version": "2012-10-17", "Statement": [ { "Effect": "Allow",
        "Action": ["dynamodb:*"], "Resource": "arn:aws:dynamodb:ap-northeast-2:123456789012:table/Books" } ] }"#;
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { iamsim_policy_normalize(c(listing).as_ptr(), &mut out) }, IamsimStatus::Ok);
    assert_eq!(
        take(out),
        r#"{"Version":"2012-10-17","Statement":[{"Effect":"Allow","Action":"dynamodb:*","Resource":"arn:aws:dynamodb:ap-northeast-2:123456789012:table/Books"}]}"#
    );

    for (pattern, expected) in [("*:*", 1), ("s3:*", 2), ("s3:Get*", 3), ("s3:PutObject", 4)] {
        let mut level = 0u8;
        assert_eq!(unsafe { iamsim_action_level(c(pattern).as_ptr(), &mut level) }, IamsimStatus::Ok);
        assert_eq!(level, expected, "{pattern}");
    }
    let mut level = 0u8;
    assert_eq!(unsafe { iamsim_action_level(c("s3").as_ptr(), &mut level) }, IamsimStatus::InvalidInput);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        iamsim_string_free(ptr::null_mut());
        iamsim_org_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/iamsim.h");
    for name in [
        "iamsim_org_from_json",
        "iamsim_org_from_file",
        "iamsim_org_free",
        "iamsim_authorize",
        "iamsim_explain",
        "iamsim_simulate",
        "iamsim_policy_normalize",
        "iamsim_action_level",
        "iamsim_string_free",
        "iamsim_last_error_message",
        "typedef struct IamsimOrg IamsimOrg;",
        "IAMSIM_STATUS_INVALID_INPUT = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
