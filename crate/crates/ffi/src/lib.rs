//! C ABI for the iamsim policy simulator.
//!
//! Every fallible function returns an [`IamsimStatus`]. On failure a message
//! is available from [`iamsim_last_error_message`] on the same thread until
//! the next call into this library. Strings returned through `char **out`
//! parameters are owned by the caller and must be released with
//! [`iamsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use iamsim::eval::{self, AccessRequest, Reason, Verdict};
use iamsim::org::Organization;
use iamsim::policy::{classify_action_level, parse_policy, ActionPattern};
use iamsim::time::Timestamp;

/// Loaded organization. Create with `iamsim_org_from_json` or
/// `iamsim_org_from_file`; release with `iamsim_org_free`.
pub struct IamsimOrg {
    org: Organization,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IamsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Input failed to parse or validate.
    InvalidInput = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IamsimVerdict {
    Allow = 0,
    Deny = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IamsimReason {
    ExplicitDeny = 0,
    ImplicitDeny = 1,
    SameAccountAllow = 2,
    CrossAccountAllow = 3,
}

impl From<Verdict> for IamsimVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Allow => IamsimVerdict::Allow,
            Verdict::Deny => IamsimVerdict::Deny,
        }
    }
}

impl From<Reason> for IamsimReason {
    fn from(r: Reason) -> Self {
        match r {
            Reason::ExplicitDeny => IamsimReason::ExplicitDeny,
            Reason::ImplicitDeny => IamsimReason::ImplicitDeny,
            Reason::SameAccountAllow => IamsimReason::SameAccountAllow,
            Reason::CrossAccountAllow => IamsimReason::CrossAccountAllow,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(IamsimStatus, String);

fn invalid(e: impl ToString) -> Failure {
    Failure(IamsimStatus::InvalidInput, e.to_string())
}

/// Runs `body`, converting failures and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> IamsimStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => IamsimStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_owned());
            IamsimStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(IamsimStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(IamsimStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a writable pointer.
    unsafe { p.as_mut() }
        .ok_or_else(|| Failure(IamsimStatus::NullArgument, format!("`{name}` is null")))
}

fn org_arg<'a>(p: *const IamsimOrg) -> Result<&'a Organization, Failure> {
    // SAFETY: non-null handles come from `iamsim_org_from_*`.
    unsafe { p.as_ref() }
        .map(|h| &h.org)
        .ok_or_else(|| Failure(IamsimStatus::NullArgument, "`org` is null".to_owned()))
}

fn give_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let out = out_arg(out, "out")?;
    let c = CString::new(s).map_err(invalid)?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn iamsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn iamsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a scenario document.
///
/// # Safety
/// `json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_org_from_json(json: *const c_char, out: *mut *mut IamsimOrg) -> IamsimStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        let org = Organization::from_json(text).map_err(invalid)?;
        *out = Box::into_raw(Box::new(IamsimOrg { org }));
        Ok(())
    })
}

/// Reads and validates a scenario file.
///
/// # Safety
/// `path` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_org_from_file(path: *const c_char, out: *mut *mut IamsimOrg) -> IamsimStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure(IamsimStatus::Io, format!("{path}: {e}")))?;
        let org = Organization::from_json(&text).map_err(|e| invalid(format!("{path}: {e}")))?;
        *out = Box::into_raw(Box::new(IamsimOrg { org }));
        Ok(())
    })
}

/// Releases an organization handle. Null is ignored.
///
/// # Safety
/// `org` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn iamsim_org_free(org: *mut IamsimOrg) {
    if !org.is_null() {
        drop(Box::from_raw(org));
    }
}

/// Decides one request given as a JSON object with `user`, `account`,
/// `action`, `resource` and optional `context`.
///
/// # Safety
/// `org` must be a live handle, `request_json` a valid C string, and
/// `verdict` and `reason` writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_authorize(
    org: *const IamsimOrg,
    request_json: *const c_char,
    verdict: *mut IamsimVerdict,
    reason: *mut IamsimReason,
) -> IamsimStatus {
    guard(|| {
        let org = org_arg(org)?;
        let request = AccessRequest::from_json(str_arg(request_json, "request_json")?).map_err(invalid)?;
        let verdict = out_arg(verdict, "verdict")?;
        let reason = out_arg(reason, "reason")?;
        let decision = eval::authorize(org, &request).map_err(invalid)?;
        *verdict = decision.verdict.into();
        *reason = decision.reason.into();
        Ok(())
    })
}

/// Decides one request and returns its rendered trace.
///
/// # Safety
/// `org` must be a live handle, `request_json` a valid C string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_explain(
    org: *const IamsimOrg,
    request_json: *const c_char,
    out: *mut *mut c_char,
) -> IamsimStatus {
    guard(|| {
        let org = org_arg(org)?;
        let request = AccessRequest::from_json(str_arg(request_json, "request_json")?).map_err(invalid)?;
        let text = eval::explain(org, &request).map_err(invalid)?;
        give_string(text, out)
    })
}

/// Decides a JSON Lines batch and returns one `{"verdict","reason"}` line
/// per request, in input order.
///
/// # Safety
/// `org` must be a live handle, `requests_jsonl` a valid C string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_simulate(
    org: *const IamsimOrg,
    requests_jsonl: *const c_char,
    out: *mut *mut c_char,
) -> IamsimStatus {
    guard(|| {
        let org = org_arg(org)?;
        let text = str_arg(requests_jsonl, "requests_jsonl")?;
        let requests = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| AccessRequest::from_json(l).map_err(|e| invalid(format!("line {}: {e}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let start: Timestamp = "2024-01-01T00:00:00Z".parse().expect("constant");
        let decisions = eval::simulate(org, &requests, None, start).map_err(invalid)?;
        let mut lines = String::new();
        for d in decisions {
            lines.push_str(&serde_json::json!({ "verdict": d.verdict, "reason": d.reason }).to_string());
            lines.push('\n');
        }
        give_string(lines, out)
    })
}

/// Parses a policy document and returns its canonical compact form.
///
/// # Safety
/// `policy_json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_policy_normalize(policy_json: *const c_char, out: *mut *mut c_char) -> IamsimStatus {
    guard(|| {
        let doc = parse_policy(str_arg(policy_json, "policy_json")?).map_err(invalid)?;
        give_string(doc.to_json(), out)
    })
}

/// Classifies an action pattern into level 1 to 4.
///
/// # Safety
/// `pattern` must be a valid C string and `level` writable.
#[no_mangle]
pub unsafe extern "C" fn iamsim_action_level(pattern: *const c_char, level: *mut u8) -> IamsimStatus {
    guard(|| {
        let pattern: ActionPattern = str_arg(pattern, "pattern")?.parse().map_err(invalid)?;
        *out_arg(level, "level")? = classify_action_level(&pattern).as_u8();
        Ok(())
    })
}
