//! C ABI for the assignment toolkit.
//!
//! Conventions: profiles are opaque handles created from JSON documents;
//! everything else crosses the boundary as JSON strings allocated by this
//! library and released with [`randassign_string_free`]. Every function
//! returns a [`RandassignStatus`]; on error a thread-local message is
//! available through [`randassign_last_error`].
//!
//! Status values mirror the CLI exit codes: 0 success / property holds,
//! 1 property fails or decomposition infeasible, 2 invalid input,
//! 3 enumeration budget exceeded, 4 null pointer or encoding misuse.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use serde::Deserialize;

use randassign::documents;
use randassign::mechanisms::{eating, lottery};
use randassign::model::{Budget, PriorityOrder, Profile};
use randassign::properties::{self, BaseProperty};
use randassign::{fixtures, oracles, Error};

/// Result of every FFI call.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum RandassignStatus {
    Ok = 0,
    Fail = 1,
    InvalidInput = 2,
    BudgetExceeded = 3,
    Misuse = 4,
}

/// Opaque handle to a validated preference profile.
pub struct RandassignProfile {
    inner: Profile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("no interior nul");
    });
}

fn status_of(e: &Error) -> RandassignStatus {
    match e {
        Error::BudgetExceeded { .. } => RandassignStatus::BudgetExceeded,
        _ => RandassignStatus::InvalidInput,
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated UTF-8 string or the call fails.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, RandassignStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(RandassignStatus::Misuse);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        RandassignStatus::Misuse
    })
}

fn write_string(out: *mut *mut c_char, value: String) -> RandassignStatus {
    if out.is_null() {
        set_error("null output pointer");
        return RandassignStatus::Misuse;
    }
    match CString::new(value) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            RandassignStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL byte");
            RandassignStatus::Misuse
        }
    }
}

/// Last error message for this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn randassign_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must have been returned by a `randassign_*` function and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn randassign_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a profile document (JSON) into an opaque handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn randassign_profile_parse(
    json: *const c_char,
    out: *mut *mut RandassignProfile,
) -> RandassignStatus {
    let json = match read_str(json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    if out.is_null() {
        set_error("null output pointer");
        return RandassignStatus::Misuse;
    }
    match documents::parse_profile(json) {
        Ok(profile) => {
            *out = Box::into_raw(Box::new(RandassignProfile { inner: profile }));
            RandassignStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Number of agents (= items) in the profile; 0 for a null handle.
///
/// # Safety
/// `profile` must be a live handle from [`randassign_profile_parse`].
#[no_mangle]
pub unsafe extern "C" fn randassign_profile_size(profile: *const RandassignProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.inner.n())
}

/// Release a profile handle.
///
/// # Safety
/// `profile` must come from [`randassign_profile_parse`] and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn randassign_profile_free(profile: *mut RandassignProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Options accepted by [`randassign_run`], as a JSON object. All fields
/// are optional; pass NULL or `{}` for defaults.
#[derive(Default, Deserialize)]
struct RunOptions {
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    priority: Option<Vec<String>>,
    #[serde(default)]
    speeds: Option<serde_json::Value>,
    #[serde(default)]
    budget_worlds: Option<u64>,
    #[serde(default)]
    budget_enum: Option<usize>,
}

impl RunOptions {
    fn budget(&self) -> Budget {
        let defaults = Budget::default();
        Budget {
            max_worlds: self.budget_worlds.unwrap_or(defaults.max_worlds),
            max_enum_agents: self.budget_enum.unwrap_or(defaults.max_enum_agents),
        }
    }

    fn expectation(&self) -> bool {
        self.mode.as_deref() == Some("expectation")
    }

    fn priority_order(&self, profile: &Profile) -> randassign::Result<PriorityOrder> {
        let ids = self.priority.as_ref().ok_or_else(|| {
            Error::InvalidPriority("this mechanism needs a `priority` option".into())
        })?;
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        PriorityOrder::from_ids(profile, &refs)
    }
}

fn run_mechanism(
    profile: &Profile,
    mechanism: &str,
    options: &RunOptions,
) -> randassign::Result<String> {
    let budget = options.budget();
    let matrix = match (mechanism, options.expectation()) {
        ("ebm", false) => lottery::ebm_sample(profile, options.seed.unwrap_or(0)).0.matrix(),
        ("ebm", true) => lottery::ebm_expectation(profile, &budget)?.matrix,
        ("abm", false) => lottery::abm_run(profile, &options.priority_order(profile)?).matrix(),
        ("abm", true) => lottery::abm_uniform_expectation(profile, &budget)?,
        ("bm", false) => lottery::bm_run(profile, &options.priority_order(profile)?).matrix(),
        ("bm", true) => lottery::bm_uniform_expectation(profile, &budget)?,
        ("rp", false) => lottery::rp_run(profile, &options.priority_order(profile)?).matrix(),
        ("rp", true) => lottery::rp_expectation(profile, &budget)?,
        ("ps", _) => eating::ps_run(profile),
        ("upre", _) => eating::upre_run(profile),
        ("pre", _) => {
            let doc = options.speeds.clone().ok_or_else(|| {
                Error::InvalidSpeeds("the pre mechanism needs a `speeds` option".into())
            })?;
            let text = doc.to_string();
            let speeds = documents::parse_speeds(&text, profile)?;
            eating::pre_run(profile, &speeds)?.0
        }
        (other, _) => {
            return Err(Error::InvalidDocument(format!(
                "unknown mechanism `{other}`"
            )))
        }
    };
    documents::assignment_to_json(profile, &matrix, None)
}

/// Run a mechanism; `options_json` may be NULL. The assignment document is
/// returned through `out_json`.
///
/// # Safety
/// Pointer arguments must satisfy the usual contracts described above.
#[no_mangle]
pub unsafe extern "C" fn randassign_run(
    profile: *const RandassignProfile,
    mechanism: *const c_char,
    options_json: *const c_char,
    out_json: *mut *mut c_char,
) -> RandassignStatus {
    let Some(profile) = profile.as_ref() else {
        set_error("null profile handle");
        return RandassignStatus::Misuse;
    };
    let mechanism = match read_str(mechanism) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let options: RunOptions = if options_json.is_null() {
        RunOptions::default()
    } else {
        let text = match read_str(options_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match serde_json::from_str(text) {
            Ok(o) => o,
            Err(e) => {
                set_error(&format!("invalid options: {e}"));
                return RandassignStatus::InvalidInput;
            }
        }
    };
    match run_mechanism(&profile.inner, mechanism, &options) {
        Ok(doc) => write_string(out_json, doc),
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

fn base_property(name: &str) -> Option<BaseProperty> {
    Some(match name {
        "pe" => BaseProperty::Pe,
        "fcm" => BaseProperty::Fcm,
        "fhr" => BaseProperty::Fhr,
        "feri" => BaseProperty::Feri,
        "rm" => BaseProperty::Rm,
        "pop" => BaseProperty::Pop,
        _ => return None,
    })
}

fn check_property(
    profile: &Profile,
    property: &str,
    assignment_json: &str,
) -> randassign::Result<(bool, String)> {
    let m = documents::parse_assignment(assignment_json, profile)?;
    let budget = Budget::default();
    let deterministic = || {
        m.as_deterministic().ok_or_else(|| {
            Error::InvalidDocument(
                "this property applies to deterministic assignments; the matrix has fractional entries"
                    .into(),
            )
        })
    };
    let verdict = match property {
        "pe" => properties::is_pe(profile, &deterministic()?),
        "fcm" => properties::is_fcm(profile, &deterministic()?),
        "fhr" => properties::is_fhr(profile, &deterministic()?),
        "feri" => properties::is_feri(profile, &deterministic()?).0,
        "rm" => properties::is_rm(profile, &deterministic()?, &budget)?,
        "pop" => properties::is_pop(profile, &deterministic()?, &budget)?,
        "sd-pe" => properties::is_sd_pe(profile, &m),
        "ea-feri" => properties::is_ea_feri(profile, &m),
        "ea-fhr" => properties::is_ea_fhr(profile, &m),
        "sete" => properties::is_sete(profile, &m),
        "sd-ef" => properties::is_sd_ef(profile, &m),
        "sd-wef" => properties::is_sd_wef(profile, &m),
        other => match other.strip_prefix("ep-").and_then(base_property) {
            Some(base) => {
                let v = properties::is_ep(profile, &m, base, &budget)?;
                properties::Verdict {
                    holds: v.holds,
                    witness: v.witness,
                }
            }
            None => {
                return Err(Error::InvalidDocument(format!(
                    "unknown property `{other}`"
                )))
            }
        },
    };
    let mut out = serde_json::json!({ "property": property, "holds": verdict.holds });
    if let Some(w) = &verdict.witness {
        out["witness"] = documents::witness_to_json(profile, w);
    }
    Ok((verdict.holds, out.to_string()))
}

/// Check a property of an assignment document. Returns `Ok` when it holds
/// and `Fail` when it does not; `out_json` carries the verdict and witness
/// either way.
///
/// # Safety
/// Pointer arguments must satisfy the usual contracts described above.
#[no_mangle]
pub unsafe extern "C" fn randassign_check(
    profile: *const RandassignProfile,
    property: *const c_char,
    assignment_json: *const c_char,
    out_json: *mut *mut c_char,
) -> RandassignStatus {
    let Some(profile) = profile.as_ref() else {
        set_error("null profile handle");
        return RandassignStatus::Misuse;
    };
    let (property, assignment) = match (read_str(property), read_str(assignment_json)) {
        (Ok(p), Ok(a)) => (p, a),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match check_property(&profile.inner, property, assignment) {
        Ok((holds, doc)) => {
            let status = write_string(out_json, doc);
            if status != RandassignStatus::Ok {
                return status;
            }
            if holds {
                RandassignStatus::Ok
            } else {
                RandassignStatus::Fail
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Decompose an assignment into deterministic assignments; when
/// `base_property` is non-NULL the components are restricted to that
/// property and infeasibility returns `Fail`.
///
/// # Safety
/// Pointer arguments must satisfy the usual contracts described above.
#[no_mangle]
pub unsafe extern "C" fn randassign_decompose(
    profile: *const RandassignProfile,
    assignment_json: *const c_char,
    base_property: *const c_char,
    out_json: *mut *mut c_char,
) -> RandassignStatus {
    let Some(profile) = profile.as_ref() else {
        set_error("null profile handle");
        return RandassignStatus::Misuse;
    };
    let assignment = match read_str(assignment_json) {
        Ok(a) => a,
        Err(s) => return s,
    };
    let inner = &profile.inner;
    let m = match documents::parse_assignment(assignment, inner) {
        Ok(m) => m,
        Err(e) => {
            set_error(&e.to_string());
            return status_of(&e);
        }
    };
    let decomposition = if base_property.is_null() {
        Some(randassign::bvn::bvn_decompose(&m))
    } else {
        let name = match read_str(base_property) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let Some(base) = base_property_checked(name) else {
            set_error(&format!("unknown base property `{name}`"));
            return RandassignStatus::InvalidInput;
        };
        match oracles::enumerate_satisfying(inner, base, &Budget::default()) {
            Ok(generators) => oracles::exact_feasibility(&m, &generators),
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        }
    };
    match decomposition {
        Some(d) => match documents::decomposition_to_json(inner, &d) {
            Ok(doc) => write_string(out_json, doc),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        },
        None => {
            set_error("the assignment is not a convex combination of the requested components");
            RandassignStatus::Fail
        }
    }
}

fn base_property_checked(name: &str) -> Option<BaseProperty> {
    base_property(name)
}

/// Replay a fixture audit; the report (one line per checked rational) is
/// returned as JSON. Diverged audits return `Fail`.
///
/// # Safety
/// Pointer arguments must satisfy the usual contracts described above.
#[no_mangle]
pub unsafe extern "C" fn randassign_audit(
    fixture: *const c_char,
    out_json: *mut *mut c_char,
) -> RandassignStatus {
    let name = match read_str(fixture) {
        Ok(s) => s,
        Err(s) => return s,
    };
    match fixtures::audit_fixture(name) {
        Ok(report) => {
            let passed = report.passed();
            let doc = serde_json::to_string(&report).expect("serializable");
            let status = write_string(out_json, doc);
            if status != RandassignStatus::Ok {
                return status;
            }
            if passed {
                RandassignStatus::Ok
            } else {
                RandassignStatus::Fail
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstring(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn parse_fixture_profile() -> *mut RandassignProfile {
        let json = documents::profile_to_json(&fixtures::fig1_profile()).unwrap();
        let cjson = cstring(&json);
        let mut handle: *mut RandassignProfile = std::ptr::null_mut();
        let status = unsafe { randassign_profile_parse(cjson.as_ptr(), &mut handle) };
        assert_eq!(status, RandassignStatus::Ok);
        handle
    }

    fn take_string(ptr: *mut c_char) -> String {
        assert!(!ptr.is_null());
        let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
        unsafe { randassign_string_free(ptr) };
        s
    }

    #[test]
    fn profile_round_trip_and_size() {
        let handle = parse_fixture_profile();
        assert_eq!(unsafe { randassign_profile_size(handle) }, 6);
        unsafe { randassign_profile_free(handle) };
    }

    #[test]
    fn run_upre_through_the_abi() {
        let handle = parse_fixture_profile();
        let mech = cstring("upre");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status =
            unsafe { randassign_run(handle, mech.as_ptr(), std::ptr::null(), &mut out) };
        assert_eq!(status, RandassignStatus::Ok);
        let doc = take_string(out);
        let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(parsed["matrix"][5 * 6 + 3], "3/4");
        unsafe { randassign_profile_free(handle) };
    }

    #[test]
    fn check_and_fail_statuses() {
        let handle = parse_fixture_profile();
        let fig1 = fixtures::fig1_profile();
        let table = documents::assignment_to_json(&fig1, &fixtures::fig1_fhr_sete_assignment(), None)
            .unwrap();
        let table = cstring(&table);

        let sete = cstring("sete");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status =
            unsafe { randassign_check(handle, sete.as_ptr(), table.as_ptr(), &mut out) };
        assert_eq!(status, RandassignStatus::Ok);
        take_string(out);

        let wef = cstring("sd-wef");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { randassign_check(handle, wef.as_ptr(), table.as_ptr(), &mut out) };
        assert_eq!(status, RandassignStatus::Fail);
        let doc = take_string(out);
        assert!(doc.contains("\"dominated\""));
        unsafe { randassign_profile_free(handle) };
    }

    #[test]
    fn error_statuses_and_messages() {
        let mut handle: *mut RandassignProfile = std::ptr::null_mut();
        let bad = cstring("{ not json");
        let status = unsafe { randassign_profile_parse(bad.as_ptr(), &mut handle) };
        assert_eq!(status, RandassignStatus::InvalidInput);
        let msg = unsafe { CStr::from_ptr(randassign_last_error()) };
        assert!(!msg.to_bytes().is_empty());

        let status = unsafe { randassign_profile_parse(std::ptr::null(), &mut handle) };
        assert_eq!(status, RandassignStatus::Misuse);
    }

    #[test]
    fn audit_through_the_abi() {
        let name = cstring("app_b4");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { randassign_audit(name.as_ptr(), &mut out) };
        assert_eq!(status, RandassignStatus::Ok);
        let doc = take_string(out);
        assert!(doc.contains("1/6"));
        assert!(doc.contains("3/20"));

        let unknown = cstring("nope");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { randassign_audit(unknown.as_ptr(), &mut out) };
        assert_eq!(status, RandassignStatus::InvalidInput);
    }

    #[test]
    fn decompose_with_filter_statuses() {
        let handle = parse_fixture_profile();
        let fig1 = fixtures::fig1_profile();
        let upre = documents::assignment_to_json(&fig1, &fixtures::fig1_upre_assignment(), None)
            .unwrap();
        let upre = cstring(&upre);

        // Plain decomposition succeeds.
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe {
            randassign_decompose(handle, upre.as_ptr(), std::ptr::null(), &mut out)
        };
        assert_eq!(status, RandassignStatus::Ok);
        take_string(out);

        // Restricted to rank-respecting components it is infeasible.
        let fhr = cstring("fhr");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status =
            unsafe { randassign_decompose(handle, upre.as_ptr(), fhr.as_ptr(), &mut out) };
        assert_eq!(status, RandassignStatus::Fail);
        unsafe { randassign_profile_free(handle) };
    }
}
