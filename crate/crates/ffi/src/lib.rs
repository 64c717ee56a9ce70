//! C ABI for `netdes`.
//!
//! Models cross the boundary as JSON documents in the same format the `netdes`
//! command line tool reads. Objects are opaque handles owned by the caller
//! and released with the matching `*_free` function. Every function returns a
//! [`NetdesStatus`]; on failure a message is available from
//! [`netdes_last_error`] on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netdes::automaton::{Automaton, EventId, ModelError, NetworkedSupervisor, StateId};
use netdes::channels::DelayBounds;
use netdes::comm::DEFAULT_BUDGET;
use netdes::estimator::{EstimatorError, EstimatorSession};
use netdes::format::{automaton_from_json, document_kind, supervisor_from_json, supervisor_to_json, FormatError};
use netdes::synthesis::{
    build_nbts, extract_supervisor, prune_ainc, verify_networked_safety, Policy, SafetySpec, SynthesisError,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetdesStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A JSON document could not be parsed or validated.
    Parse = 3,
    /// An argument names unknown events or states or is otherwise invalid.
    InvalidArgument = 4,
    /// The observation is impossible given the current estimate.
    Inconsistent = 5,
    /// A state budget was exceeded.
    Budget = 6,
    /// No safe networked supervisor exists.
    NoSupervisor = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

/// Delay and loss bounds of the two channels.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NetdesBounds {
    pub obs_delay: u32,
    pub ctrl_delay: u32,
    pub obs_loss: u32,
    pub ctrl_loss: u32,
}

impl From<NetdesBounds> for DelayBounds {
    fn from(b: NetdesBounds) -> Self {
        DelayBounds::new(b.obs_delay, b.ctrl_delay, b.obs_loss, b.ctrl_loss)
    }
}

/// A plant automaton.
pub struct NetdesPlant {
    plant: Automaton,
}

/// A networked supervisor over some plant's alphabet.
pub struct NetdesSupervisor {
    supervisor: NetworkedSupervisor,
}

/// A running state estimator driven by a supervisor.
pub struct NetdesSession {
    estimator: EstimatorSession,
    supervisor: NetworkedSupervisor,
    state: StateId,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: NetdesStatus,
    message: String,
}

impl Failure {
    fn new(status: NetdesStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::new(NetdesStatus::InvalidArgument, e.to_string())
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::new(NetdesStatus::Parse, e.to_string())
    }
}

impl From<SynthesisError> for Failure {
    fn from(e: SynthesisError) -> Self {
        let status = match e {
            SynthesisError::BudgetExceeded(_) => NetdesStatus::Budget,
            _ => NetdesStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

impl From<EstimatorError> for Failure {
    fn from(e: EstimatorError) -> Self {
        let status = match e {
            EstimatorError::InconsistentObservation(_) => NetdesStatus::Inconsistent,
            EstimatorError::Model(_) => NetdesStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure or panic and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NetdesStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            NetdesStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(panic) => {
            let detail = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal error: {detail}"));
            NetdesStatus::Internal
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(NetdesStatus::NullPointer, format!("{what} is null")))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(NetdesStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(NetdesStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(NetdesStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::new(NetdesStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn budget(b: usize) -> usize {
    if b == 0 {
        DEFAULT_BUDGET
    } else {
        b
    }
}

fn same_alphabet(plant: &Automaton, sup: &NetworkedSupervisor) -> Result<(), Failure> {
    if plant.alphabet().events() == sup.alphabet().events() {
        Ok(())
    } else {
        Err(Failure::new(
            NetdesStatus::InvalidArgument,
            "supervisor alphabet differs from the plant alphabet",
        ))
    }
}

fn safety_spec(plant: &Automaton, list: &str) -> Result<SafetySpec, Failure> {
    let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(SafetySpec::from_names(plant, &names)?)
}

fn json_names<'a>(names: impl Iterator<Item = &'a str>) -> String {
    // Names are restricted to a quote-free character set.
    let quoted: Vec<String> = names.map(|n| format!("\"{n}\"")).collect();
    format!("[{}]", quoted.join(","))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn netdes_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn netdes_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netdes_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a plant document.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn netdes_plant_from_json(json: *const c_char, out: *mut *mut NetdesPlant) -> NetdesStatus {
    guard(|| {
        out_ptr(out)?;
        let json = text(json, "json")?;
        let kind = document_kind(json)?;
        if kind != "plant" {
            return Err(FormatError::Kind {
                found: kind,
                expected: "plant".into(),
            }
            .into());
        }
        let plant = automaton_from_json(json)?;
        *out = Box::into_raw(Box::new(NetdesPlant { plant }));
        Ok(())
    })
}

/// Number of plant states.
///
/// # Safety
/// `plant` must be null or a live plant handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn netdes_plant_num_states(plant: *const NetdesPlant, out: *mut usize) -> NetdesStatus {
    guard(|| {
        let plant = borrow(plant, "plant")?;
        *borrow_mut(out, "output pointer")? = plant.plant.num_states();
        Ok(())
    })
}

/// # Safety
/// `plant` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netdes_plant_free(plant: *mut NetdesPlant) {
    if !plant.is_null() {
        drop(Box::from_raw(plant));
    }
}

/// Parses a supervisor document against the alphabet of `plant`.
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_supervisor_from_json(
    plant: *const NetdesPlant,
    json: *const c_char,
    out: *mut *mut NetdesSupervisor,
) -> NetdesStatus {
    guard(|| {
        out_ptr(out)?;
        let plant = borrow(plant, "plant")?;
        let supervisor = supervisor_from_json(text(json, "json")?, &plant.plant)?;
        *out = Box::into_raw(Box::new(NetdesSupervisor { supervisor }));
        Ok(())
    })
}

/// Serializes a supervisor. Free the result with [`netdes_string_free`].
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_supervisor_to_json(
    supervisor: *const NetdesSupervisor,
    out: *mut *mut c_char,
) -> NetdesStatus {
    guard(|| {
        out_ptr(out)?;
        let s = borrow(supervisor, "supervisor")?;
        *out = owned_string(supervisor_to_json(&s.supervisor));
        Ok(())
    })
}

/// # Safety
/// `supervisor` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netdes_supervisor_free(supervisor: *mut NetdesSupervisor) {
    if !supervisor.is_null() {
        drop(Box::from_raw(supervisor));
    }
}

/// Synthesizes a safe networked supervisor with the greedy maximal policy.
///
/// `safe_states` is a comma-separated list of state names. A `budget_states` of 0
/// selects the default state budget. Returns
/// [`NetdesStatus::NoSupervisor`] when no safe supervisor exists.
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_synthesize(
    plant: *const NetdesPlant,
    safe_states: *const c_char,
    bounds: NetdesBounds,
    budget_states: usize,
    out: *mut *mut NetdesSupervisor,
) -> NetdesStatus {
    guard(|| {
        out_ptr(out)?;
        let plant = &borrow(plant, "plant")?.plant;
        let spec = safety_spec(plant, text(safe_states, "safe_states")?)?;
        let nbts = build_nbts(plant, None, bounds.into(), budget(budget_states))?;
        let ainc = prune_ainc(&nbts, &spec)
            .ok_or_else(|| Failure::new(NetdesStatus::NoSupervisor, "no safe networked supervisor exists"))?;
        let ex = extract_supervisor(&ainc, plant, Policy::GreedyMax)?;
        *out = Box::into_raw(Box::new(NetdesSupervisor {
            supervisor: ex.supervisor,
        }));
        Ok(())
    })
}

/// Checks that no reachable closed-loop state has an unsafe plant component.
///
/// Writes 1 or 0 to `out_safe`. When unsafe and `out_witness` is not null, a
/// JSON array with the event names of a shortest plant string reaching an
/// unsafe state is stored there; otherwise it is set to null.
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_verify(
    plant: *const NetdesPlant,
    supervisor: *const NetdesSupervisor,
    safe_states: *const c_char,
    bounds: NetdesBounds,
    budget_states: usize,
    out_safe: *mut c_int,
    out_witness: *mut *mut c_char,
) -> NetdesStatus {
    guard(|| {
        let plant = &borrow(plant, "plant")?.plant;
        let sup = &borrow(supervisor, "supervisor")?.supervisor;
        let out_safe = borrow_mut(out_safe, "out_safe")?;
        same_alphabet(plant, sup)?;
        let spec = safety_spec(plant, text(safe_states, "safe_states")?)?;
        let v = verify_networked_safety(plant, sup, &spec, bounds.into(), budget(budget_states))?;
        *out_safe = c_int::from(v.safe);
        if !out_witness.is_null() {
            *out_witness = match v.witness {
                Some(w) => {
                    let a = plant.alphabet();
                    owned_string(json_names(w.plant_string.iter().map(|e| a.name(*e))))
                }
                None => ptr::null_mut(),
            };
        }
        Ok(())
    })
}

/// Starts an estimator in which `supervisor` issues the control actions.
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_session_new(
    plant: *const NetdesPlant,
    supervisor: *const NetdesSupervisor,
    bounds: NetdesBounds,
    out: *mut *mut NetdesSession,
) -> NetdesStatus {
    guard(|| {
        out_ptr(out)?;
        let plant = &borrow(plant, "plant")?.plant;
        let sup = &borrow(supervisor, "supervisor")?.supervisor;
        same_alphabet(plant, sup)?;
        let estimator = EstimatorSession::init(plant, bounds.into(), sup.initial_action())?;
        *out = Box::into_raw(Box::new(NetdesSession {
            estimator,
            supervisor: sup.clone(),
            state: sup.initial(),
        }));
        Ok(())
    })
}

/// Feeds one delivered observation. On failure the session is unchanged.
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_session_observe(session: *mut NetdesSession, event: *const c_char) -> NetdesStatus {
    guard(|| {
        let s = borrow_mut(session, "session")?;
        let name = text(event, "event")?;
        let sigma: EventId = s
            .estimator
            .plant()
            .alphabet()
            .event(name)
            .ok_or_else(|| ModelError::UnknownEvent(name.to_string()))?;
        if !s.estimator.plant().alphabet().is_observable(sigma) {
            return Err(ModelError::NotObservable(name.to_string()).into());
        }
        let next = s.supervisor.next(s.state, sigma);
        s.estimator.observe(sigma, s.supervisor.gamma(next))?;
        s.state = next;
        Ok(())
    })
}

/// Current state estimate as a JSON array of plant state names. Free the
/// result with [`netdes_string_free`].
///
/// # Safety
/// Pointers must be null or valid as described for the other functions.
#[no_mangle]
pub unsafe extern "C" fn netdes_session_estimate(session: *const NetdesSession, out: *mut *mut c_char) -> NetdesStatus {
    guard(|| {
        out_ptr(out)?;
        let s = borrow(session, "session")?;
        let plant = s.estimator.plant();
        *out = owned_string(json_names(s.estimator.nse().iter().map(|q| plant.state_name(*q))));
        Ok(())
    })
}

/// # Safety
/// `session` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn netdes_session_free(session: *mut NetdesSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_set_and_successes_clear_the_last_error() {
        let mut out = ptr::null_mut();
        let st = unsafe { netdes_plant_from_json(ptr::null(), &mut out) };
        assert_eq!(st, NetdesStatus::NullPointer);
        assert!(!netdes_last_error().is_null());
        assert_eq!(guard(|| Ok(())), NetdesStatus::Ok);
        assert!(netdes_last_error().is_null());
    }

    #[test]
    fn panics_become_internal_errors() {
        assert_eq!(guard(|| panic!("boom")), NetdesStatus::Internal);
        let msg = unsafe { CStr::from_ptr(netdes_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "internal error: boom");
    }

    #[test]
    fn names_render_as_a_json_array() {
        assert_eq!(json_names(["q1", "q2"].into_iter()), "[\"q1\",\"q2\"]");
        assert_eq!(json_names(std::iter::empty()), "[]");
    }
}
