//! C interface to the postsim simulators and deciders.
//!
//! Objects cross the boundary as opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`PostsimStatus`]; on failure `postsim_last_error_message` describes the
//! most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use postsim::circuit::{parse_circuit, parse_truth_table};
use postsim::dense::{conditional_accept_prob, run_circuit};
use postsim::fantasy::majority_via_bqp_p;
use postsim::majority::{decide_majority_analytic, decide_majority_sampled, pad_instance};
use postsim::pathsum::pp_decide;
use postsim::{Circuit, DecisionReport, Error, FantasyRule, MajorityInstance, StateVector};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PostsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Validation = 4,
    ZeroProbability = 5,
    ZeroMass = 6,
    UnsupportedGate = 7,
    PathBudgetExceeded = 8,
    PreconditionViolated = 9,
    Domain = 10,
    Panic = 11,
}

impl From<&Error> for PostsimStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Syntax { .. } => PostsimStatus::Syntax,
            Error::Validation(_) => PostsimStatus::Validation,
            Error::ZeroProbability => PostsimStatus::ZeroProbability,
            Error::ZeroMass => PostsimStatus::ZeroMass,
            Error::UnsupportedGate(_) => PostsimStatus::UnsupportedGate,
            Error::PathBudgetExceeded { .. } => PostsimStatus::PathBudgetExceeded,
            Error::PreconditionViolated(_) => PostsimStatus::PreconditionViolated,
            Error::Domain(_) => PostsimStatus::Domain,
        }
    }
}

/// A parsed circuit.
pub struct PostsimCircuit(Circuit);

/// A final state vector.
pub struct PostsimState(StateVector);

/// A Boolean function given by its truth table.
pub struct PostsimInstance(MajorityInstance);

/// The outcome of a majority decision.
pub struct PostsimReport(DecisionReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PostsimStatus);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        set_last_error(e.to_string());
        Failure(PostsimStatus::from(&e))
    }
}

fn fail(status: PostsimStatus, msg: &str) -> Failure {
    set_last_error(msg.to_string());
    Failure(status)
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> PostsimStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PostsimStatus::Ok,
        Ok(Err(Failure(status))) => status,
        Err(_) => {
            set_last_error("internal panic".to_string());
            PostsimStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(PostsimStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(PostsimStatus::NullPointer, &format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(PostsimStatus::NullPointer, "text is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PostsimStatus::InvalidUtf8, "text is not valid UTF-8"))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn postsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses circuit text into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_circuit_parse(text: *const c_char, out: *mut *mut PostsimCircuit) -> PostsimStatus {
    guard(|| {
        let c = parse_circuit(read_str(text)?)?;
        write_out(out, boxed(PostsimCircuit(c)), "out")
    })
}

/// # Safety
/// `circuit` must come from `postsim_circuit_parse` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_circuit_free(circuit: *mut PostsimCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Qubit count, or 0 for a NULL handle.
///
/// # Safety
/// `circuit` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_circuit_num_qubits(circuit: *const PostsimCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.num_qubits())
}

/// Dense simulation from basis input `input`; postselections are applied
/// and the result renormalized.
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_run_dense(
    circuit: *const PostsimCircuit,
    input: usize,
    out: *mut *mut PostsimState,
) -> PostsimStatus {
    guard(|| {
        let c = as_ref(circuit, "circuit")?;
        let s = run_circuit(&c.0, input)?;
        write_out(out, boxed(PostsimState(s)), "out")
    })
}

/// # Safety
/// `state` must come from `postsim_run_dense` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_state_free(state: *mut PostsimState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of amplitudes, or 0 for a NULL handle.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_state_dim(state: *const PostsimState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be a live handle; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn postsim_state_amplitude(
    state: *const PostsimState,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> PostsimStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let a = *s
            .0
            .amplitudes()
            .get(index)
            .ok_or_else(|| fail(PostsimStatus::Validation, "amplitude index out of range"))?;
        write_out(re, a.re, "re")?;
        write_out(im, a.im, "im")
    })
}

/// P(accept = 1 | flag = 1).
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_conditional_accept_prob(
    circuit: *const PostsimCircuit,
    input: usize,
    out: *mut f64,
) -> PostsimStatus {
    guard(|| {
        let c = as_ref(circuit, "circuit")?;
        write_out(out, conditional_accept_prob(&c.0, input)?, "out")
    })
}

/// Exact path-sum test of P(accept | flag) > 1/2; `tie` is set when the two
/// sides are exactly equal.
///
/// # Safety
/// `circuit` must be a live handle; `accept` and `tie` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn postsim_pp_decide(
    circuit: *const PostsimCircuit,
    input: usize,
    accept: *mut bool,
    tie: *mut bool,
) -> PostsimStatus {
    guard(|| {
        let c = as_ref(circuit, "circuit")?;
        let d = pp_decide(&c.0, input)?;
        write_out(accept, d.accept, "accept")?;
        write_out(tie, d.tie, "tie")
    })
}

/// Builds an instance on `n` inputs from `len == 2^n` bytes, nonzero = 1.
///
/// # Safety
/// `bits` must point to `len` readable bytes and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_instance_new(
    n: usize,
    bits: *const u8,
    len: usize,
    out: *mut *mut PostsimInstance,
) -> PostsimStatus {
    guard(|| {
        if bits.is_null() {
            return Err(fail(PostsimStatus::NullPointer, "bits is null"));
        }
        let table = std::slice::from_raw_parts(bits, len).iter().map(|&b| b != 0).collect();
        let inst = MajorityInstance::new(n, table)?;
        write_out(out, boxed(PostsimInstance(inst)), "out")
    })
}

/// Parses truth-table text (`n <n>` then the bits).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_instance_parse(text: *const c_char, out: *mut *mut PostsimInstance) -> PostsimStatus {
    guard(|| {
        let inst = parse_truth_table(read_str(text)?)?;
        write_out(out, boxed(PostsimInstance(inst)), "out")
    })
}

/// Widened instance with the same answer and at least one 1.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_instance_pad(inst: *const PostsimInstance, out: *mut *mut PostsimInstance) -> PostsimStatus {
    guard(|| {
        let i = as_ref(inst, "instance")?;
        if i.0.n() >= postsim::circuit::MAX_TABLE_INPUTS {
            return Err(fail(PostsimStatus::Validation, "instance too wide to pad"));
        }
        write_out(out, boxed(PostsimInstance(pad_instance(&i.0))), "out")
    })
}

/// Number of ones in the table, or 0 for a NULL handle.
///
/// # Safety
/// `inst` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_instance_count(inst: *const PostsimInstance) -> u64 {
    inst.as_ref().map_or(0, |i| i.0.s())
}

/// # Safety
/// `inst` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_instance_free(inst: *mut PostsimInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

unsafe fn decide<F>(inst: *const PostsimInstance, out: *mut *mut PostsimReport, f: F) -> PostsimStatus
where
    F: FnOnce(&MajorityInstance) -> postsim::Result<DecisionReport>,
{
    guard(|| {
        let i = as_ref(inst, "instance")?;
        let report = f(&i.0)?;
        write_out(out, boxed(PostsimReport(report)), "out")
    })
}

/// Closed-form sweep decision.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_decide_analytic(inst: *const PostsimInstance, out: *mut *mut PostsimReport) -> PostsimStatus {
    decide(inst, out, decide_majority_analytic)
}

/// Seeded sampling decision with exact postselection.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_decide_sampled(
    inst: *const PostsimInstance,
    reps: u32,
    seed: u64,
    out: *mut *mut PostsimReport,
) -> PostsimStatus {
    decide(inst, out, |i| decide_majority_sampled(i, reps, seed))
}

/// Seeded sampling decision under the |amp|^p rule with mass-boost
/// postselection; `p` must differ from 2.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn postsim_decide_bqp_p(
    inst: *const PostsimInstance,
    p: f64,
    reps: u32,
    seed: u64,
    q_poly: u32,
    out: *mut *mut PostsimReport,
) -> PostsimStatus {
    decide(inst, out, |i| majority_via_bqp_p(i, FantasyRule::new(p)?, reps, seed, q_poly))
}

/// True when the report concluded s < 2^(n-1); false for a NULL handle.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_report_verdict(report: *const PostsimReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.verdict)
}

/// Largest overlap in an analytic or circuit report, or NaN if there is none.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_report_max_overlap(report: *const PostsimReport) -> f64 {
    report
        .as_ref()
        .and_then(|r| r.0.max_overlap())
        .unwrap_or(f64::NAN)
}

/// The report as one JSON object. Release with `postsim_string_free`.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_report_json(report: *const PostsimReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => CString::new(r.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `report` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_report_free(report: *mut PostsimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from `postsim_report_json` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn postsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
