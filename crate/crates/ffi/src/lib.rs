//! C interface to the model checker.
//!
//! Models are opaque handles created by `pasg_model_parse` or
//! `pasg_model_load` and released with `pasg_model_free`. Every fallible
//! call returns a `PasgStatus`; on failure `pasg_last_error_message`
//! describes the most recent error on the calling thread. Strings returned
//! by the library are released with `pasg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pasg::domain::DomainKind;
use pasg::harness::{
    load_model, model_name, parse_model, run_check, CheckConfig, HarnessError, RunStatus,
    SolverKind, StatsRecord,
};
use pasg::model::{ReachabilityQuery, SymbolicMdp};
use pasg::pasg::WaitlistPolicy;
use pasg::solver::Heuristic;

/// Parsed model and query.
pub struct PasgModel {
    name: String,
    model: SymbolicMdp,
    query: ReachabilityQuery,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PasgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    /// A node, state, trace or sweep budget ran out; partial bounds are
    /// still reported.
    Budget = 5,
    Solver = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PasgSolver {
    Oracle = 0,
    Bvi = 1,
    Brtdp = 2,
    LazyBvi = 3,
    LazyBrtdp = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PasgDomain {
    Expl = 0,
    Pred = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PasgHeuristic {
    Random = 0,
    DiffBased = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PasgOptions {
    pub solver: PasgSolver,
    pub domain: PasgDomain,
    pub heuristic: PasgHeuristic,
    /// Absolute width of the result interval.
    pub threshold: f64,
    pub seed: u64,
    pub max_nodes: u64,
    pub max_traces: u64,
    /// Breadth-first instead of depth-first graph exploration.
    pub fifo: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PasgResult {
    pub lower: f64,
    pub upper: f64,
    pub total_nodes: u64,
    pub covered_nodes: u64,
    pub iterations: u64,
    pub time_ms: u64,
    pub budget_exceeded: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn fail(status: PasgStatus, msg: impl Into<String>) -> PasgStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `PasgStatus::Panic`.
fn guard(f: impl FnOnce() -> PasgStatus) -> PasgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == PasgStatus::Ok {
                set_error("");
            }
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            fail(PasgStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, PasgStatus> {
    if p.is_null() {
        return Err(fail(PasgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PasgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn status_of(e: &HarnessError) -> PasgStatus {
    match e {
        HarnessError::Io { .. } => PasgStatus::Io,
        HarnessError::Parse { .. } | HarnessError::Model(_) => PasgStatus::Parse,
        _ if e.exit_code() == 2 => PasgStatus::Budget,
        _ => PasgStatus::Solver,
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn pasg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn pasg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses model text. `name` may be null, in which case the model is
/// called "model". On success `*out` owns a new handle.
///
/// # Safety
/// `text` and a non-null `name` must be nul-terminated strings; `out` must
/// be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pasg_model_parse(
    text: *const c_char,
    name: *const c_char,
    out: *mut *mut PasgModel,
) -> PasgStatus {
    guard(|| {
        if out.is_null() {
            return fail(PasgStatus::NullPointer, "out is null");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let name = if name.is_null() {
            "model"
        } else {
            match read_str(name, "name") {
                Ok(n) => n,
                Err(s) => return s,
            }
        };
        match parse_model(text) {
            Ok((model, query)) => {
                *out = Box::into_raw(Box::new(PasgModel {
                    name: name.to_string(),
                    model,
                    query,
                }));
                PasgStatus::Ok
            }
            Err(e) => fail(PasgStatus::Parse, e.to_string()),
        }
    })
}

/// Reads and parses a model file; the model is named after the file stem.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pasg_model_load(path: *const c_char, out: *mut *mut PasgModel) -> PasgStatus {
    guard(|| {
        if out.is_null() {
            return fail(PasgStatus::NullPointer, "out is null");
        }
        let path = match read_str(path, "path") {
            Ok(p) => Path::new(p),
            Err(s) => return s,
        };
        match load_model(path) {
            Ok((model, query)) => {
                *out = Box::into_raw(Box::new(PasgModel {
                    name: model_name(path),
                    model,
                    query,
                }));
                PasgStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pasg_model_free(model: *mut PasgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Defaults: lazy BVI in the explicit-value domain, threshold 1e-6.
#[no_mangle]
pub extern "C" fn pasg_options_default() -> PasgOptions {
    let c = CheckConfig::default();
    PasgOptions {
        solver: PasgSolver::LazyBvi,
        domain: PasgDomain::Expl,
        heuristic: PasgHeuristic::Random,
        threshold: c.threshold,
        seed: c.seed,
        max_nodes: c.max_nodes as u64,
        max_traces: c.max_traces,
        fifo: false,
    }
}

fn config(o: &PasgOptions) -> CheckConfig {
    CheckConfig {
        solver: match o.solver {
            PasgSolver::Oracle => SolverKind::Oracle,
            PasgSolver::Bvi => SolverKind::Bvi,
            PasgSolver::Brtdp => SolverKind::Brtdp,
            PasgSolver::LazyBvi => SolverKind::LazyBvi,
            PasgSolver::LazyBrtdp => SolverKind::LazyBrtdp,
        },
        domain: match o.domain {
            PasgDomain::Expl => DomainKind::Expl,
            PasgDomain::Pred => DomainKind::Pred,
        },
        heuristic: match o.heuristic {
            PasgHeuristic::Random => Heuristic::Random,
            PasgHeuristic::DiffBased => Heuristic::DiffBased,
        },
        threshold: o.threshold,
        seed: o.seed,
        waitlist: if o.fifo { WaitlistPolicy::Fifo } else { WaitlistPolicy::Lifo },
        max_nodes: usize::try_from(o.max_nodes).unwrap_or(usize::MAX),
        max_traces: o.max_traces,
        smt_cmd: None,
        ..Default::default()
    }
}

unsafe fn solve(model: *const PasgModel, options: *const PasgOptions) -> Result<StatsRecord, PasgStatus> {
    let model = model
        .as_ref()
        .ok_or_else(|| fail(PasgStatus::NullPointer, "model is null"))?;
    let options = options.as_ref().copied().unwrap_or_else(|| pasg_options_default());
    if !(options.threshold > 0.0) {
        return Err(fail(PasgStatus::Solver, "threshold must be positive"));
    }
    run_check(&model.name, &model.model, &model.query, &config(&options))
        .map_err(|e| fail(status_of(&e), e.to_string()))
}

fn budget_status(r: &StatsRecord) -> PasgStatus {
    match r.status {
        RunStatus::Ok => PasgStatus::Ok,
        RunStatus::BudgetExceeded => fail(PasgStatus::Budget, "budget exceeded; bounds are partial"),
    }
}

/// Solves the model. `options` may be null for the defaults. `*out` is
/// filled on `Ok` and on `Budget`.
///
/// # Safety
/// `model` must be a live handle, `options` null or valid, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn pasg_check(
    model: *const PasgModel,
    options: *const PasgOptions,
    out: *mut PasgResult,
) -> PasgStatus {
    guard(|| {
        if out.is_null() {
            return fail(PasgStatus::NullPointer, "out is null");
        }
        match solve(model, options) {
            Ok(r) => {
                *out = PasgResult {
                    lower: r.lower,
                    upper: r.upper,
                    total_nodes: r.total_nodes as u64,
                    covered_nodes: r.covered_nodes as u64,
                    iterations: r.iterations,
                    time_ms: r.time_ms,
                    budget_exceeded: r.status == RunStatus::BudgetExceeded,
                };
                budget_status(&r)
            }
            Err(s) => s,
        }
    })
}

/// Solves the model and returns the statistics record as JSON in `*out`,
/// to be released with `pasg_string_free`. Filled on `Ok` and `Budget`.
///
/// # Safety
/// As for `pasg_check`.
#[no_mangle]
pub unsafe extern "C" fn pasg_stats_json(
    model: *const PasgModel,
    options: *const PasgOptions,
    out: *mut *mut c_char,
) -> PasgStatus {
    guard(|| {
        if out.is_null() {
            return fail(PasgStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        match solve(model, options) {
            Ok(r) => {
                let json = serde_json::to_string(&r).expect("record serialises");
                *out = CString::new(json).expect("JSON has no nul bytes").into_raw();
                budget_status(&r)
            }
            Err(s) => s,
        }
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pasg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
