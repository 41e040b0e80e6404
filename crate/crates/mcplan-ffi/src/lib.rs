//! C ABI for the Monte-Carlo planning toolkit.
//!
//! Objects cross the boundary as opaque handles (`McplanMdp`, `McplanOracle`)
//! created and destroyed by paired `*_new`/`*_free` calls. Every fallible
//! function returns a [`McplanStatus`]; on failure a thread-local message is
//! retrievable through [`mcplan_last_error`] until the next call on the same
//! thread. All functions are safe to call from multiple threads as long as
//! each handle is used by one thread at a time; planning itself is
//! deterministic in the `(seed, stream)` pair exactly like the Rust API.
//!
//! The C header mirroring this surface lives at `include/mcplan.h` (generated
//! with cbindgen; regenerate with `cbindgen --crate mcplan-ffi`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mcplan::domains::{GameTreeMdp, GameTreeSpec, SailingConfig, SailingMdp};
use mcplan::mdp::GenerativeMdp;
use mcplan::oracle::{cache, OracleTable, DEFAULT_CELL_CAP};
use mcplan::planners::{plan, PlanConfig, PlannerSpec};
use mcplan::rng::RngStream;
use mcplan::Error;

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McplanStatus {
    /// Success.
    Ok = 0,
    /// Any runtime failure not covered by a more specific code.
    Runtime = 1,
    /// Invalid configuration (bad parameters, malformed planner spec).
    Config = 2,
    /// A resource cap (table size, policy count) refused the request.
    Resource = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
}

/// An owned planning domain.
pub struct McplanMdp(Box<dyn GenerativeMdp + Send + Sync>);

/// An owned exact value table for one domain.
pub struct McplanOracle(OracleTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).expect("nul stripped"));
}

fn status_of(err: &Error) -> McplanStatus {
    match err {
        Error::Config(_) => McplanStatus::Config,
        Error::ResourceCap(_) => McplanStatus::Resource,
        _ => McplanStatus::Runtime,
    }
}

fn fail(err: &Error) -> McplanStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn null_arg(name: &str) -> McplanStatus {
    set_error(&format!("null argument: {name}"));
    McplanStatus::NullArgument
}

/// Runs `f`, converting panics into `Runtime` errors so they never unwind
/// across the ABI.
fn guarded<T>(f: impl FnOnce() -> Result<T, McplanStatus>) -> Result<T, McplanStatus> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(_) => {
            set_error("internal panic");
            Err(McplanStatus::Runtime)
        }
    }
}

/// Version of the underlying library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mcplan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn mcplan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates the stochastic regatta domain on an `n × n` grid and writes the
/// handle to `out`. Free with [`mcplan_mdp_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn mcplan_sailing_new(grid: u32, out: *mut *mut McplanMdp) -> McplanStatus {
    if out.is_null() {
        return null_arg("out");
    }
    match guarded(|| SailingMdp::new(SailingConfig::new(grid)).map_err(|e| fail(&e))) {
        Ok(mdp) => {
            *out = Box::into_raw(Box::new(McplanMdp(Box::new(mdp))));
            McplanStatus::Ok
        }
        Err(status) => status,
    }
}

/// Creates a deterministic alternating-move game tree with `branching` moves
/// per node, `depth` plies, and edge values derived from `seed`. Free with
/// [`mcplan_mdp_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn mcplan_gametree_new(
    branching: u16,
    depth: u32,
    seed: u64,
    out: *mut *mut McplanMdp,
) -> McplanStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let spec = GameTreeSpec { branching, depth: depth as usize, seed };
    match guarded(|| GameTreeMdp::new(spec).map_err(|e| fail(&e))) {
        Ok(mdp) => {
            *out = Box::into_raw(Box::new(McplanMdp(Box::new(mdp))));
            McplanStatus::Ok
        }
        Err(status) => status,
    }
}

/// Releases a domain handle. Passing null is a no-op.
///
/// # Safety
/// `mdp` must be null or a pointer produced by a `mcplan_*_new` call that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn mcplan_mdp_free(mdp: *mut McplanMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Number of decisions available from a start state. Returns 0 on null.
///
/// # Safety
/// `mdp` must be null or a live domain handle.
#[no_mangle]
pub unsafe extern "C" fn mcplan_mdp_horizon(mdp: *const McplanMdp) -> u64 {
    match mdp.as_ref() {
        Some(m) => m.0.horizon() as u64,
        None => 0,
    }
}

/// Dense upper bound on state identifiers, or 0 when the domain does not
/// declare one (or on null).
///
/// # Safety
/// `mdp` must be null or a live domain handle.
#[no_mangle]
pub unsafe extern "C" fn mcplan_mdp_state_count(mdp: *const McplanMdp) -> u64 {
    match mdp.as_ref() {
        Some(m) => m.0.state_count().unwrap_or(0),
        None => 0,
    }
}

/// Number of applicable actions at `state`; 0 means terminal (or null).
///
/// # Safety
/// `mdp` must be null or a live domain handle.
#[no_mangle]
pub unsafe extern "C" fn mcplan_mdp_action_count(mdp: *const McplanMdp, state: u64) -> u64 {
    match mdp.as_ref() {
        Some(m) => m.0.action_count(state) as u64,
        None => 0,
    }
}

/// Copies up to `cap` declared start states into `buf` and writes the total
/// count to `out_len`. Call with `cap = 0` (and a possibly-null `buf`) to
/// query the count first.
///
/// # Safety
/// `mdp` must be a live domain handle, `out_len` a valid pointer, and `buf`
/// must point to at least `cap` writable `u64` slots when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn mcplan_mdp_start_states(
    mdp: *const McplanMdp,
    buf: *mut u64,
    cap: u64,
    out_len: *mut u64,
) -> McplanStatus {
    let Some(m) = mdp.as_ref() else {
        return null_arg("mdp");
    };
    if out_len.is_null() {
        return null_arg("out_len");
    }
    if cap > 0 && buf.is_null() {
        return null_arg("buf");
    }
    let starts = m.0.start_states();
    *out_len = starts.len() as u64;
    for (i, &s) in starts.iter().take(cap as usize).enumerate() {
        *buf.add(i) = s;
    }
    McplanStatus::Ok
}

/// Runs the planner described by `spec` (the same grammar as the CLI:
/// `"uct"`, `"gct:eps=0.5"`, `"brue"`, `"brue-alpha:0.9"`, `"brue-per"`,
/// `"naive"`, `"crafty"`, …) for `budget` iterations from `state` and writes
/// the recommended action to `out_action`. `(seed, stream)` select the
/// deterministic random stream; equal pairs replay identical runs.
///
/// # Safety
/// `mdp` must be a live domain handle, `spec` a NUL-terminated string, and
/// `out_action` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcplan_plan(
    mdp: *const McplanMdp,
    state: u64,
    budget: u64,
    spec: *const c_char,
    seed: u64,
    stream: u64,
    out_action: *mut u16,
) -> McplanStatus {
    let Some(m) = mdp.as_ref() else {
        return null_arg("mdp");
    };
    if spec.is_null() {
        return null_arg("spec");
    }
    if out_action.is_null() {
        return null_arg("out_action");
    }
    let spec = match CStr::from_ptr(spec).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("planner spec is not valid UTF-8");
            return McplanStatus::Config;
        }
    };
    let result = guarded(|| {
        let parsed = PlannerSpec::parse(spec).map_err(|e| fail(&e))?;
        let config = PlanConfig::new(parsed);
        plan(m.0.as_ref(), state, budget, &config, &RngStream::new(seed, stream))
            .map_err(|e| fail(&e))
    });
    match result {
        Ok(outcome) => {
            *out_action = outcome.action;
            McplanStatus::Ok
        }
        Err(status) => status,
    }
}

/// Builds (or loads from the cache directory) the exact value table of the
/// domain and writes the handle to `out`. `cell_cap = 0` selects the default
/// cap on table size. Free with [`mcplan_oracle_free`].
///
/// # Safety
/// `mdp` must be a live domain handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcplan_oracle_build(
    mdp: *const McplanMdp,
    cell_cap: u64,
    out: *mut *mut McplanOracle,
) -> McplanStatus {
    let Some(m) = mdp.as_ref() else {
        return null_arg("mdp");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let cap = if cell_cap == 0 { DEFAULT_CELL_CAP } else { cell_cap };
    match guarded(|| cache::load_or_build(m.0.as_ref(), cap).map_err(|e| fail(&e))) {
        Ok(table) => {
            *out = Box::into_raw(Box::new(McplanOracle(table)));
            McplanStatus::Ok
        }
        Err(status) => status,
    }
}

/// Releases an oracle handle. Passing null is a no-op.
///
/// # Safety
/// `oracle` must be null or a pointer produced by [`mcplan_oracle_build`]
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn mcplan_oracle_free(oracle: *mut McplanOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Writes the exact value of `state` with `steps_to_go` decisions left.
/// Fails with `Runtime` when the oracle does not cover that entry.
///
/// # Safety
/// `oracle` must be a live oracle handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcplan_oracle_value(
    oracle: *const McplanOracle,
    state: u64,
    steps_to_go: u64,
    out: *mut f64,
) -> McplanStatus {
    let Some(o) = oracle.as_ref() else {
        return null_arg("oracle");
    };
    if out.is_null() {
        return null_arg("out");
    }
    match o.0.entry(state, steps_to_go as usize) {
        Some(entry) => {
            *out = entry.v;
            McplanStatus::Ok
        }
        None => {
            set_error("state/steps-to-go pair not covered by this oracle");
            McplanStatus::Runtime
        }
    }
}

/// Writes the optimal action at `state` with `steps_to_go` decisions left.
/// Fails with `Runtime` for uncovered or terminal entries.
///
/// # Safety
/// `oracle` must be a live oracle handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcplan_oracle_best_action(
    oracle: *const McplanOracle,
    state: u64,
    steps_to_go: u64,
    out: *mut u16,
) -> McplanStatus {
    let Some(o) = oracle.as_ref() else {
        return null_arg("oracle");
    };
    if out.is_null() {
        return null_arg("out");
    }
    match o.0.best_action(state, steps_to_go as usize) {
        Some(a) => {
            *out = a;
            McplanStatus::Ok
        }
        None => {
            set_error("no optimal action recorded for that state/steps-to-go pair");
            McplanStatus::Runtime
        }
    }
}

/// Writes the simple regret of recommending `action` at `state` with
/// `steps_to_go` decisions left: the exact value lost relative to the
/// optimal action (0 when `action` is optimal).
///
/// # Safety
/// `oracle` must be a live oracle handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcplan_oracle_simple_regret(
    oracle: *const McplanOracle,
    state: u64,
    steps_to_go: u64,
    action: u16,
    out: *mut f64,
) -> McplanStatus {
    let Some(o) = oracle.as_ref() else {
        return null_arg("oracle");
    };
    if out.is_null() {
        return null_arg("out");
    }
    if o.0.entry(state, steps_to_go as usize).is_none() {
        set_error("state/steps-to-go pair not covered by this oracle");
        return McplanStatus::Runtime;
    }
    *out = o.0.simple_regret(state, steps_to_go as usize, action);
    McplanStatus::Ok
}
