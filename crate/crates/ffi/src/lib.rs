//! C interface to `prodsat`.
//!
//! Every entry point returns a [`ProdsatStatus`]. On failure the message is
//! available from [`prodsat_last_error`] on the same thread until the next
//! call. Objects are opaque handles released with their `_free` function;
//! strings handed out by the library are released with [`prodsat_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use prodsat::graph::{leaf_removal, sample_graph};
use prodsat::groebner::{is_unsat, parse_system};
use prodsat::homotopy::{self, ProdsatOutcome};
use prodsat::instance::{kernel_dimension, max_residual, sample_exact_instance, sample_instance, Instance, ProductState};
use prodsat::io::{instance_from_json, instance_to_json};
use prodsat::polytope::{bkk_bound_polys, DEFAULT_MV_DIM_CAP};
use prodsat::QsatError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProdsatStatus {
    Ok = 0,
    /// The core has no dimer covering, or the system has no solution.
    Unsatisfied = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    ResourceLimit = 4,
    Degenerate = 5,
    PathFailure = 6,
    NotZeroDimensional = 7,
    Parse = 8,
    Io = 9,
    Internal = 10,
    Panic = 11,
}

impl From<&QsatError> for ProdsatStatus {
    fn from(e: &QsatError) -> Self {
        match e {
            QsatError::InvalidParameters(_) => ProdsatStatus::InvalidArgument,
            QsatError::ResourceLimit(_) => ProdsatStatus::ResourceLimit,
            QsatError::DegenerateInstance { .. } => ProdsatStatus::Degenerate,
            QsatError::PathFailure { .. } => ProdsatStatus::PathFailure,
            QsatError::NotZeroDimensional => ProdsatStatus::NotZeroDimensional,
            QsatError::Parse(_) => ProdsatStatus::Parse,
            QsatError::Io(_) => ProdsatStatus::Io,
            QsatError::Invariant(_) => ProdsatStatus::Internal,
        }
    }
}

/// A k-QSAT instance.
pub struct ProdsatInstance(Instance);

/// A satisfying product state.
pub struct ProdsatSolution {
    state: ProductState,
    max_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(e: QsatError) -> ProdsatStatus {
    let status = ProdsatStatus::from(&e);
    set_error(e.to_string());
    status
}

/// Runs `f` with the error slot cleared and panics turned into a status.
fn guard(f: impl FnOnce() -> Result<ProdsatStatus, QsatError>) -> ProdsatStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => fail(e),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            ProdsatStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return ProdsatStatus::NullPointer;
        })+
    };
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, QsatError> {
    CStr::from_ptr(s).to_str().map_err(|_| QsatError::Parse("string is not valid UTF-8".into()))
}

fn give_string(s: String) -> Result<*mut c_char, QsatError> {
    CString::new(s).map(CString::into_raw).map_err(|_| QsatError::Invariant("string contains a nul byte".into()))
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library and valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn prodsat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn prodsat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Random instance with `m` clauses on `n` variables. `denom_bound = 0` gives
/// float amplitudes, a positive value exact rational ones.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn prodsat_instance_random(
    k: usize,
    n: usize,
    m: usize,
    seed: u64,
    denom_bound: i64,
    out: *mut *mut ProdsatInstance,
) -> ProdsatStatus {
    non_null!(out);
    guard(|| {
        let g = sample_graph(n, m, k, seed)?;
        let inst = match denom_bound {
            0 => sample_instance(&g, seed),
            b => sample_exact_instance(&g, b, seed)?,
        };
        *out = Box::into_raw(Box::new(ProdsatInstance(inst)));
        Ok(ProdsatStatus::Ok)
    })
}

/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_instance_from_json(json: *const c_char, out: *mut *mut ProdsatInstance) -> ProdsatStatus {
    non_null!(json, out);
    guard(|| {
        let inst = instance_from_json(read_str(json)?)?;
        *out = Box::into_raw(Box::new(ProdsatInstance(inst)));
        Ok(ProdsatStatus::Ok)
    })
}

/// Serialized instance; free the result with [`prodsat_string_free`].
///
/// # Safety
/// `inst` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_instance_to_json(inst: *const ProdsatInstance, out: *mut *mut c_char) -> ProdsatStatus {
    non_null!(inst, out);
    guard(|| {
        *out = give_string(instance_to_json(&(*inst).0)?)?;
        Ok(ProdsatStatus::Ok)
    })
}

/// # Safety
/// `inst` must be null or a handle that was not freed.
#[no_mangle]
pub unsafe extern "C" fn prodsat_instance_free(inst: *mut ProdsatInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_instance_size(
    inst: *const ProdsatInstance,
    n_vars: *mut usize,
    n_clauses: *mut usize,
) -> ProdsatStatus {
    non_null!(inst, n_vars, n_clauses);
    *n_vars = (*inst).0.n_vars();
    *n_clauses = (*inst).0.graph.n_clauses();
    ProdsatStatus::Ok
}

/// Size of the 2-core left by leaf removal.
///
/// # Safety
/// `inst` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_core_size(
    inst: *const ProdsatInstance,
    core_vars: *mut usize,
    core_clauses: *mut usize,
) -> ProdsatStatus {
    non_null!(inst, core_vars, core_clauses);
    guard(|| {
        let r = leaf_removal(&(*inst).0.graph);
        *core_vars = r.core.n_vars;
        *core_clauses = r.core.n_clauses();
        Ok(ProdsatStatus::Ok)
    })
}

/// Ground-space dimension of `H`; exact for exact instances.
///
/// # Safety
/// `inst` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_kernel_dimension(inst: *const ProdsatInstance, tol: f64, out: *mut usize) -> ProdsatStatus {
    non_null!(inst, out);
    guard(|| {
        *out = kernel_dimension(&(*inst).0, tol)?;
        Ok(ProdsatStatus::Ok)
    })
}

/// Searches for a product state. Returns `UNSATISFIED` with `*out = NULL` when
/// the core has no dimer covering.
///
/// # Safety
/// `inst` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_solve(
    inst: *const ProdsatInstance,
    seed: u64,
    tol: f64,
    out: *mut *mut ProdsatSolution,
) -> ProdsatStatus {
    non_null!(inst, out);
    *out = ptr::null_mut();
    guard(|| match homotopy::prodsat_solve(&(*inst).0, seed, tol)? {
        ProdsatOutcome::Solution(s) => {
            *out = Box::into_raw(Box::new(ProdsatSolution { state: s.state, max_residual: s.max_residual }));
            Ok(ProdsatStatus::Ok)
        }
        ProdsatOutcome::NoCovering(h) => {
            set_error(format!("no dimer covering: {} clauses on {} variables", h.clauses.len(), h.neighborhood.len()));
            Ok(ProdsatStatus::Unsatisfied)
        }
    })
}

/// # Safety
/// `sol` must be null or a handle that was not freed.
#[no_mangle]
pub unsafe extern "C" fn prodsat_solution_free(sol: *mut ProdsatSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodsat_solution_n_qubits(sol: *const ProdsatSolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    let sol = &*sol;
    sol.state.qubits.len()
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodsat_solution_max_residual(sol: *const ProdsatSolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    (*sol).max_residual
}

/// Qubit `i` as `a|0⟩ + b|1⟩`, written to `amps` as `[re a, im a, re b, im b]`.
///
/// # Safety
/// `sol` must be a live handle and `amps` valid for four writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_solution_qubit(sol: *const ProdsatSolution, i: usize, amps: *mut f64) -> ProdsatStatus {
    non_null!(sol, amps);
    let sol = &*sol;
    let Some(q) = sol.state.qubits.get(i) else {
        set_error(format!("qubit {i} out of range"));
        return ProdsatStatus::InvalidArgument;
    };
    let out = std::slice::from_raw_parts_mut(amps, 4);
    out.copy_from_slice(&[q[0].re, q[0].im, q[1].re, q[1].im]);
    ProdsatStatus::Ok
}

/// Re-evaluates the solution against `inst`.
///
/// # Safety
/// Both handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_solution_residual(
    sol: *const ProdsatSolution,
    inst: *const ProdsatInstance,
    out: *mut f64,
) -> ProdsatStatus {
    non_null!(sol, inst, out);
    guard(|| {
        let (s, i) = (&(*sol).state, &(*inst).0);
        if s.qubits.len() != i.n_vars() {
            return Err(QsatError::InvalidParameters("solution and instance sizes differ".into()));
        }
        *out = max_residual(i, s);
        Ok(ProdsatStatus::Ok)
    })
}

/// Mixed volume of a square system given as text, one polynomial per line.
///
/// # Safety
/// `system` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prodsat_mixed_volume(system: *const c_char, out: *mut u64) -> ProdsatStatus {
    non_null!(system, out);
    guard(|| {
        let (_, polys) = parse_system(read_str(system)?, None)?;
        *out = bkk_bound_polys(&polys, DEFAULT_MV_DIM_CAP.max(polys.len()))?;
        Ok(ProdsatStatus::Ok)
    })
}

/// Exact test for the absence of common complex roots. Returns `UNSATISFIED`
/// when the system has none and `OK` otherwise.
///
/// # Safety
/// `system` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn prodsat_system_unsat(system: *const c_char) -> ProdsatStatus {
    non_null!(system);
    guard(|| {
        let (_, polys) = parse_system(read_str(system)?, None)?;
        Ok(if is_unsat(&polys)? { ProdsatStatus::Unsatisfied } else { ProdsatStatus::Ok })
    })
}
