//! C ABI over the MaxSAT drivers.
//!
//! Instances and results are opaque handles created and destroyed through
//! this API. Every fallible call returns a [`CmxStatus`]; on failure a
//! message is available from [`cmx_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use coremax::engine::Lit;
use coremax::maxsat::{
    self, parse_wcnf, Algorithm, OptimizeResult, SoftInstance, SoftProblem, SolveOptions, Status, Weight, WeightedClause,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmxStatus {
    Ok = 0,
    NullPointer = -1,
    ParseError = -2,
    InvalidArgument = -3,
    /// The result holds no model or cost.
    NoResult = -4,
    BufferTooSmall = -5,
    Panic = -6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmxAlgorithm {
    Bnb = 0,
    Wpm1 = 1,
    Msu3 = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmxOutcome {
    Optimal = 0,
    Unsatisfiable = 1,
    Unknown = 2,
}

/// Opaque weighted partial MaxSAT instance.
pub struct CmxInstance {
    inner: SoftInstance,
}

/// Opaque solver result.
pub struct CmxResult {
    inner: OptimizeResult,
    num_vars: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guarded(f: impl FnOnce() -> Result<(), (CmxStatus, String)>) -> CmxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CmxStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CmxStatus::Panic
        }
    }
}

fn null() -> (CmxStatus, String) {
    (CmxStatus::NullPointer, "null pointer argument".into())
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cmx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse WCNF text. On success `*out` owns a new instance.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cmx_instance_parse_wcnf(text: *const c_char, out: *mut *mut CmxInstance) -> CmxStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (CmxStatus::ParseError, "text is not UTF-8".to_string()))?;
        let inner = parse_wcnf(text).map_err(|e| (CmxStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(CmxInstance { inner }));
        Ok(())
    })
}

/// Empty instance over `num_vars` variables.
#[no_mangle]
pub extern "C" fn cmx_instance_new(num_vars: usize) -> *mut CmxInstance {
    Box::into_raw(Box::new(CmxInstance {
        inner: SoftInstance {
            num_vars,
            top: 1,
            clauses: Vec::new(),
        },
    }))
}

/// Append a clause of DIMACS literals. `weight` is ignored when `hard`.
///
/// # Safety
/// `inst` must come from this API; `lits` must point to `len` integers.
#[no_mangle]
pub unsafe extern "C" fn cmx_instance_add_clause(
    inst: *mut CmxInstance,
    lits: *const i32,
    len: usize,
    weight: u64,
    hard: bool,
) -> CmxStatus {
    guarded(|| {
        let inst = inst.as_mut().ok_or_else(null)?;
        if lits.is_null() && len > 0 {
            return Err(null());
        }
        let raw = if len == 0 { &[][..] } else { std::slice::from_raw_parts(lits, len) };
        let n = inst.inner.num_vars as i64;
        if raw.iter().any(|&l| l == 0 || i64::from(l).abs() > n) {
            return Err((CmxStatus::InvalidArgument, "literal out of range".into()));
        }
        if !hard && weight == 0 {
            return Err((CmxStatus::InvalidArgument, "soft weights must be positive".into()));
        }
        let weight = if hard { Weight::Hard } else { Weight::Soft(weight) };
        inst.inner.clauses.push(WeightedClause {
            lits: raw.iter().map(|&l| Lit::from_dimacs(l)).collect(),
            weight,
        });
        if let Weight::Soft(w) = weight {
            inst.inner.top = inst.inner.top.saturating_add(w);
        }
        Ok(())
    })
}

/// # Safety
/// `inst` must come from this API (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cmx_instance_free(inst: *mut CmxInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Solve `inst`. A nonpositive `timeout_s` means no time limit.
///
/// # Safety
/// `inst` must come from this API and `out` be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cmx_solve(
    inst: *const CmxInstance,
    algorithm: CmxAlgorithm,
    timeout_s: f64,
    out: *mut *mut CmxResult,
) -> CmxStatus {
    guarded(|| {
        let inst = inst.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        if timeout_s.is_nan() {
            return Err((CmxStatus::InvalidArgument, "timeout is NaN".into()));
        }
        let opts = SolveOptions {
            timeout: (timeout_s > 0.0).then(|| Duration::from_secs_f64(timeout_s)),
            max_conflicts: None,
        };
        let algorithm = match algorithm {
            CmxAlgorithm::Bnb => Algorithm::BranchAndBound,
            CmxAlgorithm::Wpm1 => Algorithm::Wpm1,
            CmxAlgorithm::Msu3 => Algorithm::Msu3,
        };
        let inner = maxsat::solve(SoftProblem::from_instance(&inst.inner), algorithm, &opts);
        *out = Box::into_raw(Box::new(CmxResult {
            inner,
            num_vars: inst.inner.num_vars,
        }));
        Ok(())
    })
}

/// # Safety
/// `res` must come from this API and `out` be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cmx_result_outcome(res: *const CmxResult, out: *mut CmxOutcome) -> CmxStatus {
    guarded(|| {
        let res = res.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = match res.inner.status {
            Status::Optimal => CmxOutcome::Optimal,
            Status::Unsatisfiable => CmxOutcome::Unsatisfiable,
            Status::Unknown => CmxOutcome::Unknown,
        };
        Ok(())
    })
}

/// Cost of the best model found.
///
/// # Safety
/// `res` must come from this API and `out` be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cmx_result_cost(res: *const CmxResult, out: *mut u64) -> CmxStatus {
    guarded(|| {
        let res = res.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = res.inner.cost.ok_or((CmxStatus::NoResult, "no model".to_string()))?;
        Ok(())
    })
}

/// Number of cores the driver extracted.
///
/// # Safety
/// `res` must come from this API or be null.
#[no_mangle]
pub unsafe extern "C" fn cmx_result_num_cores(res: *const CmxResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.trace.cores.len())
}

/// Write the model as DIMACS literals, one per instance variable. `*len`
/// receives the number of literals even when `cap` is too small.
///
/// # Safety
/// `res` must come from this API, `buf` must hold `cap` integers (or be
/// null when `cap` is 0) and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmx_result_model(res: *const CmxResult, buf: *mut i32, cap: usize, len: *mut usize) -> CmxStatus {
    guarded(|| {
        let res = res.as_ref().ok_or_else(null)?;
        let len = len.as_mut().ok_or_else(null)?;
        let model = res.inner.model.as_ref().ok_or((CmxStatus::NoResult, "no model".to_string()))?;
        *len = res.num_vars;
        if cap < res.num_vars {
            return Err((CmxStatus::BufferTooSmall, format!("need room for {} literals", res.num_vars)));
        }
        if buf.is_null() && res.num_vars > 0 {
            return Err(null());
        }
        for (i, &value) in model.iter().take(res.num_vars).enumerate() {
            let v = i as i32 + 1;
            ptr::write(buf.add(i), if value { v } else { -v });
        }
        Ok(())
    })
}

/// # Safety
/// `res` must come from this API (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cmx_result_free(res: *mut CmxResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
