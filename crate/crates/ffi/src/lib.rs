//! C ABI over the `riskbound` core.
//!
//! Problems are opaque handles built from the same JSON documents the CLI
//! reads. Every entry point returns an [`RbStatus`]; on failure a message is
//! available from [`rb_last_error_message`] on the calling thread. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::ArrayView2;
use riskbound::approximation::{check_td_condition, projected_system, FeatureMatrix};
use riskbound::chain::{multiplicative_matrix, stationary_distribution, ChainSpec};
use riskbound::learners::{run_average_cost, run_lspe, run_td, sample_trajectory, RecursionConfig, StepSchedule};
use riskbound::report::{analyze, ProblemDocument};
use riskbound::spectral::{perron_pair, Normalization};
use riskbound::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed document or missing field.
    Schema = 3,
    /// Chain or family fails validation, or an argument is out of range.
    Validation = 4,
    /// Input violates a mathematical precondition (sign, structure, rank).
    Domain = 5,
    Numerical = 6,
    Diverged = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbAlgorithm {
    Avg = 0,
    Lspe = 1,
    Td = 2,
}

/// Parsed problem: a document plus its chain and features when present.
pub struct RbProblem {
    doc: ProblemDocument,
    chain: Option<ChainSpec>,
    phi: Option<FeatureMatrix>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> RbStatus {
    match err {
        Error::Schema { .. } | Error::Io(_) => RbStatus::Schema,
        Error::Validation(_) | Error::Dimension(_) => RbStatus::Validation,
        Error::Numerical { .. } => RbStatus::Numerical,
        Error::Diverged { .. } => RbStatus::Diverged,
        _ => RbStatus::Domain,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (RbStatus, String)>) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RbStatus::Panic
        }
    }
}

fn core<T>(r: riskbound::Result<T>) -> Result<T, (RbStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RbStatus, String) {
    (RbStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn rb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a problem document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` owns a handle to release with [`rb_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn rb_problem_from_json(json: *const c_char, out: *mut *mut RbProblem) -> RbStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: non-null and NUL-terminated per the contract.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (RbStatus::InvalidUtf8, e.to_string()))?;
        let doc = core(ProblemDocument::from_json(text))?;
        let chain = core(doc.learner_chain())?;
        let phi = core(doc.features())?;
        let handle = Box::new(RbProblem { doc, chain, phi });
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from [`rb_problem_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rb_problem_free(problem: *mut RbProblem) {
    if !problem.is_null() {
        // SAFETY: ownership returns to Rust exactly once per the contract.
        drop(unsafe { Box::from_raw(problem) });
    }
}

unsafe fn problem_ref<'a>(problem: *const RbProblem) -> Result<&'a RbProblem, (RbStatus, String)> {
    // SAFETY: callers pass null or a live handle.
    unsafe { problem.as_ref() }.ok_or_else(|| null("problem"))
}

fn chain_of(p: &RbProblem) -> Result<&ChainSpec, (RbStatus, String)> {
    p.chain
        .as_ref()
        .ok_or_else(|| (RbStatus::Schema, "document has no chain (P and c, or A)".to_string()))
}

fn features_of(p: &RbProblem) -> Result<&FeatureMatrix, (RbStatus, String)> {
    p.phi
        .as_ref()
        .ok_or_else(|| (RbStatus::Schema, "document has no Phi".to_string()))
}

/// Perron value `λ` of the problem's `C∘P`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_lambda(problem: *const RbProblem, out: *mut f64) -> RbStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let gamma = core(multiplicative_matrix(chain_of(p)?))?.entries;
        let value = core(perron_pair(&gamma.view(), Normalization::L1Unit))?.value;
        // SAFETY: checked non-null.
        unsafe { *out = value };
        Ok(())
    })
}

/// Spectral radius `μ` of the projected matrix `Π(C∘P)`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_mu(problem: *const RbProblem, out: *mut f64) -> RbStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = core(projected_system(chain_of(p)?, features_of(p)?))?;
        // SAFETY: checked non-null.
        unsafe { *out = sys.mu };
        Ok(())
    })
}

/// Full analysis report as a JSON string, released with [`rb_string_free`].
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_analyze_json(problem: *const RbProblem, out: *mut *mut c_char) -> RbStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = core(analyze(&p.doc))?;
        let text = CString::new(report.to_json()).map_err(|e| (RbStatus::Numerical, e.to_string()))?;
        // SAFETY: checked non-null.
        unsafe { *out = text.into_raw() };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rb_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Perron value of an irreducible nonnegative `n × n` row-major matrix.
///
/// # Safety
/// `data` must point to `n * n` readable doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_perron_value(data: *const f64, n: usize, out: *mut f64) -> RbStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n
            .checked_mul(n)
            .filter(|&l| l > 0)
            .ok_or((RbStatus::Validation, "bad size".to_string()))?;
        // SAFETY: `data` covers `n * n` doubles per the contract.
        let slice = unsafe { std::slice::from_raw_parts(data, len) };
        let view = ArrayView2::from_shape((n, n), slice).map_err(|e| (RbStatus::Validation, e.to_string()))?;
        let value = core(perron_pair(&view, Normalization::L1Unit))?.value;
        // SAFETY: checked non-null.
        unsafe { *out = value };
        Ok(())
    })
}

/// Runs one recursion with the default schedule. `*out_target` is NaN when no
/// target is certified (TD without `ΦΦᵀ = D⁻¹`).
///
/// # Safety
/// `problem` must be a live handle; `out_final` and `out_target` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rb_simulate(
    problem: *const RbProblem,
    algorithm: RbAlgorithm,
    horizon: usize,
    seed: u64,
    out_final: *mut f64,
    out_target: *mut f64,
) -> RbStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        if out_final.is_null() || out_target.is_null() {
            return Err(null("output"));
        }
        if horizon == 0 {
            return Err((RbStatus::Validation, "horizon must be at least 1".into()));
        }
        let chain = chain_of(p)?;
        let traj = sample_trajectory(chain, horizon, seed);
        let cfg = RecursionConfig {
            seed,
            ..RecursionConfig::default()
        };
        let trace = match algorithm {
            RbAlgorithm::Avg => {
                let pi = core(stationary_distribution(chain))?;
                let costs = chain.state_costs();
                let target = pi.pi.iter().zip(costs.iter()).map(|(p, c)| p * c).sum();
                core(run_average_cost(
                    &traj,
                    &costs,
                    &StepSchedule::default(),
                    Some(target),
                    seed,
                ))?
            }
            RbAlgorithm::Lspe => {
                let phi = features_of(p)?;
                let mu = core(projected_system(chain, phi))?.mu;
                core(run_lspe(&traj, chain, phi, Some(mu), &cfg))?
            }
            RbAlgorithm::Td => {
                let phi = features_of(p)?;
                let pi = core(stationary_distribution(chain))?;
                let target = if check_td_condition(phi, &pi) {
                    let gamma = core(multiplicative_matrix(chain))?.entries;
                    Some(core(perron_pair(&gamma.view(), Normalization::L1Unit))?.value)
                } else {
                    None
                };
                core(run_td(&traj, chain, phi, target, &cfg))?
            }
        };
        // SAFETY: both checked non-null.
        unsafe {
            *out_final = trace.final_estimate().unwrap_or(f64::NAN);
            *out_target = trace.target.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}
