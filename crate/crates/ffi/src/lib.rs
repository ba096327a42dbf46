//! C ABI for `ssrchain`.
//!
//! Every fallible function returns an [`SsrStatus`] and writes its result
//! through an out-pointer. On failure a description is available from
//! [`ssr_last_error_message`] on the same thread. Chains and pole lists are
//! opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use ssrchain::asymptotic::{critical_pair, g_eval};
use ssrchain::charfn::CharFn;
use ssrchain::rootfind::{find_collective_rates, Pole, PoleClass, PoleSearch, SearchWindow};
use ssrchain::ssr::maximize_over_separation;
use ssrchain::transfer::scattering;
use ssrchain::{ChainParams, Mode, SsrError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    IndexOutOfRange = 4,
    Panic = 5,
}

/// Values accepted for the `mode` argument of [`ssr_chain_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsrMode {
    General = 0,
    SrCondition = 1,
    Markovian = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsrPoleClass {
    ZeroMode = 0,
    MarkovianLike = 1,
    ExclusivelyNonMarkovian = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SsrComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsrWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsrPole {
    pub delta: SsrComplex,
    pub gamma: SsrComplex,
    pub residual: f64,
    pub multiplicity: usize,
    pub classification: SsrPoleClass,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SsrMaximum {
    pub n_qubits: usize,
    pub l_critical: f64,
    pub gamma_ssr: SsrComplex,
    pub coalescence: bool,
    pub evaluations: usize,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SsrCriticalPair {
    pub alpha_c: f64,
    pub beta_c: f64,
    pub tau_c: f64,
    pub residual: f64,
}

/// Opaque chain configuration.
pub struct SsrChain {
    params: ChainParams,
}

/// Opaque result of [`ssr_find_poles`].
pub struct SsrPoleList {
    search: PoleSearch,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &SsrError) -> SsrStatus {
    if err.is_usage() {
        SsrStatus::InvalidArgument
    } else {
        SsrStatus::SolverFailure
    }
}

/// Run `f`, recording errors and converting panics.
fn guard<F: FnOnce() -> Result<(), (SsrStatus, String)>>(f: F) -> SsrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SsrStatus::Panic
        }
    }
}

fn lib_err(e: SsrError) -> (SsrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (SsrStatus, String) {
    (SsrStatus::NullPointer, format!("{what} is null"))
}

fn to_c(z: Complex64) -> SsrComplex {
    SsrComplex { re: z.re, im: z.im }
}

fn from_c(z: SsrComplex) -> Complex64 {
    Complex64::new(z.re, z.im)
}

fn class_to_c(c: PoleClass) -> SsrPoleClass {
    match c {
        PoleClass::ZeroMode => SsrPoleClass::ZeroMode,
        PoleClass::MarkovianLike => SsrPoleClass::MarkovianLike,
        PoleClass::ExclusivelyNonMarkovian => SsrPoleClass::ExclusivelyNonMarkovian,
    }
}

fn pole_to_c(p: &Pole) -> SsrPole {
    SsrPole {
        delta: to_c(p.delta),
        gamma: to_c(p.gamma),
        residual: p.residual,
        multiplicity: p.multiplicity,
        classification: class_to_c(p.classification),
    }
}

fn mode_from(mode: i32) -> Option<Mode> {
    match mode {
        0 => Some(Mode::General),
        1 => Some(Mode::SrCondition),
        2 => Some(Mode::Markovian),
        _ => None,
    }
}

/// Create a chain. `mode` is one of the [`SsrMode`] values.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ssr_chain_new(
    n_qubits: usize,
    omega: f64,
    separation: f64,
    sr_index: i64,
    mode: i32,
    out: *mut *mut SsrChain,
) -> SsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let mode =
            mode_from(mode).ok_or((SsrStatus::InvalidArgument, format!("unknown mode {mode}")))?;
        let params =
            ChainParams::new(n_qubits, omega, separation, sr_index, mode).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SsrChain { params }));
        Ok(())
    })
}

/// Release a chain. Null is ignored.
///
/// # Safety
/// `chain` must be null or a pointer returned by [`ssr_chain_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn ssr_chain_free(chain: *mut SsrChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// The characteristic function `Δ^N (T^N)₁₁` at complex detuning `delta`.
///
/// # Safety
/// `chain` must be a live chain handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ssr_charfn_eval(
    chain: *const SsrChain,
    delta: SsrComplex,
    out: *mut SsrComplex,
) -> SsrStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null_err("chain"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let f = CharFn::undeflated(chain.params).map_err(lib_err)?;
        *out = to_c(f.eval(from_c(delta)));
        Ok(())
    })
}

/// Transmission and reflection amplitudes at real detuning `delta`.
///
/// # Safety
/// `chain` must be a live chain handle; `t` and `r` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ssr_scattering(
    chain: *const SsrChain,
    delta: f64,
    t: *mut SsrComplex,
    r: *mut SsrComplex,
) -> SsrStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null_err("chain"))?;
        if t.is_null() || r.is_null() {
            return Err(null_err("t or r"));
        }
        let s = scattering(delta, &chain.params).map_err(lib_err)?;
        *t = to_c(s.t);
        *r = to_c(s.r);
        Ok(())
    })
}

/// Collective poles inside `window` (null for the default window).
///
/// # Safety
/// `chain` must be a live chain handle, `window` null or readable, and
/// `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ssr_find_poles(
    chain: *const SsrChain,
    window: *const SsrWindow,
    out: *mut *mut SsrPoleList,
) -> SsrStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null_err("chain"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let w = match window.as_ref() {
            Some(w) => {
                SearchWindow::new(w.re_min, w.re_max, w.im_min, w.im_max).map_err(lib_err)?
            }
            None => SearchWindow::default_for(chain.params.n_qubits),
        };
        let search = find_collective_rates(&chain.params, &w).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SsrPoleList { search }));
        Ok(())
    })
}

/// Number of poles in the list (0 for null).
///
/// # Safety
/// `list` must be null or a live pole list.
#[no_mangle]
pub unsafe extern "C" fn ssr_pole_list_len(list: *const SsrPoleList) -> usize {
    list.as_ref().map_or(0, |l| l.search.poles.len())
}

/// Number of seeds whose refinement failed during the search.
///
/// # Safety
/// `list` must be null or a live pole list.
#[no_mangle]
pub unsafe extern "C" fn ssr_pole_list_failures(list: *const SsrPoleList) -> usize {
    list.as_ref().map_or(0, |l| l.search.failures.len())
}

/// Copy pole `index` (sorted by `|Δ|`) into `out`.
///
/// # Safety
/// `list` must be a live pole list and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ssr_pole_list_get(
    list: *const SsrPoleList,
    index: usize,
    out: *mut SsrPole,
) -> SsrStatus {
    guard(|| {
        let list = list.as_ref().ok_or_else(|| null_err("list"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let p = list.search.poles.get(index).ok_or((
            SsrStatus::IndexOutOfRange,
            format!(
                "index {index} out of range for {} poles",
                list.search.poles.len()
            ),
        ))?;
        *out = pole_to_c(p);
        Ok(())
    })
}

/// Release a pole list. Null is ignored.
///
/// # Safety
/// `list` must be null or a pointer from [`ssr_find_poles`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ssr_pole_list_free(list: *mut SsrPoleList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Maximize the superradiant rate over the separation for `n_qubits`.
/// `bracket` is null for the default bracket, or points to `{lo, hi}`.
///
/// # Safety
/// `bracket` must be null or readable for two doubles; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ssr_maximize(
    n_qubits: usize,
    bracket: *const f64,
    out: *mut SsrMaximum,
) -> SsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let bracket = if bracket.is_null() {
            None
        } else {
            Some((*bracket, *bracket.add(1)))
        };
        let r = maximize_over_separation(n_qubits, bracket).map_err(lib_err)?;
        *out = SsrMaximum {
            n_qubits: r.n_qubits,
            l_critical: r.l_critical,
            gamma_ssr: to_c(r.gamma_ssr),
            coalescence: r.coalescence,
            evaluations: r.evaluations,
            residual: r.residual,
        };
        Ok(())
    })
}

/// The asymptotic critical pair `(α_c, β_c)`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ssr_critical_pair(out: *mut SsrCriticalPair) -> SsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let cp = critical_pair();
        *out = SsrCriticalPair {
            alpha_c: cp.alpha_c,
            beta_c: cp.beta_c,
            tau_c: cp.tau_c,
            residual: cp.residual,
        };
        Ok(())
    })
}

/// `g(α, β)` of the large-N asymptotics.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ssr_g_eval(alpha: f64, beta: f64, out: *mut f64) -> SsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = g_eval(alpha, beta).map_err(lib_err)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ssr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ssr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
