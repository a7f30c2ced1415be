//! C ABI for `ptwell`.
//!
//! Potentials are opaque handles created from JSON and released with
//! [`ptwell_potential_free`]. Every fallible call returns a [`PtwellStatus`];
//! on failure the thread-local message from [`ptwell_last_error_message`]
//! names the error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ptwell::action::{action_integral, DEFAULT_NODES};
use ptwell::bs::solve_bs;
use ptwell::potential::{parse_spec, PotentialSpec, Window};
use ptwell::shooting::{wronskian, zero_count_winding, default_box_l};
use ptwell::turning::find_turning_pair;
use ptwell::{Complex64, Error};

/// Opaque potential handle.
pub struct PtwellPotential {
    spec: PotentialSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PtwellComplex {
    pub re: f64,
    pub im: f64,
}

impl From<PtwellComplex> for Complex64 {
    fn from(z: PtwellComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for PtwellComplex {
    fn from(z: Complex64) -> Self {
        PtwellComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtwellStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SpecFormat = 3,
    /// The potential violates a standing hypothesis (parity, single well, ...).
    HypothesisViolation = 4,
    /// A numerical routine failed; see the last error message.
    NumericalFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> PtwellStatus {
    match err {
        Error::InvalidArgument(_) => PtwellStatus::InvalidArgument,
        Error::SpecFormat(_) => PtwellStatus::SpecFormat,
        e if e.is_hypothesis_violation() => PtwellStatus::HypothesisViolation,
        _ => PtwellStatus::NumericalFailure,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard<F>(f: F) -> PtwellStatus
where
    F: FnOnce() -> Result<(), (PtwellStatus, String)>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtwellStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside ptwell".into());
            PtwellStatus::Panic
        }
    }
}

fn module(err: Error) -> (PtwellStatus, String) {
    (status_of(&err), format!("{}: {}", err.name(), err))
}

fn null(what: &str) -> (PtwellStatus, String) {
    (PtwellStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a handle from [`ptwell_potential_from_json`].
unsafe fn potential<'a>(p: *const PtwellPotential) -> Result<&'a PotentialSpec, (PtwellStatus, String)> {
    p.as_ref().map(|h| &h.spec).ok_or_else(|| null("potential"))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `ptwell_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ptwell_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a potential from NUL-terminated JSON
/// (`{"v0":[[c,p],...],"w":[[c,p],...],"e0":x,"window":{"re":[a,b],"im":[c,d]}}`).
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ptwell_potential_from_json(json: *const c_char, out: *mut *mut PtwellPotential) -> PtwellStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (PtwellStatus::SpecFormat, "SpecFormat: json is not UTF-8".to_string()))?;
        let spec = parse_spec(text).map_err(module)?;
        *out = Box::into_raw(Box::new(PtwellPotential { spec }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`ptwell_potential_from_json`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ptwell_potential_free(p: *mut PtwellPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `V_eps(z) = V0(z) + i eps W(z)`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ptwell_potential_eval(
    p: *const PtwellPotential,
    z: PtwellComplex,
    eps: PtwellComplex,
    out: *mut PtwellComplex,
) -> PtwellStatus {
    guard(|| {
        let spec = potential(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = spec.eval(z.into(), Complex64::from(eps)).into();
        Ok(())
    })
}

/// Turning points `alpha`, `beta` continued from the real well.
///
/// # Safety
/// `p` must be a live handle; `alpha` and `beta` writable.
#[no_mangle]
pub unsafe extern "C" fn ptwell_turning_pair(
    p: *const PtwellPotential,
    energy: PtwellComplex,
    eps: PtwellComplex,
    alpha: *mut PtwellComplex,
    beta: *mut PtwellComplex,
) -> PtwellStatus {
    guard(|| {
        let spec = potential(p)?;
        let alpha = alpha.as_mut().ok_or_else(|| null("alpha"))?;
        let beta = beta.as_mut().ok_or_else(|| null("beta"))?;
        let tp = find_turning_pair(spec, energy.into(), Complex64::from(eps), None).map_err(module)?;
        *alpha = tp.alpha.into();
        *beta = tp.beta.into();
        Ok(())
    })
}

/// Action `I(E, eps)` and period `T(E, eps)`; either output may be null.
///
/// # Safety
/// `p` must be a live handle; non-null outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ptwell_action(
    p: *const PtwellPotential,
    energy: PtwellComplex,
    eps: PtwellComplex,
    action: *mut PtwellComplex,
    period: *mut PtwellComplex,
) -> PtwellStatus {
    guard(|| {
        let spec = potential(p)?;
        let tp = find_turning_pair(spec, energy.into(), Complex64::from(eps), None).map_err(module)?;
        let value = action_integral(spec, &tp, DEFAULT_NODES).map_err(module)?;
        if let Some(a) = action.as_mut() {
            *a = value.action.into();
        }
        if let Some(t) = period.as_mut() {
            *t = value.period.into();
        }
        Ok(())
    })
}

/// Bohr–Sommerfeld eigenvalues in `[lo, hi]`. Writes up to `capacity`
/// values to `out` and the total number found to `count`; returns
/// `BufferTooSmall` when `count > capacity`.
///
/// # Safety
/// `p` must be a live handle, `out` valid for `capacity` writes (may be
/// null when `capacity` is 0) and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ptwell_solve_bs(
    p: *const PtwellPotential,
    eps: f64,
    h: f64,
    lo: f64,
    hi: f64,
    out: *mut PtwellComplex,
    capacity: usize,
    count: *mut usize,
) -> PtwellStatus {
    guard(|| {
        let spec = potential(p)?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        if capacity > 0 && out.is_null() {
            return Err(null("out"));
        }
        if !(h > 0.0) {
            return Err((PtwellStatus::InvalidArgument, "InvalidArgument: h must be positive".into()));
        }
        let records = solve_bs(spec, eps, h, (lo, hi)).map_err(module)?;
        *count = records.len();
        for (i, r) in records.iter().take(capacity).enumerate() {
            *out.add(i) = r.e_bs.into();
        }
        if records.len() > capacity {
            return Err((PtwellStatus::BufferTooSmall, format!("need {} slots, have {capacity}", records.len())));
        }
        Ok(())
    })
}

/// Relative PT-paired Wronskian at `energy`; `box_l <= 0` selects the
/// default box.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ptwell_wronskian(
    p: *const PtwellPotential,
    energy: PtwellComplex,
    eps: f64,
    h: f64,
    box_l: f64,
    out: *mut PtwellComplex,
) -> PtwellStatus {
    guard(|| {
        let spec = potential(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let box_l = if box_l > 0.0 { box_l } else { default_box_l(spec, h).map_err(module)? };
        let w = wronskian(spec, energy.into(), eps, h, box_l).map_err(module)?;
        *out = w.relative().into();
        Ok(())
    })
}

/// Number of eigenvalues in the rectangle by the argument principle.
///
/// # Safety
/// `p` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ptwell_zero_count(
    p: *const PtwellPotential,
    eps: f64,
    h: f64,
    re_lo: f64,
    re_hi: f64,
    im_lo: f64,
    im_hi: f64,
    n_boundary: usize,
    count: *mut i64,
) -> PtwellStatus {
    guard(|| {
        let spec = potential(p)?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        let rect = Window::new([re_lo, re_hi], [im_lo, im_hi]);
        *count = zero_count_winding(spec, eps, h, rect, n_boundary).map_err(module)?;
        Ok(())
    })
}
