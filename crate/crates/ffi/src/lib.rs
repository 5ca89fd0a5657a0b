//! C ABI over `radlevy`.
//!
//! Models are opaque handles created by [`rl_model_from_json`] or
//! [`rl_model_from_catalog`] and released with [`rl_model_free`]. Every other
//! call returns an [`RlStatus`] and writes its result through an out pointer.
//! On failure the message is kept per thread and read back with
//! [`rl_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use radlevy::bernstein::{default_probe, hartman_wintner, HwConfig};
use radlevy::{
    BernsteinSpec, Convention, Error, HwVerdict, LevyDensity, QuadratureConfig, Route, SubordinatorModel,
    TransitionDensity,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    Unsupported = 4,
    NumericFailure = 5,
    Overflow = 6,
    Parse = 7,
    Panic = 8,
    Other = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlRoute {
    Mixture = 0,
    Fourier = 1,
    ClosedForm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlConvention {
    Default = 0,
    PaperLiteral = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlHwVerdict {
    Holds = 0,
    Fails = 1,
    Inconclusive = 2,
}

/// Opaque subordinator model.
pub struct RlModel {
    model: SubordinatorModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::InvalidArgument { .. } | Error::Config(_) | Error::DimensionMismatch(_) | Error::Domain(_) => {
            RlStatus::InvalidArgument
        }
        Error::Precondition(_) => RlStatus::Precondition,
        Error::Unsupported(_) => RlStatus::Unsupported,
        Error::NumericFailure { .. } | Error::Underflow(_) => RlStatus::NumericFailure,
        Error::Overflow(_) => RlStatus::Overflow,
        Error::Json(_) => RlStatus::Parse,
        _ => RlStatus::Other,
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard<F: FnOnce() -> Result<(), (RlStatus, String)>>(f: F) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RlStatus::Panic
        }
    }
}

fn lift<T>(r: radlevy::Result<T>) -> Result<T, (RlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RlStatus, String) {
    (RlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn model_ref<'a>(m: *const RlModel) -> Result<&'a SubordinatorModel, (RlStatus, String)> {
    unsafe { m.as_ref() }.map(|m| &m.model).ok_or_else(|| null("model"))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (RlStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (RlStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| (RlStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

fn dimension(k: u32) -> Result<usize, (RlStatus, String)> {
    if k == 0 {
        Err((RlStatus::InvalidArgument, "`k` must be at least 1".into()))
    } else {
        Ok(k as usize)
    }
}

fn convention(c: RlConvention) -> Convention {
    match c {
        RlConvention::Default => Convention::Default,
        RlConvention::PaperLiteral => Convention::PaperLiteral,
    }
}

fn route(r: RlRoute) -> Route {
    match r {
        RlRoute::Mixture => Route::Mixture,
        RlRoute::Fourier => Route::Fourier,
        RlRoute::ClosedForm => Route::ClosedForm,
    }
}

fn boxed(model: SubordinatorModel) -> *mut RlModel {
    Box::into_raw(Box::new(RlModel { model }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a Bernstein spec from JSON, e.g.
/// `{"drift": 0, "levy_measure": {"family": "gamma_jump", "shape": 1, "rate": 1}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_model_from_json(json: *const c_char, out: *mut *mut RlModel) -> RlStatus {
    guard(|| {
        let text = unsafe { read_str(json, "json") }?;
        let spec: BernsteinSpec = lift(serde_json::from_str(text).map_err(Error::from))?;
        unsafe { write_out(out, boxed(SubordinatorModel::new(spec))) }
    })
}

/// Looks up a catalog model: `drift`, `stable12`, `gamma`, `ig` or `cp`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_model_from_catalog(name: *const c_char, out: *mut *mut RlModel) -> RlStatus {
    guard(|| {
        let name = unsafe { read_str(name, "name") }?;
        let model = lift(SubordinatorModel::from_catalog(name))?;
        unsafe { write_out(out, boxed(model)) }
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rl_model_free(model: *mut RlModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// The Bernstein function `f(u)`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_eval_f(model: *const RlModel, u: f64, out: *mut f64) -> RlStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        let v = lift(m.spec().eval_f(u))?;
        unsafe { write_out(out, v) }
    })
}

/// Rate `f(∞)` of the atom at 0, infinite when there is none.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_atom_rate(model: *const RlModel, out: *mut f64) -> RlStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        unsafe { write_out(out, m.atom_rate()) }
    })
}

/// Radial transition density `p_t^k(r)` at `n` radii, plus the weight of the
/// atom at the origin.
///
/// # Safety
/// `radii` and `values` must hold `n` doubles; `atom_weight` may be null.
#[no_mangle]
pub unsafe extern "C" fn rl_transition_density(
    model: *const RlModel,
    k: u32,
    t: f64,
    route_: RlRoute,
    convention_: RlConvention,
    radii: *const f64,
    n: usize,
    values: *mut f64,
    atom_weight: *mut f64,
) -> RlStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if n > 0 && (radii.is_null() || values.is_null()) {
            return Err(null("radii/values"));
        }
        let td = lift(TransitionDensity::compute(
            m,
            dimension(k)?,
            t,
            route(route_),
            convention(convention_),
            &QuadratureConfig::default(),
        ))?;
        let mut buf = Vec::with_capacity(n);
        for i in 0..n {
            buf.push(lift(td.value(unsafe { *radii.add(i) }))?);
        }
        if n > 0 {
            unsafe { ptr::copy_nonoverlapping(buf.as_ptr(), values, n) };
        }
        if !atom_weight.is_null() {
            unsafe { atom_weight.write(td.atom_weight()) };
        }
        Ok(())
    })
}

/// Radial density of the Lévy measure of the subordinated process at `n` radii.
///
/// # Safety
/// `radii` and `values` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_levy_density(
    model: *const RlModel,
    k: u32,
    convention_: RlConvention,
    radii: *const f64,
    n: usize,
    values: *mut f64,
) -> RlStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if n > 0 && (radii.is_null() || values.is_null()) {
            return Err(null("radii/values"));
        }
        let ld = lift(LevyDensity::compute(
            m,
            dimension(k)?,
            convention(convention_),
            &QuadratureConfig::default(),
        ))?;
        let mut buf = Vec::with_capacity(n);
        for i in 0..n {
            buf.push(lift(ld.value(unsafe { *radii.add(i) }))?);
        }
        if n > 0 {
            unsafe { ptr::copy_nonoverlapping(buf.as_ptr(), values, n) };
        }
        Ok(())
    })
}

/// `E S_t^{-κ}`, infinite when it diverges.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_neg_moment(model: *const RlModel, kappa: f64, t: f64, out: *mut f64) -> RlStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        let nm = lift(m.neg_moment(kappa, t, &QuadratureConfig::default()))?;
        unsafe { write_out(out, nm.value) }
    })
}

/// Hartman–Wintner verdict on the default probe.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_hartman_wintner(model: *const RlModel, out: *mut RlHwVerdict) -> RlStatus {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        let r = lift(hartman_wintner(m.spec(), &default_probe(), &HwConfig::default()))?;
        let v = match r.verdict {
            HwVerdict::Holds => RlHwVerdict::Holds,
            HwVerdict::Fails => RlHwVerdict::Fails,
            HwVerdict::Inconclusive => RlHwVerdict::Inconclusive,
        };
        unsafe { write_out(out, v) }
    })
}
