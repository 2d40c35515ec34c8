//! C ABI over `elliptic-nf`.
//!
//! Objects are opaque handles created by `enf_*_new`/`enf_normalize` and released with
//! the matching `*_free`. Every fallible call returns an [`EnfStatus`]; the message of
//! the last failure on the calling thread is available from [`enf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use elliptic_nf::cli::parse_gauge;
use elliptic_nf::maps::{Family, FoliationMap, MapDescription, Multiplier};
use elliptic_nf::normalizer::{solve_homological, verify_conjugacy, Gauge, Normalization};
use elliptic_nf::precision::Precision;
use elliptic_nf::Error;
use num_complex::Complex64;
use rug::Float;

/// Status codes; one per library module plus argument and panic failures.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Series = 3,
    Maps = 4,
    Normalizer = 5,
    Transforms = 6,
    Dynamics = 7,
    Diagnostics = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

/// Closed-form families.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnfFamily {
    A = 0,
    B = 1,
    C = 2,
}

/// Foliation-preserving map.
pub struct EnfMap {
    inner: FoliationMap,
}

/// Special normalization of a map.
pub struct EnfNormalization {
    inner: Normalization,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EnfStatus {
    match e.module() {
        "series" => EnfStatus::Series,
        "maps" => EnfStatus::Maps,
        "normalizer" => EnfStatus::Normalizer,
        "transforms" => EnfStatus::Transforms,
        "dynamics" => EnfStatus::Dynamics,
        "diagnostics" => EnfStatus::Diagnostics,
        _ => match e {
            Error::Io(_) => EnfStatus::Io,
            _ => EnfStatus::Config,
        },
    }
}

fn fail(status: EnfStatus, msg: impl Into<String>) -> EnfStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), EnfStatus>) -> EnfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EnfStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(EnfStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: elliptic_nf::Result<T>) -> Result<T, EnfStatus> {
    r.map_err(|e| fail(status_of(&e), format!("{}: {e}", e.code())))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, EnfStatus> {
    if s.is_null() {
        return Err(fail(EnfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(EnfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), EnfStatus> {
    if p.is_null() {
        Err(fail(EnfStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn precision(bits: u32) -> Result<u32, EnfStatus> {
    lib(Precision::new(bits)).map(|p| p.bits())
}

/// Message of the last failure on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn enf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn enf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Family map with `f(u) = a u^d`; `omega` uses the command-line syntax
/// (`golden`, `quad:p,q,D,r`, `cf:a0,a1,...` or a decimal literal).
///
/// # Safety
/// `omega` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enf_map_family(
    family: EnfFamily,
    omega: *const c_char,
    modulus: f64,
    a: f64,
    d: u32,
    order: u32,
    bits: u32,
    out: *mut *mut EnfMap,
) -> EnfStatus {
    guard(|| {
        non_null(out, "out")?;
        let omega = lib(text(omega, "omega")?.parse())?;
        let bits = precision(bits)?;
        let fam = match family {
            EnfFamily::A => Family::A,
            EnfFamily::B => Family::B,
            EnfFamily::C => Family::C,
        };
        let mult = lib(Multiplier::new(omega, modulus, bits))?;
        let map = lib(FoliationMap::family(fam, mult, Float::with_val(bits, a), d as usize, order as usize))?;
        *out = Box::into_raw(Box::new(EnfMap { inner: map }));
        Ok(())
    })
}

/// Map from a JSON description (the `--map` file format); `order == 0` keeps its order.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enf_map_from_json(json: *const c_char, order: u32, bits: u32, out: *mut *mut EnfMap) -> EnfStatus {
    guard(|| {
        non_null(out, "out")?;
        let desc: MapDescription = lib(serde_json::from_str(text(json, "json")?).map_err(Error::from))?;
        let bits = precision(bits)?;
        let order = (order > 0).then_some(order as usize);
        let map = lib(desc.build(order, bits))?;
        *out = Box::into_raw(Box::new(EnfMap { inner: map }));
        Ok(())
    })
}

/// # Safety
/// `map` must come from an `enf_map_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn enf_map_free(map: *mut EnfMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// `F(z)` in double precision.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn enf_map_apply(map: *const EnfMap, re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> EnfStatus {
    guard(|| {
        non_null(map, "map")?;
        non_null(out_re, "out_re")?;
        non_null(out_im, "out_im")?;
        let w = (*map).inner.apply(Complex64::new(re, im));
        *out_re = w.re;
        *out_im = w.im;
        Ok(())
    })
}

/// Solves the homological equation through `order`. `gauge` may be null (basic for
/// modulus 1, strong contraction otherwise) or one of the command-line gauge strings.
///
/// # Safety
/// `map` and `out` must be valid; `gauge` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn enf_normalize(
    map: *const EnfMap,
    order: u32,
    gauge: *const c_char,
    out: *mut *mut EnfNormalization,
) -> EnfStatus {
    guard(|| {
        non_null(map, "map")?;
        non_null(out, "out")?;
        let map = &(*map).inner;
        let gauge = if gauge.is_null() {
            if map.multiplier.is_unimodular() {
                Gauge::Basic
            } else {
                Gauge::StrongContraction
            }
        } else {
            lib(parse_gauge(text(gauge, "gauge")?))?
        };
        let norm = lib(solve_homological(map, order as usize, gauge))?;
        *out = Box::into_raw(Box::new(EnfNormalization { inner: norm }));
        Ok(())
    })
}

/// # Safety
/// `norm` must come from [`enf_normalize`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn enf_normalization_free(norm: *mut EnfNormalization) {
    if !norm.is_null() {
        drop(Box::from_raw(norm));
    }
}

/// Conjugacy residual certified by the solver.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn enf_normalization_residual(norm: *const EnfNormalization, out: *mut f64) -> EnfStatus {
    guard(|| {
        non_null(norm, "norm")?;
        non_null(out, "out")?;
        *out = (*norm).inner.residual;
        Ok(())
    })
}

/// Torsion coefficient `n_s`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn enf_normalization_torsion(norm: *const EnfNormalization, s: u32, out: *mut f64) -> EnfStatus {
    guard(|| {
        non_null(norm, "norm")?;
        non_null(out, "out")?;
        let n = &(*norm).inner.n;
        if s as usize > n.order() {
            return Err(fail(EnfStatus::InvalidArgument, format!("torsion index {s} beyond order {}", n.order())));
        }
        *out = n.coeff(s as usize).to_f64();
        Ok(())
    })
}

/// Coefficient `phi_pq` of the angular corrector.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn enf_normalization_phi(
    norm: *const EnfNormalization,
    p: u32,
    q: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> EnfStatus {
    guard(|| {
        non_null(norm, "norm")?;
        non_null(out_re, "out_re")?;
        non_null(out_im, "out_im")?;
        let phi = &(*norm).inner.phi;
        if (p + q) as usize > phi.order() {
            return Err(fail(EnfStatus::InvalidArgument, format!("degree {} beyond order {}", p + q, phi.order())));
        }
        let c = phi.coeff(p as usize, q as usize).to_c64();
        *out_re = c.re;
        *out_im = c.im;
        Ok(())
    })
}

/// Re-runs the full-series conjugacy check of `norm` against `map`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn enf_verify(map: *const EnfMap, norm: *const EnfNormalization, out: *mut f64) -> EnfStatus {
    guard(|| {
        non_null(map, "map")?;
        non_null(norm, "norm")?;
        non_null(out, "out")?;
        let n = &(*norm).inner;
        *out = lib(verify_conjugacy(&(*map).inner, &n.phi, &n.n, n.order))?;
        Ok(())
    })
}

/// Normalization as a JSON string; release it with [`enf_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn enf_normalization_json(norm: *const EnfNormalization, out: *mut *mut c_char) -> EnfStatus {
    guard(|| {
        non_null(norm, "norm")?;
        non_null(out, "out")?;
        let text = (*norm).inner.to_json().to_string();
        *out = CString::new(text).map_err(|_| fail(EnfStatus::Panic, "json contains NUL"))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn enf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
