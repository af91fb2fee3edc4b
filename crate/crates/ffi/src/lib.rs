//! C ABI for the haarmoment library.
//!
//! Observables and spectra are opaque handles owned by the caller and freed
//! with the matching `*_free` function. Every fallible call returns an
//! [`HmStatus`]; on failure a message is available from [`hm_last_error`]
//! until the next failing call on the same thread. Matrices are passed as
//! separate row-major real and imaginary arrays of length `d*d`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use haarmoment::closedforms::{self, CoefficientVector};
use haarmoment::functionals::{omega_vector, Observable};
use haarmoment::symgroup::{self, Permutation};
use haarmoment::twirl::Spectrum;
use haarmoment::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NotHermitian = 4,
    DimensionMismatch = 5,
    Capacity = 6,
    Consistency = 7,
    Panic = 8,
}

/// Coefficient families accepted by [`hm_coefficients`] and [`hm_average`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmFamily {
    /// Pure-state average of the uncertainty product.
    PureProduct = 0,
    /// Pure-state average of the Robertson–Schrödinger bound.
    PureBound = 1,
    /// Hilbert–Schmidt average of the uncertainty product.
    HsProduct = 2,
    /// Hilbert–Schmidt average of the Robertson–Schrödinger bound.
    HsBound = 3,
    /// Isospectral average of the uncertainty product; needs a spectrum.
    IsoProduct = 4,
}

/// Opaque Hermitian observable.
pub struct HmObservable(Observable);

/// Opaque probability spectrum.
pub struct HmSpectrum(Spectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HmStatus {
    match e {
        Error::NotHermitian { .. } => HmStatus::NotHermitian,
        Error::DimensionMismatch { .. } => HmStatus::DimensionMismatch,
        Error::Domain { .. } => HmStatus::Domain,
        Error::Capacity { .. } => HmStatus::Capacity,
        Error::Consistency(_) | Error::Evaluation { .. } => HmStatus::Consistency,
        _ => HmStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (HmStatus, String)>) -> HmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HmStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HmStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (HmStatus, String)>;
}

impl<T> IntoFfi<T> for haarmoment::Result<T> {
    fn ffi(self) -> Result<T, (HmStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (HmStatus, String) {
    (HmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (HmStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, (HmStatus, String)> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (HmStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn invalid(message: impl Into<String>) -> (HmStatus, String) {
    (HmStatus::InvalidArgument, message.into())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Creates an observable from row-major `re` and `im` arrays of length `d*d`.
/// The matrix must be Hermitian to within `1e-10`.
///
/// # Safety
/// `re` and `im` must point to `d*d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_observable_new(
    d: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut HmObservable,
) -> HmStatus {
    guard(|| {
        let len = d.checked_mul(d).ok_or_else(|| invalid("dimension overflows"))?;
        let re = slice(re, len, "re")?;
        let im = slice(im, len, "im")?;
        let o = Observable::from_real_imag(d, re, im, 1e-10).ffi()?;
        write_out(out, Box::into_raw(Box::new(HmObservable(o))))
    })
}

/// Creates a named builtin observable: `pauli_x`, `pauli_y`, `pauli_z`,
/// `gell_mann_1` … `gell_mann_8`, or `identity` (of dimension `d`; `d` is
/// ignored otherwise).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_observable_builtin(name: *const c_char, d: usize, out: *mut *mut HmObservable) -> HmStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| invalid("name is not UTF-8"))?;
        let o = match name {
            "pauli_x" => Observable::pauli_x(),
            "pauli_y" => Observable::pauli_y(),
            "pauli_z" => Observable::pauli_z(),
            "identity" if d >= 1 => Observable::identity(d),
            _ => match name.strip_prefix("gell_mann_").and_then(|j| j.parse().ok()) {
                Some(j) => Observable::gell_mann(j).ffi()?,
                None => return Err(invalid(format!("unknown builtin observable `{name}`"))),
            },
        };
        write_out(out, Box::into_raw(Box::new(HmObservable(o))))
    })
}

/// Dimension of an observable, or 0 for NULL.
///
/// # Safety
/// `obs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hm_observable_dimension(obs: *const HmObservable) -> usize {
    obs.as_ref().map_or(0, |o| o.0.dimension())
}

/// Releases an observable. NULL is ignored.
///
/// # Safety
/// `obs` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hm_observable_free(obs: *mut HmObservable) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Creates a spectrum from `len` nonnegative values summing to one.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_spectrum_new(values: *const f64, len: usize, out: *mut *mut HmSpectrum) -> HmStatus {
    guard(|| {
        let values = slice(values, len, "values")?;
        let s = Spectrum::new(values.to_vec()).ffi()?;
        write_out(out, Box::into_raw(Box::new(HmSpectrum(s))))
    })
}

/// Releases a spectrum. NULL is ignored.
///
/// # Safety
/// `spectrum` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hm_spectrum_free(spectrum: *mut HmSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Writes the eight trace functionals `Ω_1..Ω_8` of `(a, b)` into `out[0..8]`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must hold 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn hm_omega_vector(a: *const HmObservable, b: *const HmObservable, out: *mut f64) -> HmStatus {
    guard(|| {
        let omega = omega_vector(&handle(a, "a")?.0, &handle(b, "b")?.0).ffi()?;
        write_out(out.cast::<[f64; 8]>(), omega.values)
    })
}

unsafe fn family_vector(family: HmFamily, d: usize, spectrum: *const HmSpectrum) -> Result<CoefficientVector, (HmStatus, String)> {
    match family {
        HmFamily::PureProduct => closedforms::pure_coefficients(d).map(|(u, _)| u).ffi(),
        HmFamily::PureBound => closedforms::pure_coefficients(d).map(|(_, l)| l).ffi(),
        HmFamily::HsProduct => closedforms::hs_product_coefficients(d).ffi(),
        HmFamily::HsBound => closedforms::hs_bound_coefficients(d).ffi(),
        HmFamily::IsoProduct => {
            let s = &handle(spectrum, "spectrum")?.0;
            if s.dimension() != d {
                return Err((HmStatus::DimensionMismatch, format!("spectrum has dimension {}, expected {d}", s.dimension())));
            }
            closedforms::omega_iso(s).ffi()
        }
    }
}

/// Writes the coefficient vector of `family` at dimension `d` into
/// `out[0..8]`. `spectrum` is required for `HM_FAMILY_ISO_PRODUCT` and
/// ignored otherwise.
///
/// # Safety
/// `spectrum` must be NULL or a live handle; `out` must hold 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn hm_coefficients(family: HmFamily, d: usize, spectrum: *const HmSpectrum, out: *mut f64) -> HmStatus {
    guard(|| {
        let c = family_vector(family, d, spectrum)?;
        write_out(out.cast::<[f64; 8]>(), c.values)
    })
}

/// Exact ensemble average `Σ_j c_j Ω_j(a, b)` for `family`.
///
/// # Safety
/// `a`, `b` must be live handles, `spectrum` NULL or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_average(
    family: HmFamily,
    a: *const HmObservable,
    b: *const HmObservable,
    spectrum: *const HmSpectrum,
    out: *mut f64,
) -> HmStatus {
    guard(|| {
        let (a, b) = (&handle(a, "a")?.0, &handle(b, "b")?.0);
        let c = family_vector(family, a.dimension(), spectrum)?;
        let omega = omega_vector(a, b).ffi()?;
        write_out(out, closedforms::assemble_average(&c, &omega).ffi()?)
    })
}

/// Hilbert–Schmidt averages `(⟨t₂⟩, ⟨t₃⟩, ⟨t₄⟩, ⟨t₂²⟩)` with `t_p = Tr ρ^p`,
/// written to `out[0..4]`.
///
/// # Safety
/// `out` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn hm_hs_moments(d: usize, out: *mut f64) -> HmStatus {
    guard(|| {
        let m = closedforms::hs_moments(d).ffi()?;
        write_out(out.cast::<[f64; 4]>(), m.to_f64())
    })
}

/// Weingarten function `Wg(π, d)` for the permutation of `{0..k-1}` given by
/// its images, `k ≤ 4`.
///
/// # Safety
/// `images` must point to `k` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_weingarten(images: *const usize, k: usize, d: usize, out: *mut f64) -> HmStatus {
    guard(|| {
        let images = slice(images, k, "images")?;
        let pi = Permutation::from_images(images.to_vec()).ffi()?;
        let w = symgroup::weingarten(&pi, d).ffi()?;
        write_out(out, haarmoment::exact::to_f64(&w))
    })
}
