//! C ABI over `wpduality`.
//!
//! Every fallible call returns a [`WpdStatus`]; on failure the message is
//! available from [`wpd_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wpduality::capacity::{duality_check, CapacityReport};
use wpduality::counts::{axis_totals, simulate_counts, CountRecord, NoiseModel};
use wpduality::optics::{w_phi, Convention};
use wpduality::qstate::{density_from_pure, fidelity, from_stokes, DensityMatrix, PureState, StokesVector};
use wpduality::tomography::{estimate_capacities, mle_reconstruct, MleOptions};
use wpduality::{Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidState = 2,
    InvalidArgument = 3,
    EstimationFailed = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WpdConvention {
    Appendix = 0,
    MainText = 1,
}

impl From<WpdConvention> for Convention {
    fn from(c: WpdConvention) -> Self {
        match c {
            WpdConvention::Appendix => Convention::Appendix,
            WpdConvention::MainText => Convention::MainText,
        }
    }
}

/// Capacities in units of `E`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WpdCapacities {
    pub c_p: f64,
    pub c_d: f64,
    pub c_v: f64,
    pub equality_residual: f64,
    pub inequality_ok: bool,
}

impl From<CapacityReport> for WpdCapacities {
    fn from(r: CapacityReport) -> Self {
        WpdCapacities {
            c_p: r.c_p,
            c_d: r.c_d,
            c_v: r.c_v,
            equality_residual: r.equality_residual,
            inequality_ok: r.inequality_ok,
        }
    }
}

/// A validated qubit density matrix.
pub struct WpdDensity(DensityMatrix);

/// Simulated or loaded coincidence records.
pub struct WpdCounts(Vec<CountRecord>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WpdStatus {
    match err {
        Error::Normalization { .. } | Error::NonFinite | Error::BlochViolation { .. } | Error::InvalidDensity(_) => {
            WpdStatus::InvalidState
        }
        Error::EmptyRecord { .. } | Error::MissingAxis(_) | Error::DegenerateParams | Error::AxisMismatch { .. } => {
            WpdStatus::EstimationFailed
        }
        _ => WpdStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (WpdStatus, String)>) -> WpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WpdStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WpdStatus::Panic
        }
    }
}

fn lib<T>(r: wpduality::Result<T>) -> Result<T, (WpdStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (WpdStatus, String) {
    (WpdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WpdStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (WpdStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn wpd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn wpd_density_from_pure(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    out: *mut *mut WpdDensity,
) -> WpdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let psi = lib(PureState::new(C64::new(alpha_re, alpha_im), C64::new(beta_re, beta_im)))?;
        put(out, Box::into_raw(Box::new(WpdDensity(density_from_pure(&psi)))), "out")
    })
}

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn wpd_density_from_stokes(s1: f64, s2: f64, s3: f64, out: *mut *mut WpdDensity) -> WpdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let rho = lib(from_stokes(&StokesVector::new(s1, s2, s3)))?;
        put(out, Box::into_raw(Box::new(WpdDensity(rho))), "out")
    })
}

/// # Safety
/// `rho` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wpd_density_free(rho: *mut WpdDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Writes `(S1, S2, S3)` to `out[0..3]`.
///
/// # Safety
/// `rho` must be a live handle and `out` must point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn wpd_density_stokes(rho: *const WpdDensity, out: *mut f64) -> WpdStatus {
    guard(|| {
        let rho = get(rho, "rho")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = rho.0.stokes().as_array();
        ptr::copy_nonoverlapping(s.as_ptr(), out, 3);
        Ok(())
    })
}

/// Writes the matrix row-major as `re, im` pairs to `out[0..8]`.
///
/// # Safety
/// `rho` must be a live handle and `out` must point to eight doubles.
#[no_mangle]
pub unsafe extern "C" fn wpd_density_entries(rho: *const WpdDensity, out: *mut f64) -> WpdStatus {
    guard(|| {
        let rho = get(rho, "rho")?;
        if out.is_null() {
            return Err(null("out"));
        }
        for (k, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let z = rho.0.entry(i, j);
            out.add(2 * k).write(z.re);
            out.add(2 * k + 1).write(z.im);
        }
        Ok(())
    })
}

/// # Safety
/// `rho` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wpd_duality_check(
    rho: *const WpdDensity,
    convention: WpdConvention,
    out: *mut WpdCapacities,
) -> WpdStatus {
    guard(|| {
        let rho = get(rho, "rho")?;
        put(out, duality_check(&rho.0, &convention.into()).into(), "out")
    })
}

/// Normalised mean energy `W_phi / E` after the wave unitary.
///
/// # Safety
/// `rho` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wpd_w_phi(
    rho: *const WpdDensity,
    phi: f64,
    convention: WpdConvention,
    out: *mut f64,
) -> WpdStatus {
    guard(|| {
        let rho = get(rho, "rho")?;
        if !phi.is_finite() {
            return Err((WpdStatus::InvalidArgument, "phi is not finite".into()));
        }
        put(out, w_phi(&rho.0, phi, &convention.into()), "out")
    })
}

/// # Safety
/// Both handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wpd_fidelity(a: *const WpdDensity, b: *const WpdDensity, out: *mut f64) -> WpdStatus {
    guard(|| {
        let (a, b) = (get(a, "a")?, get(b, "b")?);
        put(out, fidelity(&a.0, &b.0), "out")
    })
}

/// Simulates Z, X and Y coincidence counts, `counts_per_axis` on average per
/// axis split over `repeats` records.
///
/// # Safety
/// `rho` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wpd_simulate_counts(
    rho: *const WpdDensity,
    counts_per_axis: f64,
    repeats: u32,
    seed: u64,
    out: *mut *mut WpdCounts,
) -> WpdStatus {
    guard(|| {
        let rho = get(rho, "rho")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let noise = NoiseModel::with_counts_per_axis(counts_per_axis, repeats, seed);
        let records = lib(simulate_counts(&rho.0, &noise))?;
        put(out, Box::into_raw(Box::new(WpdCounts(records))), "out")
    })
}

/// # Safety
/// `counts` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wpd_counts_free(counts: *mut WpdCounts) {
    if !counts.is_null() {
        drop(Box::from_raw(counts));
    }
}

/// Pooled tallies as `n0, n1` pairs for Z, X, Y in `out[0..6]`.
///
/// # Safety
/// `counts` must be a live handle and `out` must point to six integers.
#[no_mangle]
pub unsafe extern "C" fn wpd_counts_totals(counts: *const WpdCounts, out: *mut u64) -> WpdStatus {
    guard(|| {
        let counts = get(counts, "counts")?;
        if out.is_null() {
            return Err(null("out"));
        }
        for (k, (n0, n1)) in axis_totals(&counts.0).into_iter().enumerate() {
            out.add(2 * k).write(n0);
            out.add(2 * k + 1).write(n1);
        }
        Ok(())
    })
}

/// Maximum-likelihood state. `converged` may be null.
///
/// # Safety
/// `counts` must be a live handle, `out` valid for writes, `converged` null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wpd_mle_reconstruct(
    counts: *const WpdCounts,
    seed: u64,
    out: *mut *mut WpdDensity,
    converged: *mut bool,
) -> WpdStatus {
    guard(|| {
        let counts = get(counts, "counts")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = MleOptions {
            seed,
            ..MleOptions::default()
        };
        let res = lib(mle_reconstruct(&counts.0, &opts))?;
        if !converged.is_null() {
            converged.write(res.converged);
        }
        put(out, Box::into_raw(Box::new(WpdDensity(res.rho_hat))), "out")
    })
}

/// Capacities estimated from counts: `C_p` from the MLE state, `C_d` and
/// `C_v` from raw frequencies.
///
/// # Safety
/// `counts` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wpd_estimate_capacities(
    counts: *const WpdCounts,
    convention: WpdConvention,
    out: *mut WpdCapacities,
) -> WpdStatus {
    guard(|| {
        let counts = get(counts, "counts")?;
        let (r, _) = lib(estimate_capacities(&counts.0, &convention.into(), &MleOptions::default()))?;
        put(out, r.into(), "out")
    })
}
