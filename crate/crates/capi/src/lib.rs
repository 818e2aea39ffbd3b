//! C ABI for the streamflow library.
//!
//! Handles (`SfCurve`, `SfSpline`, `SfSolution`) are opaque: they are
//! created by `sf_*` constructors, queried through accessor functions and
//! released with the matching `sf_*_free`. Every fallible call returns an
//! [`SfStatus`]; on failure a thread-local message is retained and can be
//! fetched with [`sf_last_error_message`]. The C header is generated into
//! `include/streamflow.h` at build time.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use streamflow::geometry::{make_helix, make_lobe, make_tooth, PolylineSample, StreamlineCurve};
use streamflow::hermite::HermiteSpline;
use streamflow::ode::{
    chain_solve, gear_pump_ode, integrate, FluidProperties, InitialConditions, InverseMapMode,
    Method, OdeSolution, PressureModel, SolverConfig,
};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments failed validation (domains, dimensions, parameters).
    InvalidArgument = 2,
    /// The computation failed numerically (singularity guard, Newton, caps).
    Numerical = 3,
    /// An internal invariant was violated.
    Internal = 4,
}

/// Integration scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfMethod {
    Rk4 = 0,
    AdamsMoulton2 = 1,
    Bdf2 = 2,
}

impl From<SfMethod> for Method {
    fn from(m: SfMethod) -> Self {
        match m {
            SfMethod::Rk4 => Method::Rk4,
            SfMethod::AdamsMoulton2 => Method::AdamsMoulton2,
            SfMethod::Bdf2 => Method::Bdf2,
        }
    }
}

/// Inverse-map convention selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfConvention {
    Pseudoinverse = 0,
    Componentwise = 1,
}

impl From<SfConvention> for InverseMapMode {
    fn from(c: SfConvention) -> Self {
        match c {
            SfConvention::Pseudoinverse => InverseMapMode::Pseudoinverse,
            SfConvention::Componentwise => InverseMapMode::Componentwise,
        }
    }
}

/// Opaque parametric curve handle.
pub struct SfCurve {
    inner: StreamlineCurve,
}

/// Opaque Hermite spline handle.
pub struct SfSpline {
    inner: HermiteSpline,
}

/// Opaque solution trajectory handle.
pub struct SfSolution {
    inner: OdeSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(message: &str) {
    LAST_ERROR.with(|slot| {
        let mut slot = slot.borrow_mut();
        slot.clear();
        slot.extend_from_slice(message.as_bytes());
    });
}

fn fail(status: SfStatus, message: &str) -> SfStatus {
    set_last_error(message);
    status
}

fn guarded(f: impl FnOnce() -> SfStatus) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SfStatus::Internal, "internal panic"),
    }
}

/// Copy the last error message (UTF-8, NUL-terminated) into `buf`.
/// Returns the full message length in bytes, regardless of how much fit;
/// passing `len = 0` just queries the length.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be null with
/// `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn sf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        if !buf.is_null() && len > 0 {
            let n = slot.len().min(len - 1);
            std::ptr::copy_nonoverlapping(slot.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        slot.len()
    })
}

fn write_handle<T>(out: *mut *mut T, value: T) -> SfStatus {
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output handle pointer is null");
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    SfStatus::Ok
}

// ---------------------------------------------------------------------------
// curves
// ---------------------------------------------------------------------------

/// Involute tooth flank on `[pi + atan(s0), 3pi/2]`.
///
/// # Safety
/// `out` must be a valid pointer to an `SfCurve*`.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_tooth(s0: f64, out: *mut *mut SfCurve) -> SfStatus {
    guarded(|| match make_tooth(s0) {
        Ok(curve) => write_handle(out, SfCurve { inner: curve }),
        Err(e) => fail(SfStatus::InvalidArgument, &e.to_string()),
    })
}

/// 3-D helix streamline `([a1+a2 s] sin s + a3 s, [a1+a2 s] cos s, a4 s)`.
///
/// # Safety
/// `out` must be a valid pointer to an `SfCurve*`.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_helix(
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    s_lo: f64,
    s_hi: f64,
    out: *mut *mut SfCurve,
) -> SfStatus {
    guarded(|| match make_helix([a1, a2, a3, a4], (s_lo, s_hi)) {
        Ok(curve) => write_handle(out, SfCurve { inner: curve }),
        Err(e) => fail(SfStatus::InvalidArgument, &e.to_string()),
    })
}

/// Lobe rotor profile snapshot at time `t` (radius `r + sin(phase + omega t)`).
///
/// # Safety
/// `out` must be a valid pointer to an `SfCurve*`.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_lobe_snapshot(
    r: f64,
    phase: f64,
    omega: f64,
    t: f64,
    out: *mut *mut SfCurve,
) -> SfStatus {
    guarded(|| {
        let snapshot = make_lobe(r, phase, omega).and_then(|ev| ev.snapshot(t));
        match snapshot {
            Ok(curve) => write_handle(out, SfCurve { inner: curve }),
            Err(e) => fail(SfStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Spatial dimension of the curve (2 or 3); 0 for a null handle.
///
/// # Safety
/// `curve` must be a live handle from an `sf_curve_*` constructor or null.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_dim(curve: *const SfCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.inner.dim())
}

/// Parameter domain of the curve.
///
/// # Safety
/// All pointers must be valid; `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_domain(
    curve: *const SfCurve,
    lo: *mut f64,
    hi: *mut f64,
) -> SfStatus {
    let Some(curve) = curve.as_ref() else {
        return fail(SfStatus::NullPointer, "curve handle is null");
    };
    if lo.is_null() || hi.is_null() {
        return fail(SfStatus::NullPointer, "domain output pointer is null");
    }
    let (a, b) = curve.inner.domain();
    *lo = a;
    *hi = b;
    SfStatus::Ok
}

unsafe fn curve_query(
    curve: *const SfCurve,
    s: f64,
    out_point: *mut f64,
    f: impl Fn(&StreamlineCurve, f64) -> Vec<f64>,
) -> SfStatus {
    let Some(curve) = curve.as_ref() else {
        return fail(SfStatus::NullPointer, "curve handle is null");
    };
    if out_point.is_null() {
        return fail(SfStatus::NullPointer, "output point pointer is null");
    }
    let values = f(&curve.inner, s);
    std::ptr::copy_nonoverlapping(values.as_ptr(), out_point, values.len());
    SfStatus::Ok
}

/// Evaluate the curve position; `out_point` receives `sf_curve_dim` values.
///
/// # Safety
/// `curve` must be a live handle; `out_point` must have room for the
/// curve's dimension.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_eval(
    curve: *const SfCurve,
    s: f64,
    out_point: *mut f64,
) -> SfStatus {
    guarded(|| curve_query(curve, s, out_point, |c, s| c.eval(s)))
}

/// Evaluate the curve derivative; `out_point` receives `sf_curve_dim` values.
///
/// # Safety
/// Same contract as [`sf_curve_eval`].
#[no_mangle]
pub unsafe extern "C" fn sf_curve_deriv(
    curve: *const SfCurve,
    s: f64,
    out_point: *mut f64,
) -> SfStatus {
    guarded(|| curve_query(curve, s, out_point, |c, s| c.deriv(s)))
}

/// Release a curve handle (null is a no-op).
///
/// # Safety
/// `curve` must come from an `sf_curve_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sf_curve_free(curve: *mut SfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

// ---------------------------------------------------------------------------
// splines
// ---------------------------------------------------------------------------

/// Interpolate `n` points with endpoint velocities into a C1 cubic spline.
/// `points` and `velocities` are row-major `n x dim` arrays.
///
/// # Safety
/// `points` and `velocities` must each hold `n * dim` readable doubles;
/// `out` must be a valid pointer to an `SfSpline*`.
#[no_mangle]
pub unsafe extern "C" fn sf_spline_interpolate(
    points: *const f64,
    velocities: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut SfSpline,
) -> SfStatus {
    guarded(|| {
        if points.is_null() || velocities.is_null() {
            return fail(SfStatus::NullPointer, "input array pointer is null");
        }
        if n < 2 || dim == 0 || dim > 3 {
            return fail(
                SfStatus::InvalidArgument,
                "need n >= 2 points with dimension 1..=3",
            );
        }
        let read_rows = |base: *const f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..dim).map(|c| *base.add(i * dim + c)).collect())
                .collect()
        };
        let sample = match PolylineSample::new(read_rows(points), read_rows(velocities)) {
            Ok(sample) => sample,
            Err(e) => return fail(SfStatus::InvalidArgument, &e.to_string()),
        };
        match HermiteSpline::interpolate(&sample) {
            Ok(spline) => write_handle(out, SfSpline { inner: spline }),
            Err(e) => fail(SfStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Number of cubic segments; 0 for a null handle.
///
/// # Safety
/// `spline` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_spline_segment_count(spline: *const SfSpline) -> usize {
    spline.as_ref().map_or(0, |sp| sp.inner.segment_count())
}

/// Spatial dimension of the spline; 0 for a null handle.
///
/// # Safety
/// `spline` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_spline_dim(spline: *const SfSpline) -> usize {
    spline.as_ref().map_or(0, |sp| sp.inner.dim())
}

/// Coefficient quadruple `(a3, a2, a1, a0)` of one segment and component.
///
/// # Safety
/// `spline` must be a live handle; `out_coeffs` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_spline_coefficients(
    spline: *const SfSpline,
    segment: usize,
    component: usize,
    out_coeffs: *mut f64,
) -> SfStatus {
    let Some(spline) = spline.as_ref() else {
        return fail(SfStatus::NullPointer, "spline handle is null");
    };
    if out_coeffs.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    if segment >= spline.inner.segment_count() || component >= spline.inner.dim() {
        return fail(
            SfStatus::InvalidArgument,
            "segment or component index out of range",
        );
    }
    let quad = spline.inner.segments()[segment].coeffs()[component];
    std::ptr::copy_nonoverlapping(quad.as_ptr(), out_coeffs, 4);
    SfStatus::Ok
}

unsafe fn spline_query(
    spline: *const SfSpline,
    s: f64,
    out_point: *mut f64,
    f: impl Fn(&HermiteSpline, f64) -> Result<Vec<f64>, streamflow::hermite::HermiteError>,
) -> SfStatus {
    let Some(spline) = spline.as_ref() else {
        return fail(SfStatus::NullPointer, "spline handle is null");
    };
    if out_point.is_null() {
        return fail(SfStatus::NullPointer, "output point pointer is null");
    }
    match f(&spline.inner, s) {
        Ok(values) => {
            std::ptr::copy_nonoverlapping(values.as_ptr(), out_point, values.len());
            SfStatus::Ok
        }
        Err(e) => fail(SfStatus::InvalidArgument, &e.to_string()),
    }
}

/// Evaluate the spline at global parameter `s in [0, 1]`.
///
/// # Safety
/// `spline` must be a live handle; `out_point` must have room for
/// `sf_spline_dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_spline_eval(
    spline: *const SfSpline,
    s: f64,
    out_point: *mut f64,
) -> SfStatus {
    guarded(|| spline_query(spline, s, out_point, |sp, s| sp.eval(s)))
}

/// Global derivative `K * df/dt` at `s in [0, 1]`.
///
/// # Safety
/// Same contract as [`sf_spline_eval`].
#[no_mangle]
pub unsafe extern "C" fn sf_spline_derivative(
    spline: *const SfSpline,
    s: f64,
    out_point: *mut f64,
) -> SfStatus {
    guarded(|| spline_query(spline, s, out_point, |sp, s| sp.derivative(s)))
}

/// Release a spline handle (null is a no-op).
///
/// # Safety
/// `spline` must come from [`sf_spline_interpolate`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sf_spline_free(spline: *mut SfSpline) {
    if !spline.is_null() {
        drop(Box::from_raw(spline));
    }
}

// ---------------------------------------------------------------------------
// solving
// ---------------------------------------------------------------------------

fn solver_config(method: SfMethod, step: f64) -> SolverConfig {
    SolverConfig {
        method: method.into(),
        step,
        ..SolverConfig::default()
    }
}

/// Integrate the a-priori gear-pump equation over `[s_start, s_end]`.
///
/// # Safety
/// `out` must be a valid pointer to an `SfSolution*`.
#[no_mangle]
pub unsafe extern "C" fn sf_gear_pump_solve(
    rho: f64,
    mu: f64,
    u0: f64,
    udot0: f64,
    s_start: f64,
    s_end: f64,
    method: SfMethod,
    step: f64,
    out: *mut *mut SfSolution,
) -> SfStatus {
    guarded(|| {
        let fluid = match FluidProperties::constant(rho, mu) {
            Ok(fluid) => fluid,
            Err(e) => return fail(SfStatus::InvalidArgument, &e.to_string()),
        };
        let ode = match gear_pump_ode(&fluid) {
            Ok(ode) => ode,
            Err(e) => return fail(SfStatus::InvalidArgument, &e.to_string()),
        };
        let init = InitialConditions {
            s_start,
            u0,
            udot0,
        };
        match integrate(&ode, init, s_end, &solver_config(method, step)) {
            Ok(solution) => write_handle(out, SfSolution { inner: solution }),
            Err(e) => fail(SfStatus::Numerical, &e.to_string()),
        }
    })
}

/// Chained solve along a spline with constant fluid properties and constant
/// pressure; each segment's terminal values seed the next segment.
///
/// # Safety
/// `spline` must be a live handle; `out` must be a valid pointer to an
/// `SfSolution*`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sf_chain_solve(
    spline: *const SfSpline,
    rho: f64,
    mu: f64,
    pressure: f64,
    convention: SfConvention,
    component: usize,
    u0: f64,
    udot0: f64,
    method: SfMethod,
    step: f64,
    out: *mut *mut SfSolution,
) -> SfStatus {
    guarded(|| {
        let Some(spline) = spline.as_ref() else {
            return fail(SfStatus::NullPointer, "spline handle is null");
        };
        let fluid = match FluidProperties::constant(rho, mu) {
            Ok(fluid) => fluid,
            Err(e) => return fail(SfStatus::InvalidArgument, &e.to_string()),
        };
        let init = InitialConditions {
            s_start: 0.0,
            u0,
            udot0,
        };
        match chain_solve(
            &spline.inner,
            &fluid,
            &PressureModel::constant(pressure),
            convention.into(),
            component,
            init,
            &solver_config(method, step),
        ) {
            Ok(solution) => write_handle(out, SfSolution { inner: solution }),
            Err(e) => fail(SfStatus::Numerical, &e.to_string()),
        }
    })
}

/// Number of samples in the solution; 0 for a null handle.
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_solution_len(solution: *const SfSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.samples().len())
}

/// Fetch sample `index` as `(s, u, udot, segment)`.
///
/// # Safety
/// `solution` must be a live handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solution_sample(
    solution: *const SfSolution,
    index: usize,
    s: *mut f64,
    u: *mut f64,
    udot: *mut f64,
    segment: *mut usize,
) -> SfStatus {
    let Some(solution) = solution.as_ref() else {
        return fail(SfStatus::NullPointer, "solution handle is null");
    };
    if s.is_null() || u.is_null() || udot.is_null() || segment.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    let Some(sample) = solution.inner.samples().get(index) else {
        return fail(SfStatus::InvalidArgument, "sample index out of range");
    };
    *s = sample.s;
    *u = sample.u;
    *udot = sample.udot;
    *segment = sample.segment;
    SfStatus::Ok
}

/// Release a solution handle (null is a no-op).
///
/// # Safety
/// `solution` must come from a solve call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sf_solution_free(solution: *mut SfSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
