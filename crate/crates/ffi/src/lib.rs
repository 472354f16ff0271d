//! C ABI for the spatial-quantile library.
//!
//! Measures and solutions are opaque handles created and destroyed through
//! this interface; every function returns a [`GeoquantStatus`] code and
//! writes results through out-pointers. The generated header lives in
//! `include/geoquant.h`.

use std::ffi::c_char;

use geoquant::asymptotics::spatial_depth;
use geoquant::measure::{detect_line, tail_integral, BuiltinExample, EmpiricalMeasure};
use geoquant::objective::{alpha_one_infimum, objective_value, t_integral};
use geoquant::solver::{
    optimality_certificate, search_radius, solve_quantile, uniqueness_diagnosis, QuantileSolution,
    SolveOptions, SolveStatus, Uniqueness, UniquenessDiagnosis,
};
use geoquant::Error;

/// Result code of every C-ABI call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeoquantStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonUnitDirection = 4,
    AlphaOutOfRange = 5,
    NotOnLine = 6,
    Degenerate = 7,
    NotAvailable = 8,
    IoError = 9,
}

/// Solver termination state.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeoquantSolveStatus {
    Converged = 0,
    MaxIter = 1,
    ReducedToUnivariate = 2,
}

/// Uniqueness verdict attached to a solution.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeoquantUniqueness {
    Unique = 0,
    NonUniqueInterval = 1,
    Unknown = 2,
}

/// Classification of the instance by its uniqueness-relevant geometry.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeoquantDiagnosis {
    UniqueNotOnLine = 0,
    UniqueAlphaPositiveOffDirection = 1,
    PossiblyNonUniqueLineDirection = 2,
    PossiblyNonUniqueMedianOnLine = 3,
    SingleAtom = 4,
}

/// Opaque handle to a weighted point cloud.
pub struct GeoquantMeasure(EmpiricalMeasure);

/// Opaque handle to a computed quantile.
pub struct GeoquantSolution(QuantileSolution);

fn status_of(err: &Error) -> GeoquantStatus {
    match err {
        Error::EmptyInput
        | Error::NonpositiveWeight { .. }
        | Error::WeightCountMismatch { .. }
        | Error::NonFiniteCoordinate { .. }
        | Error::ZeroDirection
        | Error::ParameterOutOfRange { .. }
        | Error::UnknownExample(_)
        | Error::InvalidSweep(_)
        | Error::Parse(_) => GeoquantStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => GeoquantStatus::DimensionMismatch,
        Error::NonUnitDirection { .. } => GeoquantStatus::NonUnitDirection,
        Error::AlphaOutOfRange { .. } => GeoquantStatus::AlphaOutOfRange,
        Error::NotOnLine | Error::PointOffLine | Error::LineDirectionUndefined => {
            GeoquantStatus::NotOnLine
        }
        Error::DegenerateDirection => GeoquantStatus::Degenerate,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => GeoquantStatus::IoError,
    }
}

unsafe fn measure_ref<'a>(handle: *const GeoquantMeasure) -> Option<&'a EmpiricalMeasure> {
    handle.as_ref().map(|m| &m.0)
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Builds a measure from `count` points of dimension `dim`, laid out
/// row-major in `points`. `weights` may be null for uniform weights.
/// The returned handle must be released with `geoquant_measure_free`.
///
/// # Safety
/// `points` must reference `count * dim` readable doubles, `weights`
/// either null or `count` doubles, and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn geoquant_measure_from_points(
    points: *const f64,
    count: usize,
    dim: usize,
    weights: *const f64,
    out: *mut *mut GeoquantMeasure,
) -> GeoquantStatus {
    if points.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    if count == 0 || dim == 0 {
        return GeoquantStatus::InvalidArgument;
    }
    let flat = std::slice::from_raw_parts(points, count * dim);
    let pts: Vec<Vec<f64>> = flat.chunks_exact(dim).map(<[f64]>::to_vec).collect();
    let w = slice_arg(weights, count).map(<[f64]>::to_vec);
    match EmpiricalMeasure::from_points(pts, w) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(GeoquantMeasure(m)));
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Builds one of the built-in example clouds (`'a'`, `'b'`, `'c'`, `'d'`).
///
/// # Safety
/// `out` must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn geoquant_measure_builtin(
    name: c_char,
    seed: u64,
    out: *mut *mut GeoquantMeasure,
) -> GeoquantStatus {
    if out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let name = (name as u8 as char).to_string();
    match name.parse::<BuiltinExample>() {
        Ok(example) => {
            *out = Box::into_raw(Box::new(GeoquantMeasure(example.build(seed))));
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a measure handle; null is a no-op.
///
/// # Safety
/// `handle` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn geoquant_measure_free(handle: *mut GeoquantMeasure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Ambient dimension of the measure.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn geoquant_measure_dim(
    handle: *const GeoquantMeasure,
    out: *mut usize,
) -> GeoquantStatus {
    let (Some(m), false) = (measure_ref(handle), out.is_null()) else {
        return GeoquantStatus::NullPointer;
    };
    *out = m.dim();
    GeoquantStatus::Ok
}

/// Number of distinct support points (duplicates merge on construction).
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn geoquant_measure_support_size(
    handle: *const GeoquantMeasure,
    out: *mut usize,
) -> GeoquantStatus {
    let (Some(m), false) = (measure_ref(handle), out.is_null()) else {
        return GeoquantStatus::NullPointer;
    };
    *out = m.len();
    GeoquantStatus::Ok
}

/// Evaluates the quantile objective at `mu` (`alpha` in `[0, 1]`).
///
/// # Safety
/// `u` and `mu` must reference `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_objective_value(
    handle: *const GeoquantMeasure,
    alpha: f64,
    u: *const f64,
    mu: *const f64,
    out: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if u.is_null() || mu.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let u = std::slice::from_raw_parts(u, m.dim());
    let mu = std::slice::from_raw_parts(mu, m.dim());
    match objective_value(m, alpha, u, mu) {
        Ok(v) => {
            *out = v;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// The tail integral `E[||Z|| + u'Z]` for a unit direction `u`.
///
/// # Safety
/// `u` must reference `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_tail_integral(
    handle: *const GeoquantMeasure,
    u: *const f64,
    out: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if u.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let u = std::slice::from_raw_parts(u, m.dim());
    match tail_integral(m, u) {
        Ok(v) => {
            *out = v;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Infimum of the order-one objective in direction `u`.
///
/// # Safety
/// `u` must reference `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_alpha_one_infimum(
    handle: *const GeoquantMeasure,
    u: *const f64,
    out: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if u.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let u = std::slice::from_raw_parts(u, m.dim());
    match alpha_one_infimum(m, u) {
        Ok(v) => {
            *out = v;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// The vanishing integral `t_P(r)` for `m_param` in `(0, 2)` and `r > 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_t_integral(
    handle: *const GeoquantMeasure,
    m_param: f64,
    r: f64,
    out: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    match t_integral(m, m_param, r) {
        Ok(v) => {
            *out = v;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Spatial depth of `point`.
///
/// # Safety
/// `point` must reference `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_spatial_depth(
    handle: *const GeoquantMeasure,
    point: *const f64,
    out: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if point.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let point = std::slice::from_raw_parts(point, m.dim());
    match spatial_depth(m, point) {
        Ok(v) => {
            *out = v;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Radius of the origin-centered ball guaranteed to contain every
/// minimizer of order `alpha`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_search_radius(
    handle: *const GeoquantMeasure,
    alpha: f64,
    out: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    match search_radius(m, alpha) {
        Ok(v) => {
            *out = v;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Collinearity of the support within `tol` (relative to the support
/// radius). `base` and `direction` may be null; `direction` is only
/// written when `*has_direction` is set (a single atom has none).
///
/// # Safety
/// Non-null out-pointers must be writable; `base` and `direction`, when
/// given, must reference `dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn geoquant_detect_line(
    handle: *const GeoquantMeasure,
    tol: f64,
    on_line: *mut bool,
    degenerate_single_atom: *mut bool,
    has_direction: *mut bool,
    base: *mut f64,
    direction: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if on_line.is_null() || degenerate_single_atom.is_null() || has_direction.is_null() {
        return GeoquantStatus::NullPointer;
    }
    if tol.is_nan() || tol < 0.0 {
        return GeoquantStatus::InvalidArgument;
    }
    let line = detect_line(m, tol);
    *on_line = line.on_line;
    *degenerate_single_atom = line.degenerate_single_atom;
    *has_direction = line.direction.is_some();
    if !base.is_null() {
        if let Some(b) = &line.base {
            std::slice::from_raw_parts_mut(base, m.dim()).copy_from_slice(b);
        }
    }
    if !direction.is_null() {
        if let Some(d) = &line.direction {
            std::slice::from_raw_parts_mut(direction, m.dim()).copy_from_slice(d);
        }
    }
    GeoquantStatus::Ok
}

/// Classifies the instance `(measure, alpha, u)`.
///
/// # Safety
/// `u` must reference `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_uniqueness_diagnosis(
    handle: *const GeoquantMeasure,
    alpha: f64,
    u: *const f64,
    out: *mut GeoquantDiagnosis,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if u.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let u = std::slice::from_raw_parts(u, m.dim());
    match uniqueness_diagnosis(m, alpha, u) {
        Ok(d) => {
            *out = match d {
                UniquenessDiagnosis::UniqueNotOnLine => GeoquantDiagnosis::UniqueNotOnLine,
                UniquenessDiagnosis::UniqueAlphaPositiveOffDirection => {
                    GeoquantDiagnosis::UniqueAlphaPositiveOffDirection
                }
                UniquenessDiagnosis::PossiblyNonUniqueLineDirection => {
                    GeoquantDiagnosis::PossiblyNonUniqueLineDirection
                }
                UniquenessDiagnosis::PossiblyNonUniqueMedianOnLine => {
                    GeoquantDiagnosis::PossiblyNonUniqueMedianOnLine
                }
                UniquenessDiagnosis::SingleAtom => GeoquantDiagnosis::SingleAtom,
            };
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Subdifferential optimality test at `mu`.
///
/// # Safety
/// `u` and `mu` must reference `dim` doubles; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_optimality_certificate(
    handle: *const GeoquantMeasure,
    alpha: f64,
    u: *const f64,
    mu: *const f64,
    tol: f64,
    certified: *mut bool,
    residual: *mut f64,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if u.is_null() || mu.is_null() || certified.is_null() || residual.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let u = std::slice::from_raw_parts(u, m.dim());
    let mu = std::slice::from_raw_parts(mu, m.dim());
    match optimality_certificate(m, alpha, u, mu, tol) {
        Ok(c) => {
            *certified = c.certified;
            *residual = c.residual;
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Computes the spatial quantile of order `alpha` in direction `u`.
/// `tol <= 0` and `max_iter == 0` select the documented defaults;
/// `warm_start` may be null. The returned handle must be released with
/// `geoquant_solution_free`.
///
/// # Safety
/// `u` (and `warm_start` when non-null) must reference `dim` doubles and
/// `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn geoquant_solve(
    handle: *const GeoquantMeasure,
    alpha: f64,
    u: *const f64,
    tol: f64,
    max_iter: u64,
    warm_start: *const f64,
    out: *mut *mut GeoquantSolution,
) -> GeoquantStatus {
    let Some(m) = measure_ref(handle) else {
        return GeoquantStatus::NullPointer;
    };
    if u.is_null() || out.is_null() {
        return GeoquantStatus::NullPointer;
    }
    let u = std::slice::from_raw_parts(u, m.dim());
    let opts = SolveOptions {
        tol: (tol > 0.0).then_some(tol),
        max_iter: (max_iter > 0).then_some(max_iter as usize),
        warm_start: slice_arg(warm_start, m.dim()).map(<[f64]>::to_vec),
    };
    match solve_quantile(m, alpha, u, &opts) {
        Ok(solution) => {
            *out = Box::into_raw(Box::new(GeoquantSolution(solution)));
            GeoquantStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a solution handle; null is a no-op.
///
/// # Safety
/// `handle` must have come from `geoquant_solve` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn geoquant_solution_free(handle: *mut GeoquantSolution) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Copies the quantile coordinates into `buf` (`len` must equal `dim`).
///
/// # Safety
/// `buf` must reference `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn geoquant_solution_mu(
    handle: *const GeoquantSolution,
    buf: *mut f64,
    len: usize,
) -> GeoquantStatus {
    let Some(s) = handle.as_ref() else {
        return GeoquantStatus::NullPointer;
    };
    if buf.is_null() {
        return GeoquantStatus::NullPointer;
    }
    if len != s.0.mu.len() {
        return GeoquantStatus::DimensionMismatch;
    }
    std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&s.0.mu);
    GeoquantStatus::Ok
}

/// Scalar fields of a solution; any out-pointer may be null to skip it.
///
/// # Safety
/// Non-null out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn geoquant_solution_info(
    handle: *const GeoquantSolution,
    objective: *mut f64,
    residual: *mut f64,
    iterations: *mut u64,
    status: *mut GeoquantSolveStatus,
    uniqueness: *mut GeoquantUniqueness,
    atom_hit: *mut bool,
) -> GeoquantStatus {
    let Some(s) = handle.as_ref() else {
        return GeoquantStatus::NullPointer;
    };
    if !objective.is_null() {
        *objective = s.0.objective;
    }
    if !residual.is_null() {
        *residual = s.0.residual;
    }
    if !iterations.is_null() {
        *iterations = s.0.iterations as u64;
    }
    if !status.is_null() {
        *status = match s.0.status {
            SolveStatus::Converged => GeoquantSolveStatus::Converged,
            SolveStatus::MaxIter => GeoquantSolveStatus::MaxIter,
            SolveStatus::ReducedToUnivariate => GeoquantSolveStatus::ReducedToUnivariate,
        };
    }
    if !uniqueness.is_null() {
        *uniqueness = match s.0.uniqueness {
            Uniqueness::Unique => GeoquantUniqueness::Unique,
            Uniqueness::NonUniqueInterval => GeoquantUniqueness::NonUniqueInterval,
            Uniqueness::Unknown => GeoquantUniqueness::Unknown,
        };
    }
    if !atom_hit.is_null() {
        *atom_hit = s.0.atom_hit;
    }
    GeoquantStatus::Ok
}

/// Copies the endpoints of the optimal segment into `lo`/`hi` when the
/// minimizer is an interval; returns `NotAvailable` otherwise.
///
/// # Safety
/// `lo` and `hi` must reference `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn geoquant_solution_interval(
    handle: *const GeoquantSolution,
    lo: *mut f64,
    hi: *mut f64,
    len: usize,
) -> GeoquantStatus {
    let Some(s) = handle.as_ref() else {
        return GeoquantStatus::NullPointer;
    };
    if lo.is_null() || hi.is_null() {
        return GeoquantStatus::NullPointer;
    }
    match &s.0.interval {
        None => GeoquantStatus::NotAvailable,
        Some((a, b)) => {
            if len != a.len() {
                return GeoquantStatus::DimensionMismatch;
            }
            std::slice::from_raw_parts_mut(lo, len).copy_from_slice(a);
            std::slice::from_raw_parts_mut(hi, len).copy_from_slice(b);
            GeoquantStatus::Ok
        }
    }
}
