//! Exercises the C ABI the way a foreign binding would: raw pointers,
//! error codes and explicit handle lifecycles.

use std::ptr;

use geoquant_ffi::*;

fn build(
    points: &[f64],
    count: usize,
    dim: usize,
    weights: Option<&[f64]>,
) -> *mut GeoquantMeasure {
    let mut handle: *mut GeoquantMeasure = ptr::null_mut();
    let status = unsafe {
        geoquant_measure_from_points(
            points.as_ptr(),
            count,
            dim,
            weights.map_or(ptr::null(), <[f64]>::as_ptr),
            &mut handle,
        )
    };
    assert_eq!(status, GeoquantStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn measure_lifecycle_and_queries() {
    let points = [2.0, 1.0, 2.0, -1.0, -2.0, 1.0, -2.0, -1.0];
    let m = build(&points, 4, 2, None);
    unsafe {
        let mut dim = 0usize;
        assert_eq!(geoquant_measure_dim(m, &mut dim), GeoquantStatus::Ok);
        assert_eq!(dim, 2);
        let mut size = 0usize;
        assert_eq!(
            geoquant_measure_support_size(m, &mut size),
            GeoquantStatus::Ok
        );
        assert_eq!(size, 4);

        let u = [1.0, 0.0];
        let mut value = 0.0;
        assert_eq!(
            geoquant_tail_integral(m, u.as_ptr(), &mut value),
            GeoquantStatus::Ok
        );
        assert!((value - 5f64.sqrt()).abs() < 1e-12);

        let mu = [0.0, 0.0];
        assert_eq!(
            geoquant_objective_value(m, 0.5, u.as_ptr(), mu.as_ptr(), &mut value),
            GeoquantStatus::Ok
        );
        assert_eq!(value, 0.0);

        assert_eq!(
            geoquant_spatial_depth(m, mu.as_ptr(), &mut value),
            GeoquantStatus::Ok
        );
        assert_eq!(value, 1.0);

        geoquant_measure_free(m);
    }
}

#[test]
fn solve_through_the_abi() {
    let points = [2.0, 1.0, 2.0, -1.0, -2.0, 1.0, -2.0, -1.0];
    let m = build(&points, 4, 2, None);
    let u = [0.0, 1.0];
    let mut solution: *mut GeoquantSolution = ptr::null_mut();
    unsafe {
        let status = geoquant_solve(m, 0.0, u.as_ptr(), 0.0, 0, ptr::null(), &mut solution);
        assert_eq!(status, GeoquantStatus::Ok);

        let mut mu = [f64::NAN; 2];
        assert_eq!(
            geoquant_solution_mu(solution, mu.as_mut_ptr(), 2),
            GeoquantStatus::Ok
        );
        assert!(mu[0].abs() < 1e-9 && mu[1].abs() < 1e-9);

        let mut objective = 0.0;
        let mut residual = 0.0;
        let mut iterations = 0u64;
        let mut status_code = GeoquantSolveStatus::MaxIter;
        let mut uniqueness = GeoquantUniqueness::Unknown;
        let mut atom_hit = true;
        assert_eq!(
            geoquant_solution_info(
                solution,
                &mut objective,
                &mut residual,
                &mut iterations,
                &mut status_code,
                &mut uniqueness,
                &mut atom_hit,
            ),
            GeoquantStatus::Ok
        );
        assert_eq!(status_code, GeoquantSolveStatus::Converged);
        assert_eq!(uniqueness, GeoquantUniqueness::Unique);
        assert!(!atom_hit);
        assert!(residual <= 1e-9);

        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        assert_eq!(
            geoquant_solution_interval(solution, lo.as_mut_ptr(), hi.as_mut_ptr(), 2),
            GeoquantStatus::NotAvailable
        );

        geoquant_solution_free(solution);
        geoquant_measure_free(m);
    }
}

#[test]
fn interval_case_via_builtin() {
    // five points on the x-axis: order .6 towards +x has a whole segment
    let points = [-2.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 2.0, 0.0];
    let m = build(&points, 5, 2, None);
    let u = [1.0, 0.0];
    let mut solution: *mut GeoquantSolution = ptr::null_mut();
    unsafe {
        assert_eq!(
            geoquant_solve(m, 0.6, u.as_ptr(), 0.0, 0, ptr::null(), &mut solution),
            GeoquantStatus::Ok
        );
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        assert_eq!(
            geoquant_solution_interval(solution, lo.as_mut_ptr(), hi.as_mut_ptr(), 2),
            GeoquantStatus::Ok
        );
        assert!((lo[0] - 1.0).abs() < 1e-12);
        assert!((hi[0] - 2.0).abs() < 1e-12);

        let mut status_code = GeoquantSolveStatus::Converged;
        geoquant_solution_info(
            solution,
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
            &mut status_code,
            ptr::null_mut(),
            ptr::null_mut(),
        );
        assert_eq!(status_code, GeoquantSolveStatus::ReducedToUnivariate);

        geoquant_solution_free(solution);
        geoquant_measure_free(m);
    }
}

#[test]
fn builtin_examples_and_diagnosis() {
    let mut m: *mut GeoquantMeasure = ptr::null_mut();
    unsafe {
        assert_eq!(
            geoquant_measure_builtin(b'b' as _, 1437, &mut m),
            GeoquantStatus::Ok
        );

        let mut on_line = false;
        let mut degenerate = true;
        let mut has_direction = false;
        let mut base = [0.0; 2];
        let mut direction = [0.0; 2];
        assert_eq!(
            geoquant_detect_line(
                m,
                1e-9,
                &mut on_line,
                &mut degenerate,
                &mut has_direction,
                base.as_mut_ptr(),
                direction.as_mut_ptr(),
            ),
            GeoquantStatus::Ok
        );
        assert!(on_line && !degenerate && has_direction);
        assert!((direction[0] - 1.0).abs() < 1e-12);

        let u = [1.0, 0.0];
        let mut diagnosis = GeoquantDiagnosis::UniqueNotOnLine;
        assert_eq!(
            geoquant_uniqueness_diagnosis(m, 0.5, u.as_ptr(), &mut diagnosis),
            GeoquantStatus::Ok
        );
        assert_eq!(diagnosis, GeoquantDiagnosis::PossiblyNonUniqueLineDirection);

        geoquant_measure_free(m);

        assert_eq!(
            geoquant_measure_builtin(b'z' as _, 0, &mut m),
            GeoquantStatus::InvalidArgument
        );
    }
}

#[test]
fn error_codes() {
    let points = [0.0, 0.0, 1.0, 1.0];
    let m = build(&points, 2, 2, None);
    unsafe {
        let mut out = 0.0;
        // non-unit direction
        let bad_u = [1.0, 1.0];
        assert_eq!(
            geoquant_tail_integral(m, bad_u.as_ptr(), &mut out),
            GeoquantStatus::NonUnitDirection
        );
        // alpha out of range
        let u = [1.0, 0.0];
        let mut solution: *mut GeoquantSolution = ptr::null_mut();
        assert_eq!(
            geoquant_solve(m, 1.0, u.as_ptr(), 0.0, 0, ptr::null(), &mut solution),
            GeoquantStatus::AlphaOutOfRange
        );
        // nonpositive weight
        let mut bad: *mut GeoquantMeasure = ptr::null_mut();
        let w = [1.0, -1.0];
        assert_eq!(
            geoquant_measure_from_points(points.as_ptr(), 2, 2, w.as_ptr(), &mut bad),
            GeoquantStatus::InvalidArgument
        );
        // parameter range
        assert_eq!(
            geoquant_t_integral(m, 2.5, 1.0, &mut out),
            GeoquantStatus::InvalidArgument
        );
        // null handling
        assert_eq!(
            geoquant_measure_dim(ptr::null(), &mut 0usize),
            GeoquantStatus::NullPointer
        );
        geoquant_measure_free(m);
        geoquant_measure_free(ptr::null_mut()); // no-op
    }
}

#[test]
fn generated_header_exists_and_declares_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("geoquant.h");
    let text = std::fs::read_to_string(header).expect("header generated by the build script");
    for symbol in [
        "geoquant_measure_from_points",
        "geoquant_measure_builtin",
        "geoquant_solve",
        "geoquant_solution_interval",
        "geoquant_spatial_depth",
        "GeoquantStatus",
        "GEOQUANT_H",
    ] {
        assert!(text.contains(symbol), "header misses {symbol}");
    }
}
