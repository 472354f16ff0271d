//! Extreme-order behaviour: sweeps of `alpha` toward one, empirical
//! surrogates for the norm-divergence and direction-convergence limits,
//! spatial depth, and the order-one descent profile.

use serde::{Deserialize, Serialize};

use crate::kahan::KahanVec;
use crate::measure::EmpiricalMeasure;
use crate::objective::{alpha_one_infimum, objective_value};
use crate::solver::{solve_quantile, SolveOptions, SolveStatus};
use crate::vecs;
use crate::{Error, Result};

/// One solved point of an `alpha`-sweep.
///
/// `direction` is `mu / ||mu||`, absent when the quantile sits at the
/// origin; in that degenerate case `angle_to_u` is reported as `pi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub alpha: f64,
    pub mu: Vec<f64>,
    pub norm: f64,
    pub direction: Option<Vec<f64>>,
    /// Angle between `mu/||mu||` and `u`, in radians in `[0, pi]`.
    pub angle_to_u: f64,
    pub objective: f64,
    pub residual: f64,
    pub status: SolveStatus,
}

/// Finite-sample report for the norm-divergence surrogate.
///
/// The limit statement requires the measure not to be concentrated on a
/// line with direction `u`; `hypothesis_ok` records that check. When the
/// hypothesis fails the sweep still runs and the (bounded) ratio is
/// reported rather than asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub hypothesis_ok: bool,
    /// Norms non-decreasing over the last half of the sweep.
    pub monotone_tail: bool,
    pub norm_at_max_alpha: f64,
    /// Largest support norm.
    pub data_radius: f64,
    pub ratio: f64,
}

/// Finite-sample report for the direction-convergence surrogate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub hypothesis_ok: bool,
    pub angles: Vec<f64>,
    pub final_angle: f64,
    /// Angle at the largest order below the angle at the sweep midpoint.
    pub decreasing_tail: bool,
}

/// One entry of the order-one descent profile along `r * u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentPoint {
    pub r: f64,
    pub value: f64,
    /// `value - i_u`, positive and decreasing to zero.
    pub gap: f64,
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput);
    }
    for pair in alphas.windows(2) {
        let increasing = pair[0] < pair[1];
        if !increasing {
            return Err(Error::Parse(format!(
                "alpha sweep must be strictly increasing, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    for &a in alphas {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::AlphaOutOfRange {
                alpha: a,
                range: "[0, 1)",
            });
        }
    }
    Ok(())
}

/// Solves the quantile for every order in `alphas` (strictly increasing,
/// inside `[0, 1)`), warm-starting each solve at the previous solution.
/// Non-convergence is recorded in the per-point status; it does not abort
/// the sweep.
pub fn quantile_curve(
    measure: &EmpiricalMeasure,
    u: &[f64],
    alphas: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<TrajectoryPoint>> {
    check_alphas(alphas)?;
    let mut out = Vec::with_capacity(alphas.len());
    let mut warm = opts.warm_start.clone();
    for &alpha in alphas {
        let step_opts = SolveOptions {
            tol: opts.tol,
            max_iter: opts.max_iter,
            warm_start: warm.clone(),
        };
        let sol = solve_quantile(measure, alpha, u, &step_opts)?;
        warm = Some(sol.mu.clone());
        out.push(trajectory_point(
            alpha,
            sol.mu,
            sol.objective,
            sol.residual,
            sol.status,
            u,
        ));
    }
    Ok(out)
}

pub(crate) fn trajectory_point(
    alpha: f64,
    mu: Vec<f64>,
    objective: f64,
    residual: f64,
    status: SolveStatus,
    u: &[f64],
) -> TrajectoryPoint {
    let norm = vecs::norm(&mu);
    let direction = vecs::normalized(&mu);
    let angle_to_u = match &direction {
        Some(w) => vecs::unit_angle(w, u),
        None => std::f64::consts::PI,
    };
    TrajectoryPoint {
        alpha,
        mu,
        norm,
        direction,
        angle_to_u,
        objective,
        residual,
        status,
    }
}

/// Whether the pair `(P, u)` satisfies the extreme-order hypotheses: the
/// support must not lie on a line with direction `+-u` (a single atom lies
/// on every line).
pub fn extreme_order_hypothesis(measure: &EmpiricalMeasure, u: &[f64]) -> bool {
    let line = measure.line_structure();
    if !line.on_line {
        return true;
    }
    match &line.direction {
        None => false, // single atom
        Some(u_star) => vecs::dot(u, u_star).abs() < 1.0 - 1e-9,
    }
}

/// Runs the sweep and reports the norm-divergence surrogate.
pub fn divergence_check(
    measure: &EmpiricalMeasure,
    u: &[f64],
    alphas: &[f64],
    opts: &SolveOptions,
) -> Result<DivergenceReport> {
    let curve = quantile_curve(measure, u, alphas, opts)?;
    Ok(divergence_report(measure, u, &curve))
}

/// Divergence surrogate evaluated on an already computed curve.
pub fn divergence_report(
    measure: &EmpiricalMeasure,
    u: &[f64],
    curve: &[TrajectoryPoint],
) -> DivergenceReport {
    let norms: Vec<f64> = curve.iter().map(|p| p.norm).collect();
    let tail_start = norms.len() / 2;
    let monotone_tail = norms[tail_start..]
        .windows(2)
        .all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let norm_at_max_alpha = *norms.last().unwrap_or(&0.0);
    let data_radius = measure.max_norm();
    // a Dirac at the origin pins the quantile there: ratio 1 by convention
    let ratio = if data_radius > 0.0 {
        norm_at_max_alpha / data_radius
    } else {
        1.0
    };
    DivergenceReport {
        hypothesis_ok: extreme_order_hypothesis(measure, u),
        monotone_tail,
        norm_at_max_alpha,
        data_radius,
        ratio,
    }
}

/// Runs the sweep and reports the direction-convergence surrogate.
pub fn direction_check(
    measure: &EmpiricalMeasure,
    u: &[f64],
    alphas: &[f64],
    opts: &SolveOptions,
) -> Result<DirectionReport> {
    let curve = quantile_curve(measure, u, alphas, opts)?;
    Ok(direction_report(measure, u, &curve))
}

/// Direction surrogate evaluated on an already computed curve.
pub fn direction_report(
    measure: &EmpiricalMeasure,
    u: &[f64],
    curve: &[TrajectoryPoint],
) -> DirectionReport {
    let angles: Vec<f64> = curve.iter().map(|p| p.angle_to_u).collect();
    let final_angle = *angles.last().unwrap_or(&std::f64::consts::PI);
    let midpoint = angles[angles.len() / 2];
    DirectionReport {
        hypothesis_ok: extreme_order_hypothesis(measure, u),
        decreasing_tail: final_angle < midpoint,
        angles,
        final_angle,
    }
}

/// Spatial depth of `z`: one minus the norm of the expected unit vector
/// field `E_P[(z - Z)/||z - Z||]` over `Z != z`.
///
/// At a certified non-atom quantile of order `alpha` this equals
/// `1 - alpha` up to the solver residual.
pub fn spatial_depth(measure: &EmpiricalMeasure, z: &[f64]) -> Result<f64> {
    if z.len() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: z.len(),
        });
    }
    let d = measure.dim();
    let mut acc = KahanVec::zeros(d);
    for (p, &w) in measure.points().iter().zip(measure.weights()) {
        let dist = vecs::dist(p, z);
        if dist == 0.0 {
            continue;
        }
        for i in 0..d {
            acc.add_coord(i, w * (z[i] - p[i]) / dist);
        }
    }
    Ok(1.0 - vecs::norm(&acc.into_vec()))
}

/// Objective values of the order-one problem along the ray `r * u`,
/// together with their gaps to the infimum. Values are non-increasing in
/// `r` and the gaps decrease to zero.
pub fn alpha_one_descent_profile(
    measure: &EmpiricalMeasure,
    u: &[f64],
    radii: &[f64],
) -> Result<Vec<DescentPoint>> {
    if radii.is_empty() {
        return Err(Error::EmptyInput);
    }
    for pair in radii.windows(2) {
        let increasing = pair[0] < pair[1];
        if !increasing {
            return Err(Error::Parse(format!(
                "radii must be strictly increasing, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    if radii[0] <= 0.0 {
        return Err(Error::ParameterOutOfRange {
            name: "radius",
            value: radii[0],
        });
    }
    let infimum = alpha_one_infimum(measure, u)?;
    radii
        .iter()
        .map(|&r| {
            let mu = vecs::scale(u, r);
            let value = objective_value(measure, 1.0, u, &mu)?;
            Ok(DescentPoint {
                r,
                value,
                gap: value - infimum,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{BuiltinExample, DEFAULT_SEED};
    use crate::solver::Uniqueness;

    fn sweep(from: f64, to: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn triangle_curve_starts_at_centroid() {
        let m = BuiltinExample::C.build(0);
        let alphas = sweep(0.001, 0.9, 40);
        let curve = quantile_curve(&m, &[1.0, 0.0], &alphas, &SolveOptions::default()).unwrap();
        assert_eq!(curve.len(), 40);
        assert!(
            curve[0].norm < 0.01,
            "median of the triangle is its centroid"
        );
        assert!(curve.iter().all(|p| p.status != SolveStatus::MaxIter));
    }

    #[test]
    fn on_line_direction_stays_bounded() {
        let m = BuiltinExample::B.build(DEFAULT_SEED);
        let alphas = sweep(0.1, 0.999, 30);
        let curve = quantile_curve(&m, &[1.0, 0.0], &alphas, &SolveOptions::default()).unwrap();
        let radius = m.max_norm();
        for p in &curve {
            assert!(p.mu[1].abs() < 1e-9, "quantile stays on the line");
            assert!(p.norm <= radius + 1e-9);
        }
        let report = divergence_report(&m, &[1.0, 0.0], &curve);
        assert!(!report.hypothesis_ok);
        assert!(report.ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn off_line_direction_diverges() {
        let m = BuiltinExample::B.build(DEFAULT_SEED);
        let alphas = sweep(0.5, 0.999, 51);
        let report = divergence_check(&m, &[0.0, 1.0], &alphas, &SolveOptions::default()).unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.ratio > 10.0, "ratio {}", report.ratio);
        assert!(report.monotone_tail);
    }

    #[test]
    fn direction_aligns_with_u() {
        let m = BuiltinExample::D.build(0);
        let u = [3.0_f64.sqrt() / 2.0, 0.5];
        let alphas = sweep(0.5, 0.999, 51);
        let report = direction_check(&m, &u, &alphas, &SolveOptions::default()).unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.decreasing_tail);
        assert!(
            report.final_angle < 0.1,
            "final angle {}",
            report.final_angle
        );
    }

    #[test]
    fn dirac_hypothesis_violated_for_all_directions() {
        let m = EmpiricalMeasure::from_points(vec![vec![1.0, 2.0]], None).unwrap();
        for u in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
            assert!(!extreme_order_hypothesis(&m, &u));
            let report =
                divergence_check(&m, &u, &sweep(0.5, 0.9, 5), &SolveOptions::default()).unwrap();
            assert!(!report.hypothesis_ok);
            assert!((report.norm_at_max_alpha - 5.0_f64.sqrt()).abs() < 1e-12);
            assert!((report.ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn angle_sequences_mirror_for_symmetric_measures() {
        let m = BuiltinExample::D.build(0);
        let u = [0.6, 0.8];
        let neg_u = [-0.6, -0.8];
        let alphas = sweep(0.3, 0.95, 14);
        let plus = direction_check(&m, &u, &alphas, &SolveOptions::default()).unwrap();
        let minus = direction_check(&m, &neg_u, &alphas, &SolveOptions::default()).unwrap();
        for (a, b) in plus.angles.iter().zip(&minus.angles) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn depth_fixtures() {
        let rect = BuiltinExample::D.build(0);
        assert_eq!(spatial_depth(&rect, &[0.0, 0.0]).unwrap(), 1.0);
        assert!(spatial_depth(&rect, &[1e6, 0.0]).unwrap() < 1e-5);
        // depth is within [0, 1] up to rounding
        for z in [[0.5, 0.5], [2.0, 1.0], [-3.0, 0.2]] {
            let depth = spatial_depth(&rect, &z).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&depth));
        }
    }

    #[test]
    fn depth_duality_at_solved_quantiles() {
        let m = BuiltinExample::A.build(DEFAULT_SEED);
        for alpha in [0.2, 0.4, 0.6, 0.8] {
            let sol = solve_quantile(&m, alpha, &[0.6, 0.8], &SolveOptions::default()).unwrap();
            assert_eq!(sol.uniqueness, Uniqueness::Unique);
            if !sol.atom_hit {
                let depth = spatial_depth(&m, &sol.mu).unwrap();
                assert!(
                    (depth - (1.0 - alpha)).abs() < 1e-8,
                    "alpha {alpha}: depth {depth}"
                );
            }
        }
    }

    #[test]
    fn descent_profile_triangle() {
        let m = BuiltinExample::C.build(0);
        let radii = [1.0, 10.0, 100.0, 1e6];
        let profile = alpha_one_descent_profile(&m, &[0.0, 1.0], &radii).unwrap();
        for pair in profile.windows(2) {
            assert!(pair[1].value <= pair[0].value + 1e-12);
            assert!(pair[1].gap <= pair[0].gap + 1e-12);
        }
        for p in &profile {
            assert!(p.gap >= -1e-12);
        }
        let last = profile.last().unwrap();
        assert!(last.gap < 1e-3);
        assert!((last.value - (-1.0)).abs() < 1e-3, "triangle limit is -1");
    }

    #[test]
    fn descent_profile_dirac_closed_form() {
        let m = EmpiricalMeasure::from_points(vec![vec![3.0, 4.0]], None).unwrap();
        let u = [0.0, 1.0];
        let radii = [1.0, 100.0, 1e4];
        let profile = alpha_one_descent_profile(&m, &u, &radii).unwrap();
        for p in &profile {
            let z_mu = [3.0, 4.0 - p.r];
            let expected = vecs::norm(&z_mu) - 5.0 - p.r;
            assert!((p.value - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn warm_and_cold_sweeps_agree() {
        let m = BuiltinExample::A.build(DEFAULT_SEED);
        let u = [0.0, 1.0];
        let alphas = sweep(0.1, 0.9, 17);
        let warm = quantile_curve(&m, &u, &alphas, &SolveOptions::default()).unwrap();
        let tol = crate::solver::DEFAULT_TOL_FACTOR * m.support_radius();
        for (&alpha, point) in alphas.iter().zip(&warm) {
            let cold = solve_quantile(&m, alpha, &u, &SolveOptions::default()).unwrap();
            let gap = vecs::dist(&cold.mu, &point.mu);
            assert!(gap <= 2.0 * tol, "alpha {alpha}: warm/cold gap {gap}");
        }
    }

    #[test]
    fn sweep_validation() {
        let m = BuiltinExample::C.build(0);
        assert!(quantile_curve(&m, &[1.0, 0.0], &[], &SolveOptions::default()).is_err());
        assert!(quantile_curve(&m, &[1.0, 0.0], &[0.5, 0.5], &SolveOptions::default()).is_err());
        assert!(quantile_curve(&m, &[1.0, 0.0], &[0.5, 1.0], &SolveOptions::default()).is_err());
        assert!(alpha_one_descent_profile(&m, &[1.0, 0.0], &[-1.0, 2.0]).is_err());
    }
}
