//! Computes spatial quantiles for empirical measures.
//!
//! The solver runs a damped Weiszfeld-type fixed-point iteration obtained
//! from the stationarity condition
//!
//! ```text
//! sum_i w_i (mu - z_i)/||mu - z_i|| = alpha u
//! ```
//!
//! with subdifferential certificates at atoms, and falls back to the exact
//! univariate reduction whenever the measure is concentrated on a line that
//! makes the problem one-dimensional (direction parallel to `u`, a single
//! atom, or `alpha = 0`).

use serde::{Deserialize, Serialize};

use crate::kahan::{KahanSum, KahanVec};
use crate::measure::{check_unit, dist_to_line, EmpiricalMeasure, DEFAULT_LINE_TOL};
use crate::objective::{objective_value, subgradient_unchecked, QuantileIndex, Subgradient};
use crate::vecs;
use crate::{Error, Result};

/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Default residual tolerance, relative to the support radius.
pub const DEFAULT_TOL_FACTOR: f64 = 1e-10;

/// Two unit vectors count as parallel when `|u'u*| >= 1 - PARALLEL_TOL`.
const PARALLEL_TOL: f64 = 1e-9;
/// Iterates closer than this (relative to the support radius) to a support
/// point snap onto it for the atom certificate test.
const ATOM_SNAP_FACTOR: f64 = 1e-13;
/// Support points within this fraction of the support radius get their
/// certificate tested opportunistically.
const ATOM_TEST_FACTOR: f64 = 0.1;
/// Escape displacement when the atom certificate fails (also the first
/// probe of the escape-ray search).
const ATOM_ESCAPE_FACTOR: f64 = 1e-6;
/// Margins this close to zero make the line-case uniqueness undecidable.
const MARGIN_BOUNDARY_TOL: f64 = 1e-9;
/// Residual level treated as the floating-point floor when polishing.
const RESIDUAL_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    ReducedToUnivariate,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::ReducedToUnivariate => "reduced_to_univariate",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    Unique,
    NonUniqueInterval,
    Unknown,
}

impl std::fmt::Display for Uniqueness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Uniqueness::Unique => "unique",
            Uniqueness::NonUniqueInterval => "non_unique_interval",
            Uniqueness::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Existence/uniqueness classification of the instance `(P, alpha, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessDiagnosis {
    /// Support not on a line: the quantile is unique for every index.
    UniqueNotOnLine,
    /// On a line whose direction differs from `+-u`, with `alpha > 0`:
    /// unique.
    UniqueAlphaPositiveOffDirection,
    /// On a line with direction `+-u`: minimizers form a segment of the
    /// line (possibly degenerate).
    PossiblyNonUniqueLineDirection,
    /// On a line with `alpha = 0`: minimizers form the weighted median
    /// segment.
    PossiblyNonUniqueMedianOnLine,
    /// A single atom carries all mass; the quantile is that atom.
    SingleAtom,
}

/// A computed spatial quantile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileSolution {
    pub mu: Vec<f64>,
    pub objective: f64,
    /// Distance from zero to the subdifferential at `mu`.
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Whether `mu` coincides exactly with a support point.
    pub atom_hit: bool,
    pub uniqueness: Uniqueness,
    /// Endpoints of the optimal segment when the minimizer is an interval.
    pub interval: Option<(Vec<f64>, Vec<f64>)>,
}

/// Solver options; `None` fields take the documented defaults.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Residual tolerance (default `1e-10 *` support radius).
    pub tol: Option<f64>,
    /// Iteration cap (default 10 000).
    pub max_iter: Option<usize>,
    /// Starting point (default: the weighted mean).
    pub warm_start: Option<Vec<f64>>,
}

/// The closed interval of minimizers for a line-concentrated measure,
/// reported through its endpoints and canonical midpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineQuantile {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub canonical: Vec<f64>,
}

/// Subdifferential optimality test at a candidate point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    pub residual: f64,
}

/// Radius of a ball (about the origin) that must contain every minimizer:
/// outside of `R = 2 R0 / (1 - alpha) * 1.01`, with `R0` the largest
/// support norm, the objective already exceeds its value at zero.
pub fn search_radius(measure: &EmpiricalMeasure, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "[0, 1)",
        });
    }
    Ok(2.0 * measure.max_norm() / (1.0 - alpha) * 1.01)
}

/// Optimality certificate at `mu`: `certified` iff the distance from zero
/// to the subdifferential is at most `tol`.
pub fn optimality_certificate(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
    tol: f64,
) -> Result<Certificate> {
    let sg = crate::objective::subgradient(measure, alpha, u, mu)?;
    let residual = sg.residual();
    Ok(Certificate {
        certified: residual <= tol,
        residual,
    })
}

/// Classifies the instance per the existence/uniqueness dichotomy.
pub fn uniqueness_diagnosis(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
) -> Result<UniquenessDiagnosis> {
    QuantileIndex::new(alpha, u.to_vec())?;
    check_unit(u, measure.dim())?;
    if measure.len() == 1 {
        return Ok(UniquenessDiagnosis::SingleAtom);
    }
    let line = measure.line_structure();
    if !line.on_line {
        return Ok(UniquenessDiagnosis::UniqueNotOnLine);
    }
    let u_star = line.direction.expect("multi-point line has a direction");
    if vecs::dot(u, &u_star).abs() >= 1.0 - PARALLEL_TOL {
        Ok(UniquenessDiagnosis::PossiblyNonUniqueLineDirection)
    } else if alpha == 0.0 {
        Ok(UniquenessDiagnosis::PossiblyNonUniqueMedianOnLine)
    } else {
        Ok(UniquenessDiagnosis::UniqueAlphaPositiveOffDirection)
    }
}

/// Minimizers of the one-dimensional reduction for a measure concentrated
/// on `{z0 + t u_star}`.
///
/// With `lambda_i = u_star'(z_i - z0)`, the minimizers of
/// `t -> sum_i w_i (|lambda_i - t| - |lambda_i|) - sign * alpha * t` form
/// the weighted quantile interval at cumulative level
/// `(1 + sign * alpha) / 2`; endpoints are mapped back to `R^d`.
pub fn univariate_quantile_on_line(
    measure: &EmpiricalMeasure,
    z0: &[f64],
    u_star: &[f64],
    alpha: f64,
    sign: i32,
) -> Result<LineQuantile> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "[0, 1)",
        });
    }
    check_unit(u_star, measure.dim())?;
    if z0.len() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: z0.len(),
        });
    }
    if sign != 1 && sign != -1 {
        return Err(Error::ParameterOutOfRange {
            name: "sign",
            value: sign as f64,
        });
    }
    let scale = measure.support_radius();
    for p in measure.points() {
        if dist_to_line(p, z0, u_star) > DEFAULT_LINE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotOnLine);
        }
    }
    let level = (1.0 + f64::from(sign) * alpha) / 2.0;
    Ok(line_quantile_at_level(measure, z0, u_star, level))
}

/// Weighted quantile interval at `level` on the line through `z0`.
/// Assumes the support has been checked to lie on the line.
pub(crate) fn line_quantile_at_level(
    measure: &EmpiricalMeasure,
    z0: &[f64],
    u_star: &[f64],
    level: f64,
) -> LineQuantile {
    let mut sample: Vec<(f64, f64)> = measure
        .points()
        .iter()
        .zip(measure.weights())
        .map(|(z, &w)| (vecs::dot(u_star, &vecs::sub(z, z0)), w))
        .collect();
    sample.sort_by(|a, b| a.0.total_cmp(&b.0));

    // weight-sum comparisons share the construction-time 1e-12 tolerance
    const EPS: f64 = 1e-12;
    let mut cumulative = KahanSum::new();
    let mut lo = sample[sample.len() - 1].0;
    let mut hi = lo;
    for (j, &(lambda, w)) in sample.iter().enumerate() {
        cumulative.add(w);
        let c = cumulative.value();
        if c >= level - EPS {
            lo = lambda;
            hi = if (c - level).abs() <= EPS && j + 1 < sample.len() {
                sample[j + 1].0
            } else {
                lambda
            };
            break;
        }
    }

    let point_at = |t: f64| vecs::add_scaled(z0, t, u_star);
    LineQuantile {
        lo: point_at(lo),
        hi: point_at(hi),
        canonical: point_at(0.5 * (lo + hi)),
    }
}

/// Computes a spatial quantile of order `alpha` in direction `u`.
///
/// Line-concentrated measures with `u` parallel to the line (or a single
/// atom, or `alpha = 0`) are solved exactly by the univariate reduction and
/// reported with `status = ReducedToUnivariate` and the full optimal
/// interval. Everything else runs the damped fixed-point iteration; when an
/// iterate lands on a support point the subdifferential certificate decides
/// between returning the atom and escaping along the negative subgradient.
pub fn solve_quantile(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    opts: &SolveOptions,
) -> Result<QuantileSolution> {
    QuantileIndex::new(alpha, u.to_vec())?;
    check_unit(u, measure.dim())?;
    if let Some(t) = opts.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::ParameterOutOfRange {
                name: "tol",
                value: t,
            });
        }
    }
    if let Some(ws) = &opts.warm_start {
        if ws.len() != measure.dim() {
            return Err(Error::DimensionMismatch {
                expected: measure.dim(),
                got: ws.len(),
            });
        }
    }

    // Single atom: the quantile is the atom for every index.
    if measure.len() == 1 {
        let mu = measure.point(0).to_vec();
        return Ok(finish_reduced(
            measure,
            alpha,
            u,
            mu,
            None,
            Uniqueness::Unique,
        ));
    }

    let scale = measure.support_radius();
    let tol = opts.tol.unwrap_or(DEFAULT_TOL_FACTOR * scale);
    let max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);

    let line = measure.line_structure();
    if line.on_line {
        let u_star = line
            .direction
            .clone()
            .expect("multi-point line has a direction");
        let align = vecs::dot(u, &u_star);
        if alpha == 0.0 || align.abs() >= 1.0 - PARALLEL_TOL {
            let sign = if align >= 0.0 { 1.0 } else { -1.0 };
            let level = (1.0 + sign * alpha) / 2.0;
            let base = line
                .base
                .as_ref()
                .expect("on-line verdict carries a base point");
            let lq = line_quantile_at_level(measure, base, &u_star, level);
            let degenerate = lq.lo == lq.hi;
            let uniqueness = if degenerate {
                Uniqueness::Unique
            } else {
                Uniqueness::NonUniqueInterval
            };
            let interval = (!degenerate).then(|| (lq.lo.clone(), lq.hi.clone()));
            return Ok(finish_reduced(
                measure,
                alpha,
                u,
                lq.canonical,
                interval,
                uniqueness,
            ));
        }
    }

    let uniqueness = weiszfeld_uniqueness(measure, alpha, u, &line);
    weiszfeld(measure, alpha, u, opts, tol, max_iter, scale, uniqueness)
}

fn finish_reduced(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: Vec<f64>,
    interval: Option<(Vec<f64>, Vec<f64>)>,
    uniqueness: Uniqueness,
) -> QuantileSolution {
    let sg = subgradient_unchecked(measure, alpha, u, &mu);
    let objective = objective_value(measure, alpha, u, &mu).expect("validated inputs");
    QuantileSolution {
        atom_hit: measure.atom_index(&mu).is_some(),
        mu,
        objective,
        residual: sg.residual(),
        iterations: 0,
        status: SolveStatus::ReducedToUnivariate,
        uniqueness,
        interval,
    }
}

/// Uniqueness verdict for the fixed-point path. Off-line supports are
/// always unique; line-concentrated supports with `u` off the line
/// direction are unique except at the boundary where the minimal line
/// derivative vanishes, which is reported as `Unknown`.
fn weiszfeld_uniqueness(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    line: &crate::measure::LineStructure,
) -> Uniqueness {
    if !line.on_line {
        return Uniqueness::Unique;
    }
    let u_star = line
        .direction
        .as_ref()
        .expect("multi-point line has a direction");
    let base = line
        .base
        .as_ref()
        .expect("on-line verdict carries a base point");
    let level = (1.0 + alpha * vecs::dot(u, u_star)) / 2.0;
    let lq = line_quantile_at_level(measure, base, u_star, level);
    let mut candidates = vec![lq.canonical.clone()];
    if lq.lo != lq.hi {
        candidates.push(lq.lo.clone());
        candidates.push(lq.hi.clone());
    }
    let mut margin = f64::NEG_INFINITY;
    for c in &candidates {
        if let Ok((_, atom, pull)) = crate::objective::line_quantities(measure, alpha, u, c) {
            margin = margin.max(atom - vecs::norm(&pull));
        }
    }
    if margin.is_finite() && margin.abs() <= MARGIN_BOUNDARY_TOL {
        Uniqueness::Unknown
    } else {
        Uniqueness::Unique
    }
}

struct Iterate {
    mu: Vec<f64>,
    objective: f64,
    residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn weiszfeld(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    opts: &SolveOptions,
    tol: f64,
    max_iter: usize,
    scale: f64,
    uniqueness: Uniqueness,
) -> Result<QuantileSolution> {
    let eval = |mu: &[f64]| objective_value(measure, alpha, u, mu).expect("validated inputs");
    let mut mu = opts
        .warm_start
        .clone()
        .unwrap_or_else(|| measure.weighted_mean());

    let mut best = Iterate {
        objective: eval(&mu),
        residual: subgradient_unchecked(measure, alpha, u, &mu).residual(),
        mu: mu.clone(),
    };
    // iterations since the residual last improved by at least 1%
    let mut stall = 0usize;

    let mut iterations = 0usize;
    while iterations < max_iter {
        iterations += 1;

        let sg = subgradient_unchecked(measure, alpha, u, &mu);
        let residual = sg.residual();
        let f_mu = eval(&mu);
        if residual < 0.99 * best.residual {
            stall = 0;
        } else {
            stall += 1;
        }
        if residual < best.residual {
            best = Iterate {
                mu: mu.clone(),
                objective: f_mu,
                residual,
            };
        }
        if best.residual <= RESIDUAL_FLOOR {
            break;
        }
        if best.residual <= tol && stall >= 4 {
            break; // converged and polished as far as the iteration goes
        }

        // Atom handling. The fixed-point map degenerates around support
        // points: its contraction factor approaches one as the pull/mass
        // ratio does, both when converging to a minimizer at or near an
        // atom and when escaping an atom that stopped being optimal. Three
        // remedies, all driven by the nearest support point:
        //   * a certified atom is a global minimizer no matter where the
        //     iterate is, so return it outright;
        //   * an iterate essentially on an uncertified atom restarts at the
        //     minimizer of the objective along the negative smooth part;
        //   * near an uncertified atom, that same ray minimizer competes
        //     with the (possibly crawling) fixed-point step below.
        let mut near_atom: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        if let Some(k) = nearest_atom(measure, &mu, ATOM_TEST_FACTOR * scale) {
            let z_k = measure.point(k).to_vec();
            let sg_k = subgradient_unchecked(measure, alpha, u, &z_k);
            let res_k = sg_k.residual();
            if res_k <= tol {
                let objective = eval(&z_k);
                return Ok(QuantileSolution {
                    mu: z_k,
                    objective,
                    residual: res_k,
                    iterations,
                    status: SolveStatus::Converged,
                    atom_hit: true,
                    uniqueness,
                    interval: None,
                });
            }
            let dir = vecs::normalized(&sg_k.smooth_part)
                .expect("failed certificate implies a nonzero smooth part");
            let gap = vecs::dist(&z_k, &mu);
            if gap <= ATOM_SNAP_FACTOR * scale {
                mu = ray_restart(measure, alpha, u, &z_k, &dir, scale);
                continue;
            }
            near_atom = Some((z_k, dir, gap));
        }

        let Some(step) = weiszfeld_step(measure, alpha, u, &mu) else {
            // every support point coincides with mu numerically; nothing
            // better to do
            break;
        };

        // The fixed-point step is a majorize-minimize step, so it cannot
        // increase the objective beyond evaluation noise; damp by halving
        // when it does, and extrapolate outward while the objective keeps
        // strictly improving (the plain iteration contracts slowly for
        // orders near one).
        let f_noise = 1e-13 * (1.0 + f_mu.abs());
        let mut cand = step.clone();
        let mut f_cand = eval(&cand);
        if f_cand > f_mu + f_noise {
            let mut halvings = 0;
            while f_cand > f_mu + f_noise && halvings < 64 {
                cand = vecs::midpoint(&mu, &cand);
                f_cand = eval(&cand);
                halvings += 1;
            }
            if f_cand > f_mu + f_noise {
                // inside the floating-point-flat region; trust the raw step
                cand = step;
            }
        } else if f_cand < f_mu - f_noise {
            let displacement = vecs::sub(&cand, &mu);
            let mut factor = 2.0;
            for _ in 0..60 {
                let trial = vecs::add_scaled(&mu, factor, &displacement);
                let f_trial = eval(&trial);
                if f_trial < f_cand {
                    cand = trial;
                    f_cand = f_trial;
                    factor *= 2.0;
                } else {
                    break;
                }
            }
        }
        // A short step beside an uncertified atom is the crawl signature;
        // let the ray minimizer through the atom compete with it. It wins
        // on a clear stationarity improvement that does not regress the
        // objective, so the fixed-point polish near an optimum off the ray
        // is never disturbed.
        if let Some((z_k, dir, gap)) = near_atom {
            if vecs::dist(&cand, &mu) < 0.5 * gap {
                let point = ray_restart(measure, alpha, u, &z_k, &dir, scale);
                let res_point = subgradient_unchecked(measure, alpha, u, &point).residual();
                if res_point < 0.5 * residual && eval(&point) <= f_mu + f_noise {
                    cand = point;
                }
            }
        }

        // Newton step on the exact smooth Hessian, under the same guards.
        // The fixed-point map contracts like one minus the inverse of the
        // Hessian condition number, which degenerates near atoms and in
        // the flat valleys of nearly-one-dimensional supports; the Newton
        // candidate converges quadratically there and is rejected wherever
        // the quadratic model is not trustworthy.
        if sg.atom_mass == 0.0 {
            if let Some(point) = newton_candidate(measure, &sg.smooth_part, &mu) {
                let res_point = subgradient_unchecked(measure, alpha, u, &point).residual();
                let res_cand = subgradient_unchecked(measure, alpha, u, &cand).residual();
                if res_point < 0.5 * res_cand.min(residual) && eval(&point) <= f_mu + f_noise {
                    cand = point;
                }
            }
        }
        mu = cand;
    }

    let status = if best.residual <= tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok(QuantileSolution {
        atom_hit: measure.atom_index(&best.mu).is_some(),
        mu: best.mu,
        objective: best.objective,
        residual: best.residual,
        iterations,
        status,
        uniqueness,
        interval: None,
    })
}

/// One fixed-point step `mu <- (sum_i w_i z_i/d_i + alpha u) / (sum_i w_i/d_i)`,
/// skipping support points coinciding with `mu`. Returns `None` when every
/// point coincides.
fn weiszfeld_step(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
) -> Option<Vec<f64>> {
    let d = measure.dim();
    let mut numerator = KahanVec::zeros(d);
    let mut denominator = KahanSum::new();
    let mut any = false;
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        let dist = vecs::dist(z, mu);
        if dist == 0.0 {
            continue;
        }
        any = true;
        numerator.add_scaled(z, w / dist);
        denominator.add(w / dist);
    }
    if !any {
        return None;
    }
    numerator.add_scaled(u, alpha);
    let den = denominator.value();
    Some(vecs::scale(&numerator.into_vec(), 1.0 / den))
}

/// Restart point after a failed atom certificate: the minimizer of the
/// objective along the escape ray `z_k - t * g_hat`, `t > 0`.
///
/// The ray objective is convex with a strictly negative one-sided
/// derivative at zero, so its slope (computable to machine precision from
/// the subgradient, unlike objective differences, which flatten out in
/// floating point) has a unique sign change. A doubling bracket from the
/// standard escape displacement plus bisection finds it without the
/// multiplicative crawl the raw fixed-point map suffers near support
/// points.
fn ray_restart(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    z_k: &[f64],
    g_hat: &[f64],
    scale: f64,
) -> Vec<f64> {
    let at = |t: f64| -> Vec<f64> { vecs::add_scaled(z_k, -t, g_hat) };
    let slope = |t: f64| -> f64 {
        let sg = subgradient_unchecked(measure, alpha, u, &at(t));
        -vecs::dot(g_hat, &sg.smooth_part)
    };

    let mut hi = ATOM_ESCAPE_FACTOR * scale;
    let mut lo = 0.0;
    for _ in 0..100 {
        if slope(hi) >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..110 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Newton step `mu - H^{-1} g` on the smooth part of the objective, whose
/// Hessian at a non-atom point is `sum_i (w_i/d_i) (I - e_i e_i')` with
/// `e_i = (mu - z_i)/d_i`. Returns `None` when the Hessian is singular
/// (support and `mu` on a common line) or the elimination breaks down.
#[allow(clippy::needless_range_loop)]
fn newton_candidate(measure: &EmpiricalMeasure, g: &[f64], mu: &[f64]) -> Option<Vec<f64>> {
    let d = measure.dim();
    let mut h = vec![vec![0.0; d]; d];
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        let dist = vecs::dist(z, mu);
        if dist == 0.0 {
            return None;
        }
        let factor = w / dist;
        for i in 0..d {
            let e_i = (mu[i] - z[i]) / dist;
            for j in 0..d {
                let e_j = (mu[j] - z[j]) / dist;
                let delta = if i == j { 1.0 } else { 0.0 };
                h[i][j] += factor * (delta - e_i * e_j);
            }
        }
    }

    // Gaussian elimination with partial pivoting on [H | -g]
    let mut rhs: Vec<f64> = g.iter().map(|x| -x).collect();
    let pivot_floor = 1e-14
        * h.iter()
            .enumerate()
            .map(|(i, row)| row[i].abs())
            .sum::<f64>();
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&a, &b| h[a][col].abs().total_cmp(&h[b][col].abs()))
            .unwrap();
        if h[pivot_row][col].abs() <= pivot_floor {
            return None;
        }
        h.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in (col + 1)..d {
            let m = h[row][col] / h[col][col];
            for k in col..d {
                h[row][k] -= m * h[col][k];
            }
            rhs[row] -= m * rhs[col];
        }
    }
    let mut delta = vec![0.0; d];
    for row in (0..d).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..d {
            acc -= h[row][k] * delta[k];
        }
        delta[row] = acc / h[row][row];
        if !delta[row].is_finite() {
            return None;
        }
    }
    Some(vecs::add(mu, &delta))
}

fn nearest_atom(measure: &EmpiricalMeasure, mu: &[f64], radius: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, z) in measure.points().iter().enumerate() {
        let dist = vecs::dist(z, mu);
        if dist <= radius {
            match best {
                Some((_, d)) if d <= dist => {}
                _ => best = Some((k, dist)),
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Direct access to the subgradient structure used by the certificates.
pub fn solution_subgradient(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
) -> Result<Subgradient> {
    crate::objective::subgradient(measure, alpha, u, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{BuiltinExample, DEFAULT_SEED};

    fn uniform(points: Vec<Vec<f64>>) -> EmpiricalMeasure {
        EmpiricalMeasure::from_points(points, None).unwrap()
    }

    fn three_on_axis() -> EmpiricalMeasure {
        uniform(vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]])
    }

    fn five_on_axis() -> EmpiricalMeasure {
        uniform((-2..=2).map(|k| vec![k as f64, 0.0]).collect())
    }

    #[test]
    fn search_radius_fixtures() {
        let unit_ball = uniform(vec![vec![1.0, 0.0], vec![-0.5, 0.5]]);
        let r = search_radius(&unit_ball, 0.0).unwrap();
        assert!((r - 2.02).abs() < 1e-12);

        let dirac0 = uniform(vec![vec![0.0, 0.0]]);
        assert_eq!(search_radius(&dirac0, 0.7).unwrap(), 0.0);

        let far = uniform(vec![vec![2.0, 2.0], vec![-2.0, -2.0]]);
        let r = search_radius(&far, 0.999).unwrap();
        let expected = 2.0 * 8.0_f64.sqrt() / 0.001 * 1.01;
        assert!((r - expected).abs() < 1e-6);

        assert!(search_radius(&far, 1.0).is_err());
    }

    #[test]
    fn unique_on_line_fixture() {
        // alpha below the atom mass 1/3 keeps the quantile at the median atom
        let m = three_on_axis();
        let sol = solve_quantile(&m, 0.2, &[0.0, 1.0], &SolveOptions::default()).unwrap();
        assert!(vecs::norm(&sol.mu) < 1e-6);
        assert!(sol.atom_hit);
        assert_eq!(sol.uniqueness, Uniqueness::Unique);
        assert_eq!(sol.status, SolveStatus::Converged);
    }

    #[test]
    fn non_unique_interval_fixture() {
        let m = five_on_axis();
        let sol = solve_quantile(&m, 0.6, &[1.0, 0.0], &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::ReducedToUnivariate);
        assert_eq!(sol.uniqueness, Uniqueness::NonUniqueInterval);
        let (lo, hi) = sol.interval.clone().unwrap();
        assert!((lo[0] - 1.0).abs() < 1e-12 && lo[1].abs() < 1e-12);
        assert!((hi[0] - 2.0).abs() < 1e-12 && hi[1].abs() < 1e-12);
        assert!((sol.mu[0] - 1.5).abs() < 1e-12);
        assert!((sol.objective - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn dirac_is_immediate() {
        let m = uniform(vec![vec![3.0, 4.0]]);
        for alpha in [0.0, 0.5, 0.999] {
            let sol = solve_quantile(&m, alpha, &[0.6, 0.8], &SolveOptions::default()).unwrap();
            assert_eq!(sol.mu, vec![3.0, 4.0]);
            assert_eq!(sol.residual, 0.0);
            assert!(sol.atom_hit);
            assert_eq!(sol.uniqueness, Uniqueness::Unique);
        }
    }

    #[test]
    fn rectangle_median_is_center() {
        let m = BuiltinExample::D.build(0);
        let sol = solve_quantile(&m, 0.0, &[1.0, 0.0], &SolveOptions::default()).unwrap();
        assert!(vecs::norm(&sol.mu) < 1e-9);
        assert_eq!(sol.status, SolveStatus::Converged);
        assert_eq!(sol.uniqueness, Uniqueness::Unique);
    }

    #[test]
    fn univariate_reduction_fixtures() {
        let m = five_on_axis();
        let z0 = [0.0, 0.0];
        let u_star = [1.0, 0.0];

        let q = univariate_quantile_on_line(&m, &z0, &u_star, 0.6, 1).unwrap();
        assert!((q.lo[0] - 1.0).abs() < 1e-12);
        assert!((q.hi[0] - 2.0).abs() < 1e-12);
        assert!((q.canonical[0] - 1.5).abs() < 1e-12);

        let med = univariate_quantile_on_line(&m, &z0, &u_star, 0.0, 1).unwrap();
        assert_eq!(med.lo, med.hi);
        assert!(med.lo[0].abs() < 1e-12);

        let mirror = univariate_quantile_on_line(&m, &z0, &u_star, 0.6, -1).unwrap();
        assert!((mirror.lo[0] - (-2.0)).abs() < 1e-12);
        assert!((mirror.hi[0] - (-1.0)).abs() < 1e-12);

        assert!(matches!(
            univariate_quantile_on_line(&m, &z0, &[0.0, 1.0], 0.5, 1),
            Err(Error::NotOnLine)
        ));
        assert!(matches!(
            univariate_quantile_on_line(&m, &z0, &u_star, 0.5, 2),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }

    #[test]
    fn median_reduction_on_line_for_any_direction() {
        // alpha = 0 on a line reduces to the weighted median interval even
        // when u points off the line
        let m = uniform(vec![
            vec![-1.0, 0.0],
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
        ]);
        let sol = solve_quantile(&m, 0.0, &[0.0, 1.0], &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::ReducedToUnivariate);
        assert_eq!(sol.uniqueness, Uniqueness::NonUniqueInterval);
        let (lo, hi) = sol.interval.unwrap();
        assert!((lo[0] - 0.0).abs() < 1e-12);
        assert!((hi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_inputs_reduce_to_ordinary_quantiles() {
        // every measure on the real line is line-concentrated, so the
        // reduction applies for both unit directions
        let m = uniform(vec![vec![1.0], vec![2.0], vec![3.0], vec![5.0]]);
        let sol = solve_quantile(&m, 0.5, &[1.0], &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::ReducedToUnivariate);
        let (lo, hi) = sol.interval.clone().unwrap();
        assert!((lo[0] - 3.0).abs() < 1e-12);
        assert!((hi[0] - 5.0).abs() < 1e-12);
        assert!((sol.mu[0] - 4.0).abs() < 1e-12);

        // level (1 - 0.5)/2 = 0.25 lands exactly on the first cumulative
        // weight, so the whole segment [1, 2] minimizes
        let down = solve_quantile(&m, 0.5, &[-1.0], &SolveOptions::default()).unwrap();
        let (lo, hi) = down.interval.clone().unwrap();
        assert!((lo[0] - 1.0).abs() < 1e-12 && (hi[0] - 2.0).abs() < 1e-12);
        assert!((down.mu[0] - 1.5).abs() < 1e-12);

        let median = solve_quantile(&m, 0.0, &[1.0], &SolveOptions::default()).unwrap();
        let (lo, hi) = median.interval.unwrap();
        assert!((lo[0] - 2.0).abs() < 1e-12 && (hi[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_dimensional_octahedron() {
        let mut points = Vec::new();
        for i in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut p = vec![0.0; 3];
                p[i] = sign;
                points.push(p);
            }
        }
        let m = uniform(points);

        let median = solve_quantile(&m, 0.0, &[1.0, 0.0, 0.0], &SolveOptions::default()).unwrap();
        assert!(vecs::norm(&median.mu) < 1e-9, "median at the center");

        let u = [0.0, 0.0, 1.0];
        let sol = solve_quantile(&m, 0.5, &u, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!(
            sol.mu[0].abs() < 1e-9 && sol.mu[1].abs() < 1e-9,
            "on the symmetry axis"
        );
        assert!(sol.mu[2] > 0.1);
        if !sol.atom_hit {
            let depth = crate::asymptotics::spatial_depth(&m, &sol.mu).unwrap();
            assert!((depth - 0.5).abs() < 1e-8);
        }
        let cert = optimality_certificate(&m, 0.5, &u, &sol.mu, 1e-8).unwrap();
        assert!(cert.certified);
    }

    #[test]
    fn measures_and_solutions_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<EmpiricalMeasure>();
        assert_send_sync::<QuantileSolution>();
        assert_send_sync::<crate::measure::LineStructure>();

        let m = std::sync::Arc::new(BuiltinExample::D.build(0));
        let handles: Vec<_> = (1..=4)
            .map(|k| {
                let m = std::sync::Arc::clone(&m);
                std::thread::spawn(move || {
                    let alpha = k as f64 / 8.0;
                    solve_quantile(&m, alpha, &[0.0, 1.0], &SolveOptions::default()).unwrap()
                })
            })
            .collect();
        for handle in handles {
            let sol = handle.join().unwrap();
            assert_ne!(sol.status, SolveStatus::MaxIter);
        }
    }

    #[test]
    fn diagnosis_matches_line_geometry() {
        let a = BuiltinExample::A.build(DEFAULT_SEED);
        assert_eq!(
            uniqueness_diagnosis(&a, 0.5, &[1.0, 0.0]).unwrap(),
            UniquenessDiagnosis::UniqueNotOnLine
        );
        let b = BuiltinExample::B.build(DEFAULT_SEED);
        assert_eq!(
            uniqueness_diagnosis(&b, 0.5, &[0.0, 1.0]).unwrap(),
            UniquenessDiagnosis::UniqueAlphaPositiveOffDirection
        );
        assert_eq!(
            uniqueness_diagnosis(&b, 0.5, &[1.0, 0.0]).unwrap(),
            UniquenessDiagnosis::PossiblyNonUniqueLineDirection
        );
        assert_eq!(
            uniqueness_diagnosis(&b, 0.0, &[0.0, 1.0]).unwrap(),
            UniquenessDiagnosis::PossiblyNonUniqueMedianOnLine
        );
        let dirac = uniform(vec![vec![1.0, 2.0]]);
        assert_eq!(
            uniqueness_diagnosis(&dirac, 0.5, &[1.0, 0.0]).unwrap(),
            UniquenessDiagnosis::SingleAtom
        );
    }

    #[test]
    fn certificate_fixtures() {
        let rect = BuiltinExample::D.build(0);
        let cert = optimality_certificate(&rect, 0.0, &[1.0, 0.0], &[0.0, 0.0], 1e-12).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.residual, 0.0);

        let m = five_on_axis();
        let cert = optimality_certificate(&m, 0.6, &[1.0, 0.0], &[1.5, 0.0], 1e-12).unwrap();
        assert!(
            cert.certified,
            "interior of the optimal segment is stationary"
        );

        let off = optimality_certificate(&m, 0.6, &[1.0, 0.0], &[0.0, 0.5], 1e-12).unwrap();
        assert!(!off.certified);
    }

    #[test]
    fn converged_solutions_are_certified() {
        let m = BuiltinExample::A.build(DEFAULT_SEED);
        for (alpha, u) in [(0.3, [1.0, 0.0]), (0.7, [0.0, 1.0]), (0.9, [-0.6, 0.8])] {
            let sol = solve_quantile(&m, alpha, &u, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Converged);
            let tol = DEFAULT_TOL_FACTOR * m.support_radius();
            assert!(sol.residual <= tol, "residual {}", sol.residual);
            let cert = optimality_certificate(&m, alpha, &u, &sol.mu, tol).unwrap();
            assert!(cert.certified);
        }
    }

    #[test]
    fn off_direction_line_case_leaves_line_when_margin_negative() {
        // alpha above the atom mass: the minimizer leaves the x-axis
        let m = three_on_axis();
        let sol = solve_quantile(&m, 0.5, &[0.0, 1.0], &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!(
            sol.mu[1] > 1e-3,
            "minimizer should move off the line, got {:?}",
            sol.mu
        );
        assert_eq!(sol.uniqueness, Uniqueness::Unique);
    }

    #[test]
    fn minimizer_within_search_radius() {
        let m = BuiltinExample::D.build(0);
        for alpha in [0.0, 0.5, 0.9, 0.99] {
            let sol = solve_quantile(&m, alpha, &[0.6, 0.8], &SolveOptions::default()).unwrap();
            let r = search_radius(&m, alpha).unwrap();
            assert!(vecs::norm(&sol.mu) <= r);
        }
    }

    #[test]
    fn warm_start_on_wrong_atom_escapes() {
        let m = five_on_axis();
        let opts = SolveOptions {
            warm_start: Some(vec![-2.0, 0.0]),
            ..SolveOptions::default()
        };
        // u off the line so the fixed-point path runs
        let sol = solve_quantile(&m, 0.4, &[0.0, 1.0], &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!(sol.residual <= DEFAULT_TOL_FACTOR * m.support_radius());
    }

    #[test]
    fn invalid_inputs_error() {
        let m = three_on_axis();
        assert!(solve_quantile(&m, 1.0, &[1.0, 0.0], &SolveOptions::default()).is_err());
        assert!(solve_quantile(&m, 0.5, &[1.0, 1.0], &SolveOptions::default()).is_err());
        let bad_tol = SolveOptions {
            tol: Some(0.0),
            ..SolveOptions::default()
        };
        assert!(solve_quantile(&m, 0.5, &[0.0, 1.0], &bad_tol).is_err());
        let bad_ws = SolveOptions {
            warm_start: Some(vec![1.0]),
            ..SolveOptions::default()
        };
        assert!(solve_quantile(&m, 0.5, &[0.0, 1.0], &bad_ws).is_err());
    }
}
