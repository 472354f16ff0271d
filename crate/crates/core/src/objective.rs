//! The quantile objective, its subgradients and directional derivatives,
//! and the order-one limit quantities.
//!
//! For a measure `P`, order `alpha` and unit direction `u`, the objective is
//!
//! ```text
//! O(mu) = sum_i w_i ( ||z_i - mu|| - ||z_i|| - alpha * u' mu )
//! ```
//!
//! a convex function of `mu` whose minimizers are the spatial quantiles.
//! The subtraction of `||z_i||` makes the sum moment-free; it changes the
//! objective by a constant only.

use serde::{Deserialize, Serialize};

use crate::kahan::{KahanSum, KahanVec};
use crate::measure::{check_unit, dist_to_line, tail_integral, EmpiricalMeasure, DEFAULT_LINE_TOL};
use crate::vecs;
use crate::{Error, Result};

/// A quantile label: order `alpha in [0, 1)` and unit direction `u`,
/// equivalently the point `alpha * u` of the open unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileIndex {
    alpha: f64,
    u: Vec<f64>,
}

impl QuantileIndex {
    /// Validates `0 <= alpha < 1` and `||u|| = 1` (within 1e-9).
    pub fn new(alpha: f64, u: Vec<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange {
                alpha,
                range: "[0, 1)",
            });
        }
        let n = vecs::norm(&u);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitDirection { norm: n });
        }
        Ok(Self { alpha, u })
    }

    /// Builds the index from a point `gamma` of the open unit ball
    /// (`alpha = ||gamma||`, `u = gamma / ||gamma||`; the direction of the
    /// ball center is taken as the first coordinate axis).
    pub fn from_ball(gamma: &[f64]) -> Result<Self> {
        let alpha = vecs::norm(gamma);
        if alpha >= 1.0 {
            return Err(Error::AlphaOutOfRange {
                alpha,
                range: "[0, 1)",
            });
        }
        let u = match vecs::normalized(gamma) {
            Some(u) => u,
            None => {
                let mut e = vec![0.0; gamma.len()];
                e[0] = 1.0;
                e
            }
        };
        Ok(Self { alpha, u })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn direction(&self) -> &[f64] {
        &self.u
    }

    /// The ball representation `alpha * u`.
    pub fn ball_point(&self) -> Vec<f64> {
        vecs::scale(&self.u, self.alpha)
    }
}

/// The subdifferential of the objective at `mu` is the ball
/// `{ smooth_part + atom_mass * b : ||b|| <= 1 }`; zero belongs to it if
/// and only if `||smooth_part|| <= atom_mass`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subgradient {
    /// `sum_{z_i != mu} w_i (mu - z_i)/||mu - z_i||  -  alpha * u`
    pub smooth_part: Vec<f64>,
    /// `P[{mu}]`
    pub atom_mass: f64,
}

impl Subgradient {
    /// Distance from zero to the subdifferential.
    pub fn residual(&self) -> f64 {
        (vecs::norm(&self.smooth_part) - self.atom_mass).max(0.0)
    }

    /// Whether zero is a subgradient (within `tol`).
    pub fn certifies_optimality(&self, tol: f64) -> bool {
        self.residual() <= tol
    }
}

fn check_alpha_closed(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "[0, 1)",
        });
    }
    Ok(())
}

fn check_point(mu: &[f64], dim: usize) -> Result<()> {
    if mu.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: mu.len(),
        });
    }
    Ok(())
}

/// Evaluates the objective. `alpha = 1` is admitted for asymptotic
/// diagnostics even though no minimizer exists there.
pub fn objective_value(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
) -> Result<f64> {
    check_alpha_closed(alpha)?;
    check_unit(u, measure.dim())?;
    check_point(mu, measure.dim())?;
    let drift = alpha * vecs::dot(u, mu);
    let mut acc = KahanSum::new();
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        acc.add(w * (vecs::dist(z, mu) - vecs::norm(z) - drift));
    }
    Ok(acc.value())
}

/// The subgradient structure at `mu` (atom detection is by exact
/// coordinate equality against the merged support).
pub fn subgradient(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
) -> Result<Subgradient> {
    check_alpha_open(alpha)?;
    check_unit(u, measure.dim())?;
    check_point(mu, measure.dim())?;
    Ok(subgradient_unchecked(measure, alpha, u, mu))
}

pub(crate) fn subgradient_unchecked(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
) -> Subgradient {
    let d = measure.dim();
    let mut acc = KahanVec::zeros(d);
    let mut atom_mass = 0.0;
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        if z.iter().zip(mu).all(|(a, b)| a == b) {
            atom_mass = w;
            continue;
        }
        let dist = vecs::dist(z, mu);
        for i in 0..d {
            acc.add_coord(i, w * (mu[i] - z[i]) / dist);
        }
    }
    acc.add_scaled(u, -alpha);
    Subgradient {
        smooth_part: acc.into_vec(),
        atom_mass,
    }
}

/// One-sided directional derivative of the objective at `mu` in the unit
/// direction `v`:
///
/// ```text
/// lim_{h -> 0+} [O(mu + h v) - O(mu)] / h
///   = sum_{z_i != mu} w_i v'(mu - z_i)/||mu - z_i||  +  P[{mu}]  -  alpha u'v
/// ```
pub fn directional_derivative(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
    v: &[f64],
) -> Result<f64> {
    check_alpha_closed(alpha)?;
    check_unit(u, measure.dim())?;
    check_point(mu, measure.dim())?;
    check_unit(v, measure.dim())?;
    let mut acc = KahanSum::new();
    let mut atom_mass = 0.0;
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        if z.iter().zip(mu).all(|(a, b)| a == b) {
            atom_mass = w;
            continue;
        }
        let dist = vecs::dist(z, mu);
        acc.add(w * (vecs::dot(v, mu) - vecs::dot(v, z)) / dist);
    }
    acc.add(atom_mass);
    acc.add(-alpha * vecs::dot(u, v));
    Ok(acc.value())
}

/// Directional-derivative structure at a point `mu_star` of the line a
/// measure is concentrated on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineDerivative {
    /// The derivative `atom_at_zero - v'(s_p u* + alpha u)` in direction `v`.
    pub value: f64,
    /// `E[sign(Lambda)]` for `Lambda = u*'(Z - mu_star)`.
    pub s_p: f64,
    /// Mass of the atom at `mu_star`.
    pub atom_at_zero: f64,
    /// The direction minimizing the derivative over the unit sphere.
    pub v0: Vec<f64>,
    /// The minimal derivative `atom_at_zero - ||s_p u* + alpha u||`; the
    /// point `mu_star` minimizes the objective over all of `R^d` iff
    /// `m >= 0`.
    pub m: f64,
}

/// Directional derivative at `mu_star` for a line-concentrated measure,
/// via the one-dimensional reduction (`Lambda`-sample, signs and the atom
/// at zero) rather than the generic formula.
pub fn line_directional_derivative(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu_star: &[f64],
    v: &[f64],
) -> Result<LineDerivative> {
    check_alpha_closed(alpha)?;
    check_unit(u, measure.dim())?;
    check_point(mu_star, measure.dim())?;
    check_unit(v, measure.dim())?;

    let (s_p, atom_at_zero, pull) = line_quantities(measure, alpha, u, mu_star)?;
    let pull_norm = vecs::norm(&pull);
    if pull_norm == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(LineDerivative {
        value: atom_at_zero - vecs::dot(v, &pull),
        s_p,
        atom_at_zero,
        v0: vecs::scale(&pull, 1.0 / pull_norm),
        m: atom_at_zero - pull_norm,
    })
}

/// Shared computation: requires the measure to be line-concentrated with a
/// defined direction and `mu_star` on that line. Returns
/// `(s_p, atom_at_zero, s_p u* + alpha u)`.
pub(crate) fn line_quantities(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu_star: &[f64],
) -> Result<(f64, f64, Vec<f64>)> {
    let line = measure.line_structure();
    if !line.on_line {
        return Err(Error::NotOnLine);
    }
    let u_star = line.direction.ok_or(Error::LineDirectionUndefined)?;
    let base = line.base.expect("on-line verdict carries a base point");
    let scale = measure.support_radius();
    if dist_to_line(mu_star, &base, &u_star) > DEFAULT_LINE_TOL * scale {
        return Err(Error::PointOffLine);
    }

    let mut s_p = KahanSum::new();
    let mut atom_at_zero = 0.0;
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        if z.iter().zip(mu_star).all(|(a, b)| a == b) {
            atom_at_zero = w;
            continue;
        }
        let lambda = vecs::dot(&u_star, &vecs::sub(z, mu_star));
        if lambda > 0.0 {
            s_p.add(w);
        } else if lambda < 0.0 {
            s_p.add(-w);
        }
    }
    let s_p = s_p.value();
    let pull = vecs::add_scaled(&vecs::scale(&u_star, s_p), alpha, u);
    Ok((s_p, atom_at_zero, pull))
}

/// The infimum of the order-one objective, `-E_P[ ||Z|| + u'Z ]`.
///
/// For an empirical measure this infimum is finite and, unless the whole
/// support lies on a line with direction `u`, it is approached along
/// `r * u` but never attained.
pub fn alpha_one_infimum(measure: &EmpiricalMeasure, u: &[f64]) -> Result<f64> {
    Ok(-tail_integral(measure, u)?)
}

/// The vanishing integral `t_P(r) = E_P[ ||Z|| / sqrt((||Z||-r)^2 + m r ||Z||) ]`
/// controlling how fast distant points lose influence; requires
/// `m in (0, 2)` and `r > 0`.
pub fn t_integral(measure: &EmpiricalMeasure, m: f64, r: f64) -> Result<f64> {
    if !(m > 0.0 && m < 2.0) {
        return Err(Error::ParameterOutOfRange {
            name: "m",
            value: m,
        });
    }
    if r.is_nan() || r <= 0.0 {
        return Err(Error::ParameterOutOfRange {
            name: "r",
            value: r,
        });
    }
    let mut acc = KahanSum::new();
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        let n = vecs::norm(z);
        acc.add(w * n / ((n - r) * (n - r) + m * r * n).sqrt());
    }
    Ok(acc.value())
}
