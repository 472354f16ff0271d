//! Finite weighted probability measures on `R^d` and the geometric
//! questions that existence and uniqueness of quantiles hinge on: collinearity
//! of the support, tail integrals, and the built-in example data sets.

use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kahan::KahanSum;
use crate::rng::SplitMix64;
use crate::vecs;
use crate::{Error, Result};

/// Default relative tolerance for the collinearity verdict.
pub const DEFAULT_LINE_TOL: f64 = 1e-9;

/// Default seed for the randomly drawn example data (`a` and `b`).
///
/// The value is arbitrary but fixed: it keeps the sampled cloud in general
/// position and gives the extreme-order sweeps workable margins.
pub const DEFAULT_SEED: u64 = 1437;

/// A finite weighted point cloud representing a probability measure.
///
/// Construction normalizes weights to sum to one and merges duplicate
/// points by adding their weights, so the mass `P[{z}]` of an atom is
/// well-defined. Immutable after construction; safe to share across
/// threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

/// Verdict of the collinearity test.
///
/// When `on_line` is true the support lies (within tolerance) on
/// `{base + t * direction}`. A single atom lies on every line:
/// `degenerate_single_atom` is set and `direction` is `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineStructure {
    pub on_line: bool,
    pub base: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub degenerate_single_atom: bool,
}

impl EmpiricalMeasure {
    /// Builds a measure from raw points and optional weights.
    ///
    /// Weights default to uniform, are validated strictly positive, then
    /// duplicates are merged and the total normalized to one. `-0.0`
    /// coordinates are canonicalized to `0.0`.
    pub fn from_points(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate { index: i });
            }
        }
        let raw_weights = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::WeightCountMismatch {
                        points: points.len(),
                        weights: w.len(),
                    });
                }
                for (i, &wi) in w.iter().enumerate() {
                    if !wi.is_finite() || wi <= 0.0 {
                        return Err(Error::NonpositiveWeight {
                            index: i,
                            value: wi,
                        });
                    }
                }
                w
            }
            None => vec![1.0 / points.len() as f64; points.len()],
        };

        // Merge duplicates, keeping first-occurrence order of the support.
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut support: Vec<Vec<f64>> = Vec::new();
        let mut mass: Vec<KahanSum> = Vec::new();
        for (p, &w) in points.iter().zip(&raw_weights) {
            let canon: Vec<f64> = p.iter().map(|&x| if x == 0.0 { 0.0 } else { x }).collect();
            let key: Vec<u64> = canon.iter().map(|x| x.to_bits()).collect();
            match index.get(&key) {
                Some(&k) => mass[k].add(w),
                None => {
                    index.insert(key, support.len());
                    support.push(canon);
                    let mut m = KahanSum::new();
                    m.add(w);
                    mass.push(m);
                }
            }
        }

        let mut total = KahanSum::new();
        for m in &mass {
            total.add(m.value());
        }
        let total = total.value();
        let weights = mass.into_iter().map(|m| m.value() / total).collect();
        Ok(Self {
            points: support,
            weights,
            dim,
        })
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct support points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one point by construction
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Index of the support point equal to `z` (exact coordinate match),
    /// if any. `-0.0` and `0.0` compare equal.
    pub fn atom_index(&self, z: &[f64]) -> Option<usize> {
        if z.len() != self.dim {
            return None;
        }
        self.points
            .iter()
            .position(|p| p.iter().zip(z).all(|(a, b)| a == b))
    }

    /// Mass `P[{z}]` of the atom at `z`, or zero.
    pub fn atom_mass(&self, z: &[f64]) -> f64 {
        self.atom_index(z).map_or(0.0, |i| self.weights[i])
    }

    /// Weighted mean of the measure.
    pub fn weighted_mean(&self) -> Vec<f64> {
        let mut acc = crate::kahan::KahanVec::zeros(self.dim);
        for (p, &w) in self.points.iter().zip(&self.weights) {
            acc.add_scaled(p, w);
        }
        acc.into_vec()
    }

    /// Unweighted centroid of the distinct support points.
    pub fn support_centroid(&self) -> Vec<f64> {
        let n = self.points.len() as f64;
        let mut acc = crate::kahan::KahanVec::zeros(self.dim);
        for p in &self.points {
            acc.add_scaled(p, 1.0 / n);
        }
        acc.into_vec()
    }

    /// Max distance from the support centroid; the natural length scale of
    /// the cloud (zero only for a single atom).
    pub fn support_radius(&self) -> f64 {
        let c = self.support_centroid();
        self.points
            .iter()
            .map(|p| vecs::dist(p, &c))
            .fold(0.0, f64::max)
    }

    /// Max norm of a support point (about the coordinate origin).
    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| vecs::norm(p))
            .fold(0.0, f64::max)
    }

    /// Translates every support point by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        Ok(Self {
            points: self.points.iter().map(|p| vecs::add(p, shift)).collect(),
            weights: self.weights.clone(),
            dim: self.dim,
        })
    }

    /// Collinearity verdict at the default tolerance.
    pub fn line_structure(&self) -> LineStructure {
        detect_line(self, DEFAULT_LINE_TOL)
    }
}

/// Tests whether the support lies on a single line, within `tol` relative
/// to the support radius.
///
/// The candidate line passes through the support centroid along the
/// principal axis of the centered support; the verdict compares the largest
/// per-point orthogonal residual against `tol * support_radius`. Exactly
/// collinear supports produce an exactly zero residual, so the dichotomy
/// of the uniqueness classification is preserved.
#[allow(clippy::needless_range_loop)]
pub fn detect_line(measure: &EmpiricalMeasure, tol: f64) -> LineStructure {
    let d = measure.dim();
    if measure.len() == 1 {
        return LineStructure {
            on_line: true,
            base: Some(measure.point(0).to_vec()),
            direction: None,
            degenerate_single_atom: true,
        };
    }

    let center = measure.support_centroid();
    let scale = measure.support_radius();

    // Scatter matrix of the centered support.
    let mut scatter = vec![vec![0.0; d]; d];
    for p in measure.points() {
        let r = vecs::sub(p, &center);
        for i in 0..d {
            for j in i..d {
                scatter[i][j] += r[i] * r[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            scatter[i][j] = scatter[j][i];
        }
    }

    let direction = principal_eigenvector(scatter);
    let direction = fix_sign(direction);

    let max_residual = measure
        .points()
        .iter()
        .map(|p| dist_to_line(p, &center, &direction))
        .fold(0.0, f64::max);

    if max_residual <= tol * scale {
        LineStructure {
            on_line: true,
            base: Some(center),
            direction: Some(direction),
            degenerate_single_atom: false,
        }
    } else {
        LineStructure {
            on_line: false,
            base: None,
            direction: None,
            degenerate_single_atom: false,
        }
    }
}

/// Orthogonal distance from `p` to the line `{z0 + t * u}` (`u` unit).
pub(crate) fn dist_to_line(p: &[f64], z0: &[f64], u: &[f64]) -> f64 {
    let r = vecs::sub(p, z0);
    let along = vecs::dot(&r, u);
    let perp = vecs::add_scaled(&r, -along, u);
    vecs::norm(&perp)
}

/// Flips the sign so the first coordinate larger than 1e-9 in magnitude is
/// positive (a line direction is only defined up to sign).
fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    for &x in v.iter() {
        if x.abs() > 1e-9 {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            break;
        }
    }
    v
}

/// Eigenvector of the largest eigenvalue of a symmetric matrix, by cyclic
/// Jacobi rotations. Deterministic; adequate for the moderate dimensions
/// this crate targets.
#[allow(clippy::needless_range_loop)]
fn principal_eigenvector(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    if frob == 0.0 {
        // all points coincide with the centroid; cannot happen for a merged
        // support of size >= 2, but return something harmless
        return v.swap_remove(0);
    }

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-15 * frob {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        a[i][p] = c * aip - s * aiq;
                        a[p][i] = a[i][p];
                        a[i][q] = s * aip + c * aiq;
                        a[q][i] = a[i][q];
                    }
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..n {
        if a[i][i] > a[best][best] {
            best = i;
        }
    }
    let col: Vec<f64> = v.iter().map(|row| row[best]).collect();
    vecs::normalized(&col).unwrap_or(col)
}

/// The tail integral `I(P, u) = E_P[ ||Z|| + u'Z ] >= 0` for a unit
/// direction `u`.
///
/// Finite sums always exist for empirical measures; `-I(P, u)` is the
/// infimum of the order-one objective along the ray `r * u`.
pub fn tail_integral(measure: &EmpiricalMeasure, u: &[f64]) -> Result<f64> {
    check_unit(u, measure.dim())?;
    let mut acc = KahanSum::new();
    for (z, &w) in measure.points().iter().zip(measure.weights()) {
        acc.add(w * (vecs::norm(z) + vecs::dot(u, z)));
    }
    Ok(acc.value())
}

/// Validates that `u` has the right length and unit norm (within 1e-9).
pub(crate) fn check_unit(u: &[f64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    let n = vecs::norm(u);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection { norm: n });
    }
    Ok(())
}

/// The four built-in two-dimensional example data sets.
///
/// * `A` — four i.i.d. uniform draws from the square `[-2, 2]^2`
///   (deterministic in the seed, see [`crate::rng::SplitMix64`]; per point
///   the x coordinate is drawn before the y coordinate),
/// * `B` — the same draws projected onto the x-axis,
/// * `C` — the vertices of the unit equilateral triangle at angles
///   `2*pi*i/3`, `i = 1, 2, 3`,
/// * `D` — the vertices `(+-2, +-1)` of a rectangle.
///
/// All carry uniform weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinExample {
    A,
    B,
    C,
    D,
}

impl BuiltinExample {
    pub const ALL: [BuiltinExample; 4] = [
        BuiltinExample::A,
        BuiltinExample::B,
        BuiltinExample::C,
        BuiltinExample::D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinExample::A => "a",
            BuiltinExample::B => "b",
            BuiltinExample::C => "c",
            BuiltinExample::D => "d",
        }
    }

    /// Materializes the example (the seed only matters for `A` and `B`).
    pub fn build(self, seed: u64) -> EmpiricalMeasure {
        let points = match self {
            BuiltinExample::A => sample_square(seed),
            BuiltinExample::B => sample_square(seed)
                .into_iter()
                .map(|p| vec![p[0], 0.0])
                .collect(),
            BuiltinExample::C => {
                let h = 3.0_f64.sqrt() / 2.0;
                vec![vec![-0.5, h], vec![-0.5, -h], vec![1.0, 0.0]]
            }
            BuiltinExample::D => {
                vec![
                    vec![2.0, 1.0],
                    vec![2.0, -1.0],
                    vec![-2.0, 1.0],
                    vec![-2.0, -1.0],
                ]
            }
        };
        EmpiricalMeasure::from_points(points, None).expect("builtin examples are valid")
    }
}

impl FromStr for BuiltinExample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(BuiltinExample::A),
            "b" => Ok(BuiltinExample::B),
            "c" => Ok(BuiltinExample::C),
            "d" => Ok(BuiltinExample::D),
            other => Err(Error::UnknownExample(other.to_string())),
        }
    }
}

fn sample_square(seed: u64) -> Vec<Vec<f64>> {
    let mut gen = SplitMix64::new(seed);
    (0..4)
        .map(|_| {
            let x = gen.next_in(-2.0, 2.0);
            let y = gen.next_in(-2.0, 2.0);
            vec![x, y]
        })
        .collect()
}

/// Parses a builtin example by name.
pub fn builtin_example(name: &str, seed: u64) -> Result<EmpiricalMeasure> {
    Ok(BuiltinExample::from_str(name)?.build(seed))
}
