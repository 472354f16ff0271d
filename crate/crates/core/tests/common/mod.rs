//! Shared test oracles: brute-force references independent of the solver
//! path they check, plus a deterministic instance generator.

#![allow(dead_code)]

use geoquant::measure::EmpiricalMeasure;
use geoquant::objective::objective_value;
use geoquant::rng::SplitMix64;

pub struct Gen(pub SplitMix64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::new(seed))
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.next_in(lo, hi)
    }

    pub fn unit2(&mut self) -> Vec<f64> {
        let theta = self.0.next_in(0.0, std::f64::consts::TAU);
        vec![theta.cos(), theta.sin()]
    }

    pub fn point2(&mut self, half_width: f64) -> Vec<f64> {
        vec![
            self.0.next_in(-half_width, half_width),
            self.0.next_in(-half_width, half_width),
        ]
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// Random planar measure with `n` points and random positive weights.
    pub fn measure2(&mut self, n: usize, half_width: f64) -> EmpiricalMeasure {
        let points: Vec<Vec<f64>> = (0..n).map(|_| self.point2(half_width)).collect();
        let weights: Vec<f64> = (0..n).map(|_| self.0.next_in(0.1, 1.0)).collect();
        EmpiricalMeasure::from_points(points, Some(weights)).unwrap()
    }
}

/// Result of an exhaustive grid search for the objective minimum.
pub struct GridMinimum {
    pub value: f64,
    /// Grid points whose value is within the discretization error of the
    /// minimum (the objective is `(1 + alpha)`-Lipschitz, so the true
    /// minimizer always has such a grid point within half a cell diagonal).
    pub argmins: Vec<Vec<f64>>,
    /// Grid spacing along each axis.
    pub cell: f64,
}

/// Exhaustive minimum of the objective over an `n x n` grid covering the
/// ball that provably contains every minimizer (centered at the bounding
/// box center of the support).
pub fn grid_minimum(measure: &EmpiricalMeasure, alpha: f64, u: &[f64], n: usize) -> GridMinimum {
    assert_eq!(measure.dim(), 2, "grid oracle is two-dimensional");
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in measure.points() {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let radius = measure
        .points()
        .iter()
        .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt())
        .fold(0.0_f64, f64::max);
    let reach = 2.0 * radius / (1.0 - alpha) * 1.01;

    if reach == 0.0 {
        let value = objective_value(measure, alpha, u, &center).unwrap();
        return GridMinimum {
            value,
            argmins: vec![center.to_vec()],
            cell: 0.0,
        };
    }

    let cell = 2.0 * reach / (n - 1) as f64;
    let mut value = f64::INFINITY;
    let mut grid_vals = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = center[1] - reach + iy as f64 * cell;
        for ix in 0..n {
            let x = center[0] - reach + ix as f64 * cell;
            let v = objective_value(measure, alpha, u, &[x, y]).unwrap();
            grid_vals.push((v, x, y));
            value = value.min(v);
        }
    }
    let tie = (1.0 + alpha) * cell * std::f64::consts::SQRT_2 / 2.0 + 1e-12 * (1.0 + value.abs());
    let argmins = grid_vals
        .into_iter()
        .filter(|(v, _, _)| *v <= value + tie)
        .map(|(_, x, y)| vec![x, y])
        .collect();
    GridMinimum {
        value,
        argmins,
        cell,
    }
}

/// Brute-force minimizer interval of
/// `t -> sum_i w_i |lambda_i - t| - c * t` over the kinks: the function is
/// piecewise linear and convex, so its minimum is attained on a kink or a
/// whole segment between adjacent kinks.
pub fn univariate_minimizer_interval(lambdas: &[f64], weights: &[f64], c: f64) -> (f64, f64) {
    let value = |t: f64| -> f64 {
        lambdas
            .iter()
            .zip(weights)
            .map(|(&l, &w)| w * (l - t).abs())
            .sum::<f64>()
            - c * t
    };
    let mut kinks: Vec<f64> = lambdas.to_vec();
    kinks.sort_by(f64::total_cmp);
    let min = kinks
        .iter()
        .map(|&t| value(t))
        .fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + min.abs());
    let optimal: Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|&t| value(t) <= min + tie)
        .collect();
    (optimal[0], *optimal.last().unwrap())
}

/// One-sided directional derivative by finite differences with Richardson
/// extrapolation over `h = {1e-4, 1e-5, 1e-6} * scale`.
pub fn fd_directional_derivative(
    measure: &EmpiricalMeasure,
    alpha: f64,
    u: &[f64],
    mu: &[f64],
    v: &[f64],
    scale: f64,
) -> f64 {
    let f0 = objective_value(measure, alpha, u, mu).unwrap();
    let d = |h: f64| -> f64 {
        let shifted: Vec<f64> = mu.iter().zip(v).map(|(m, vi)| m + h * vi).collect();
        (objective_value(measure, alpha, u, &shifted).unwrap() - f0) / h
    };
    let d1 = d(1e-4 * scale);
    let d2 = d(1e-5 * scale);
    let d3 = d(1e-6 * scale);
    let r12 = (10.0 * d2 - d1) / 9.0;
    let r23 = (10.0 * d3 - d2) / 9.0;
    (100.0 * r23 - r12) / 99.0
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn rotate(p: &[f64], theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]
}
