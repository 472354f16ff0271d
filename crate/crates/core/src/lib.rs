//! Spatial (geometric) quantiles of finite weighted point clouds in `R^d`.
//!
//! The quantile of order `alpha in [0, 1)` in unit direction `u` of a
//! probability measure `P` is a minimizer of
//!
//! ```text
//! mu  ->  E_P[ ||Z - mu|| - ||Z|| ] - alpha * u' mu
//! ```
//!
//! At `alpha = 0` this is the spatial median; as `alpha -> 1` the quantiles
//! leave every bounded set and align with `u`. This crate provides:
//!
//! * [`measure`] — weighted empirical measures, collinearity detection and
//!   the built-in example data sets,
//! * [`objective`] — the objective, subgradients, directional derivatives
//!   and the `alpha = 1` limit quantities,
//! * [`solver`] — a damped Weiszfeld-type solver with subdifferential
//!   optimality certificates and uniqueness classification,
//! * [`asymptotics`] — extreme-order sweeps (norm divergence, direction
//!   convergence), spatial depth and descent profiles,
//! * [`cli`] — the `geoquant` command-line interface (CSV/JSON in and out).

pub mod asymptotics;
pub mod cli;
mod error;
pub mod io;
mod kahan;
pub mod measure;
pub mod objective;
pub mod rng;
pub mod solver;
pub(crate) mod vecs;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
