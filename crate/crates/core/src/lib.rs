//! Numerical laboratory for data augmentation in high-dimensional linear
//! regression.
//!
//! The crate has four layers:
//!
//! * [`gen`] — covariance models, mean geometry, and seeded sampling of
//!   mixed real/synthetic regression datasets;
//! * [`estimator`] — the min-norm least-squares interpolator, exact excess
//!   risk, its bias/variance split, and Monte Carlo risk estimation;
//! * [`theory`] — deterministic-equivalent risk formulas for the
//!   under- and over-parameterized regimes, driven by fixed-point solvers,
//!   plus optimality property sweeps;
//! * [`select`] — synthetic-data selection on feature matrices: greedy
//!   covariance matching, alpha matching, the baseline selectors, and
//!   distribution-shift metrics.
//!
//! All randomness is derived from explicit `u64` seeds; every operation is
//! deterministic given its inputs and reentrant.

pub mod error;
pub mod estimator;
pub mod gen;
pub(crate) mod linalg;
pub mod rng;
pub mod select;
pub mod theory;

pub use error::{Error, Result};
