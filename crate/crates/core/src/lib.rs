//! Rank-based estimation of the Pickands dependence function of a bivariate
//! copula, best weighted-L2 approximations for non-extreme-value copulas, and
//! a multiplier-bootstrap test of extreme-value dependence.
//!
//! The crate is organized around the pipeline
//! `Sample -> PseudoSample -> estimators -> shape correction`, with exact-model
//! computations (best approximation, asymptotic variances, optimal weight
//! measures) in [`approx`] and the hypothesis test in [`evtest`].

pub mod approx;
pub mod copula;
pub mod empirical;
pub mod error;
pub mod estimators;
pub mod evtest;
pub mod quad;
pub mod rng;
pub mod shape;
pub mod special;

pub use error::{Error, Result};
