//! Linear prediction of unobserved future order statistics from Type-II
//! right-censored samples.
//!
//! The crate covers the full pipeline for location-scale and scale
//! families:
//!
//! - [`moments`]: means and covariances of standardized order statistics
//!   (closed form, adaptive quadrature, Monte Carlo), with JSON
//!   persistence;
//! - [`estimation`]: BLUEs (μ*, σ*) by generalized least squares and the
//!   plug-in ratio δ̂ = μ*/σ*;
//! - [`prediction`]: BLUP and BLIP coefficient rows, MSPE matrices for
//!   marginal/joint/simultaneous targets, the Kaminsky-form invariant
//!   predictor, and MSPE-dominance checks;
//! - [`efficiency`]: RE₁, determinant- and trace-efficiency as functions
//!   of δ, maximizers δ*, crossings with 1, and integrated measures;
//! - [`mc`]: a reproducible simulation harness that validates the
//!   analytic formulas by brute force.

pub mod datasets;
pub mod efficiency;
pub mod error;
pub mod estimation;
pub mod family;
pub mod mc;
pub mod moments;
pub mod prediction;
pub mod quadrature;

pub use error::{Error, Result};
