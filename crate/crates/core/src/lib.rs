//! Random-matrix models for families of elliptic-curve L-functions.
//!
//! The crate pairs eigenangle ensembles (the classical compact groups plus
//! the Interaction and Independent models for forced central zeros) with a
//! small elliptic-curve L-function pipeline, so that one-level densities and
//! critical moments of curve families can be compared with model predictions.

pub mod analytic;
pub mod charpoly;
pub mod ellcurve;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod leval;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision eigenangle sample.
pub type Sample = ensembles::EigenangleSample<f64>;
/// Double-precision characteristic polynomial.
pub type CharPoly = charpoly::CharPoly<f64>;
/// Single-precision characteristic polynomial.
pub type CharPoly32 = charpoly::CharPoly<f32>;
/// Double-precision density prediction curve.
pub type PredictionCurve = analytic::PredictionCurve<f64>;
