//! Resonances of 1D/radial semiclassical Schrödinger operators −h²Δ + V with
//! smooth, non-analytic, decaying potentials.
//!
//! The pipeline: replace V by an |x|-analytic (μ, ν̃)-approximation V^μ built
//! from an almost-analytic extension and a contour integral
//! ([`approximation`]), deform the operator with a radial complex distortion
//! x ↦ x + iθa(|x|)x whose profile is supported away from the origin and
//! eventually linear ([`distortion`], [`operator`]), and read resonances off
//! the discrete spectrum of the resulting complex-symmetric matrix
//! ([`spectrum`]). A finite-rank absorber gives a well-conditioned reference
//! operator and a Grushin reduction whose effective determinant localizes the
//! resonances independently ([`grushin`]). Sets computed at geometrically
//! shrinking approximation angles μ_k are matched rung-to-rung into an
//! invariant limit set ([`ladder`]); [`experiments`] packages the non-trapping
//! and shape-resonance studies.

pub mod approximation;
pub mod assignment;
pub mod config;
pub mod cutoff;
pub mod distortion;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod grushin;
pub mod jet;
pub mod ladder;
pub mod linalg;
pub mod operator;
pub mod potential;
pub mod quad;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
pub use potential::Potential;
