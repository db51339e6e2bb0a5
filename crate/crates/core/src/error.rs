use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval ({a}, {b}): endpoints must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("Bessel index {0} is below -1/2")]
    InvalidBesselIndex(f64),

    #[error("potential fails the integrability probe: {0}")]
    NotIntegrable(String),

    #[error("x = {x} lies outside the admissible range [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    /// The adaptive integrator could not make progress, which signals an
    /// interior singularity of the potential.
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("integration step budget exhausted at x = {x}")]
    StepBudget { x: f64 },

    #[error("Frobenius series did not converge within {terms} terms (x_match = {x_match})")]
    SeriesNonConvergence { terms: usize, x_match: f64 },

    #[error("quadrature did not converge: partial value {partial}, error estimate {error:e}")]
    QuadratureNonConvergence { partial: Complex64, error: f64 },

    #[error("overflow while evaluating at z = {z}")]
    Overflow { z: Complex64 },

    #[error("integrand tail does not decay (cut at |lambda| = {cut:e}, partial value {partial})")]
    TailDivergence { cut: f64, partial: Complex64 },

    /// Eigenvalue search stopped early; `found` is the completed prefix.
    #[error("eigenvalue bracketing failed after {} eigenvalues", found.len())]
    BracketExhausted { found: Vec<f64> },

    #[error("kernel diagonal matching has no solution for x1 = {x1}: {side} saturation")]
    BoundarySaturation { x1: f64, side: &'static str },

    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(String::from(msg))
}
