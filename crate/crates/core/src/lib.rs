//! Numerical toolkit for one-dimensional Schrödinger operators
//! `-u'' + q(x) u = z u` on bounded intervals with either a regular left
//! endpoint or a perturbed Bessel endpoint `l(l+1)/x^2 + q(x)` at zero.
//!
//! The crate builds the real entire solution `phi(z, x)`, the de Branges
//! function `E(z, c) = phi(z, c) + i phi'(z, c)` with its reproducing kernel,
//! the spectral measure of the operator with a regular right endpoint, and a
//! set of experiments that check the structural identities relating two
//! operators with the same spectral measure.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line front end live in the `debranges-cli` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod debranges;
pub mod error;
pub mod frobenius;
pub mod linalg;
pub mod ode;
pub mod operator;
pub mod probes;
pub mod quadrature;
pub mod roots;
pub mod solution;
pub mod spectral;
pub mod uniqueness;

pub use num_complex::Complex64;

pub use debranges::{
    cartwright_diagnostics, debranges_function, kernel_formula, kernel_integral,
    hermite_biehler_sweep, kernel_positivity_sweep, mean_type_estimate, upper_half_grid,
    verify_containment, CartwrightDiagnostics, Containment, ContainmentReport, DeBrangesFunction,
    DeBrangesSpace, EntireFunction, InnerProductOptions, MeanTypeEstimate, ProbeContainment,
    SweepReport, SyntheticE,
};
pub use error::{Error, Result};
pub use operator::{
    fundamental_system, propagate, Potential, PotentialFn, PotentialKind, SolutionEvaluator,
    SolutionState, Table, Tolerances,
};
pub use probes::{random_bump, smooth_probes, Bump};
pub use solution::{
    bessel_bc_residuals, check_asymptotics, check_bessel_bc, EntireSolution, Profile,
    RescalingFunction,
};
pub use spectral::{
    atom_weights, eigenvalue_count, eigenvalues, inverse_transform, parseval_check,
    rescale_measure, spectral_measure, transform, transform_at, transform_at_scaled,
    transform_on_atoms, Atom, GridFunction, MeasureComparison, ParsevalReport, SpectralMeasure,
    TransformedFunction,
};
pub use uniqueness::{
    bessel_uniqueness_experiment, check_density_identity, check_logderivative_identity,
    counterexample_forward, detect_shift, fit_centrifugal, recover_potential,
    uniqueness_experiment, Counterexample, ExperimentOptions, LogDerivativeReport, ShiftMap,
    UniquenessReport, Verdict,
};

/// Complex unit `i`.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
