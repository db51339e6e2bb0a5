//! Numerical experiments on uniqueness from the spectral measure: matching
//! kernel diagonals to find the coordinate map between two operators,
//! checking the identities it implies, recovering potentials, and the
//! measure-side gauge construction that shows why a growth hypothesis is
//! needed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::debranges::{cartwright_diagnostics, DeBrangesSpace};
use crate::error::{invalid, Error, Result};
use crate::operator::{Potential, PotentialKind};
use crate::quadrature::{integrate_real, QuadOptions};
use crate::roots::brent;
use crate::solution::{EntireSolution, Profile, RescalingFunction};
use crate::spectral::{rescale_measure, spectral_measure, Atom, GridFunction, MeasureComparison, SpectralMeasure};
use crate::I;

/// Samples `(x1, η(x1))` with their least-squares affine fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMap {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|η(x1) - (slope x1 + intercept)|` over the samples.
    pub fit_residual: f64,
}

impl ShiftMap {
    fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("shift map needs at least one sample"));
        }
        if !samples.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1) {
            return Err(invalid("shift samples must increase in both coordinates"));
        }
        let n = samples.len() as f64;
        let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
        let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
        let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
        let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 1.0 };
        let intercept = my - slope * mx;
        let fit_residual = samples.iter().map(|s| (s.1 - slope * s.0 - intercept).abs()).fold(0.0, f64::max);
        Ok(ShiftMap { samples, slope, intercept, fit_residual })
    }

    /// The fitted affine map.
    pub fn eval(&self, x1: f64) -> f64 {
        self.slope * x1 + self.intercept
    }

    /// Piecewise-linear interpolation of the samples, clamped at the ends.
    pub fn interpolate(&self, x1: f64) -> f64 {
        let s = &self.samples;
        if x1 <= s[0].0 {
            return s[0].1;
        }
        for w in s.windows(2) {
            if x1 <= w[1].0 {
                let t = (x1 - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        s[s.len() - 1].1
    }
}

/// `x ↦ ∫_a^x |phi(ζ, t)|² dt` on precomputed breakpoints.
struct Diagonal {
    prof: Profile,
    breaks: Vec<f64>,
    cum: Vec<f64>,
}

const DIAG_QUAD: QuadOptions = QuadOptions { rel: 1e-13, abs: 0.0, max_intervals: 20_000 };

impl Diagonal {
    fn new(sol: &EntireSolution, zeta: Complex64) -> Result<Self> {
        let prof = sol.profile(zeta)?;
        let (a, b) = (sol.a(), sol.b());
        let mut breaks = prof.mesh();
        if let Some(xm) = sol.x_match() {
            let mut x = xm;
            while x > 1e-6 * xm {
                breaks.push(x);
                x *= 0.5;
            }
        }
        breaks.push(a);
        breaks.push(b);
        breaks.retain(|&x| x >= a && x <= b);
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup();
        let mut cum = Vec::with_capacity(breaks.len());
        cum.push(0.0);
        for w in breaks.windows(2) {
            let seg = integrate_real(|x| Ok(prof.eval(x)?.u.norm_sqr()), &[w[0], w[1]], DIAG_QUAD)?;
            cum.push(cum[cum.len() - 1] + seg);
        }
        Ok(Diagonal { prof, breaks, cum })
    }

    fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    fn segment_of(&self, x: f64) -> usize {
        match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.breaks.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.breaks.len() - 2),
        }
    }

    fn value(&self, x: f64) -> Result<f64> {
        let i = self.segment_of(x);
        if x == self.breaks[i] {
            return Ok(self.cum[i]);
        }
        let seg = integrate_real(|t| Ok(self.prof.eval(t)?.u.norm_sqr()), &[self.breaks[i], x], DIAG_QUAD)?;
        Ok(self.cum[i] + seg)
    }

    /// Solves `value(x) = target`, or `None` past the right end.
    fn solve(&self, target: f64) -> Result<Option<f64>> {
        if target > self.total() * (1.0 + 1e-13) {
            return Ok(None);
        }
        let i = match self.cum.iter().position(|&c| c >= target) {
            Some(0) => return Ok(Some(self.breaks[0])),
            Some(i) => i - 1,
            None => return Ok(Some(self.breaks[self.breaks.len() - 1])),
        };
        let (lo, hi) = (self.breaks[i], self.breaks[i + 1]);
        let xtol = 1e-15 * (1.0 + hi.abs());
        Ok(Some(brent(|x| Ok(self.value(x)? - target), lo, hi, xtol, 200)?))
    }
}

/// Finds `η(x1)` with `K₂(ζ, ζ, η(x1)) = K₁(ζ, ζ, x1)` for each grid point.
pub fn detect_shift(sol1: &EntireSolution, sol2: &EntireSolution, x1_grid: &[f64], zeta: Complex64) -> Result<ShiftMap> {
    if zeta.im == 0.0 {
        return Err(invalid("shift detection needs a non-real probe point"));
    }
    let mut grid = x1_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d1 = Diagonal::new(sol1, zeta)?;
    let d2 = Diagonal::new(sol2, zeta)?;
    let mut samples = Vec::with_capacity(grid.len());
    for &x1 in &grid {
        sol1.potential().check_point(x1)?;
        let target = d1.value(x1)?;
        match d2.solve(target)? {
            Some(x2) => samples.push((x1, x2)),
            None => return Err(Error::BoundarySaturation { x1, side: "right" }),
        }
    }
    ShiftMap::from_samples(samples)
}

/// Largest `| |phi₁(z,x1)|² - η' |phi₂(z,η(x1))|² | / |phi₁(z,x1)|²` with
/// `η` and `η'` from the affine fit.
pub fn check_density_identity(
    sol1: &EntireSolution,
    sol2: &EntireSolution,
    eta: &ShiftMap,
    z: Complex64,
    x1_grid: &[f64],
) -> Result<f64> {
    let p1 = sol1.profile(z)?;
    let p2 = sol2.profile(z)?;
    let mut worst: f64 = 0.0;
    for &x1 in x1_grid {
        let d1 = p1.eval(x1)?.u.norm_sqr();
        let d2 = p2.eval(eta.eval(x1))?.u.norm_sqr();
        worst = worst.max((d1 - eta.slope * d2).abs() / d1);
    }
    Ok(worst)
}

/// Outcome of [`check_logderivative_identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivativeReport {
    pub max_error: f64,
    /// Grid points within `1e-3` of a zero of `phi₁(λ, ·)`.
    pub skipped: Vec<f64>,
}

/// Distance from `x` to a zero of `phi` estimated by `|phi / phi'|`.
const ZERO_MARGIN: f64 = 1e-3;

fn near_zero(u: f64, du: f64) -> bool {
    u.abs() < ZERO_MARGIN * du.abs()
}

/// Largest `|phi₁'/phi₁ (λ, x1) - phi₂'/phi₂ (λ, η(x1))|`.
pub fn check_logderivative_identity(
    sol1: &EntireSolution,
    sol2: &EntireSolution,
    eta: &ShiftMap,
    lambda: f64,
    x1_grid: &[f64],
) -> Result<LogDerivativeReport> {
    let z = Complex64::new(lambda, 0.0);
    let p1 = sol1.profile(z)?;
    let p2 = sol2.profile(z)?;
    let mut report = LogDerivativeReport { max_error: 0.0, skipped: Vec::new() };
    for &x1 in x1_grid {
        let s1 = p1.eval_scaled(x1)?;
        if near_zero(s1.u.re, s1.du.re) {
            report.skipped.push(x1);
            continue;
        }
        let s2 = p2.eval_scaled(eta.eval(x1))?;
        let e = (s1.du.re / s1.u.re - s2.du.re / s2.u.re).abs();
        report.max_error = report.max_error.max(e);
    }
    Ok(report)
}

/// `λ + phi''/phi` with `phi''` from fourth-order differences of the computed
/// `phi'`. Points too close to a zero of `phi`, or within two steps of the
/// ends of the interval, are dropped.
pub fn recover_potential(sol: &EntireSolution, lambda: f64, x_grid: &[f64]) -> Result<GridFunction> {
    const H: f64 = 1e-3;
    let p = sol.potential();
    let z = Complex64::new(lambda, 0.0);
    let prof = sol.profile(z)?;
    let lo = if matches!(p.kind(), PotentialKind::Bessel { .. }) { 0.0 } else { p.a() };
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for &x in x_grid {
        if x - 2.0 * H <= lo || x + 2.0 * H > p.b() {
            continue;
        }
        let s = prof.eval_scaled(x)?;
        if near_zero(s.u.re, s.du.re) {
            continue;
        }
        let d = |t: f64| -> Result<f64> {
            let st = prof.eval_scaled(t)?;
            Ok(st.du.re * (st.log_scale - s.log_scale).exp())
        };
        let ddu = (8.0 * (d(x + H)? - d(x - H)?) - (d(x + 2.0 * H)? - d(x - 2.0 * H)?)) / (12.0 * H);
        xs.push(x);
        qs.push(Complex64::new(lambda + ddu / s.u.re, 0.0));
    }
    if xs.is_empty() {
        return Err(invalid("no admissible grid points for potential recovery"));
    }
    if xs.len() == 1 {
        return GridFunction::new(xs, qs, alloc::vec![0.0], x_grid.iter().copied().fold(0.0, f64::max));
    }
    GridFunction::from_samples(xs, qs)
}

/// Least-squares `x² q_eff(x) ≈ c₀ + c₁ x + c₂ x²`, returning `c₀ ≈ l(l+1)`.
pub fn fit_centrifugal(q_eff: &GridFunction) -> Result<f64> {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&x, v) in q_eff.grid.iter().zip(&q_eff.values) {
        let row = [1.0, x, x * x];
        let y = x * x * v.re;
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let c = solve3(ata, atb).ok_or_else(|| invalid("centrifugal fit needs at least three distinct points"))?;
    Ok(c[0])
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[p][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            let pivot = a[k];
            for (x, y) in a[i].iter_mut().zip(pivot).skip(k) {
                *x -= f * y;
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    EqualUpToShift,
    Distinct,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::EqualUpToShift => "equal up to shift",
            Verdict::Distinct => "distinct",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Tolerances and probe points of a uniqueness experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub lambda_max: f64,
    pub right_angle: f64,
    pub zeta: Complex64,
    /// Real spectral parameter for the log-derivative and recovery checks.
    pub lambda_probe: f64,
    pub grid_points: usize,
    pub weight_tol: f64,
    pub slope_tol: f64,
    pub identity_tol: f64,
    pub potential_tol: f64,
    pub centrifugal_tol: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            lambda_max: 100.0,
            right_angle: 0.0,
            zeta: I,
            lambda_probe: 1.0,
            grid_points: 17,
            weight_tol: 1e-6,
            slope_tol: 1e-5,
            identity_tol: 1e-5,
            potential_tol: 1e-4,
            centrifugal_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub measures_equal: bool,
    pub comparison: MeasureComparison,
    pub eta: Option<ShiftMap>,
    pub slope_deviation: Option<f64>,
    pub density_error: Option<f64>,
    pub logderivative: Option<LogDerivativeReport>,
    /// Largest `|q₁(x1) - q₂(η(x1))| / (1 + |q₁(x1)|)` over the recovery grid.
    pub potential_match: Option<f64>,
    /// Fitted `l(l+1)` of each operator, Bessel kind only.
    pub centrifugal: Option<(f64, f64)>,
    pub options: ExperimentOptions,
    /// Growth diagnostics standing in for the bounded-type hypothesis.
    pub growth_note: String,
    pub verdict: Verdict,
}

/// Compares two operators through their spectral measures and, when these
/// agree, through the coordinate map and the identities it implies.
pub fn uniqueness_experiment(sol1: &EntireSolution, sol2: &EntireSolution, opts: &ExperimentOptions) -> Result<UniquenessReport> {
    let m1 = spectral_measure(sol1, opts.right_angle, opts.lambda_max)?;
    let m2 = spectral_measure(sol2, opts.right_angle, opts.lambda_max)?;
    let comparison = m1.compare(&m2);
    let measures_equal = comparison.equal(opts.weight_tol) && (comparison.gauge_ratio - 1.0).abs() <= opts.weight_tol;
    let growth_note = growth_note(sol1)?;
    let mut report = UniquenessReport {
        measures_equal,
        comparison,
        eta: None,
        slope_deviation: None,
        density_error: None,
        logderivative: None,
        potential_match: None,
        centrifugal: None,
        options: opts.clone(),
        growth_note,
        verdict: Verdict::Distinct,
    };
    if !measures_equal {
        return Ok(report);
    }
    let (a, b) = (sol1.a(), sol1.b());
    let n = opts.grid_points.max(3);
    let grid: Vec<f64> = (0..n).map(|i| a + (b - a) * (0.1 + 0.8 * i as f64 / (n - 1) as f64)).collect();
    let eta = match detect_shift(sol1, sol2, &grid, opts.zeta) {
        Ok(e) => e,
        Err(Error::BoundarySaturation { .. }) => {
            report.verdict = Verdict::Inconclusive;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let density = check_density_identity(sol1, sol2, &eta, opts.zeta, &grid)?;
    let logd = check_logderivative_identity(sol1, sol2, &eta, opts.lambda_probe, &grid)?;
    let q1 = recover_potential(sol1, opts.lambda_probe, &grid)?;
    let mapped: Vec<f64> = q1.grid.iter().map(|&x| eta.eval(x)).collect();
    let q2 = recover_potential(sol2, opts.lambda_probe, &mapped)?;
    let mut potential_match: f64 = 0.0;
    for (x, v2) in q2.grid.iter().zip(&q2.values) {
        if let Some(j) = mapped.iter().position(|m| m == x) {
            let v1 = q1.values[j].re;
            potential_match = potential_match.max((v1 - v2.re).abs() / (1.0 + v1.abs()));
        }
    }
    let centrifugal = match (sol1.potential().kind(), sol2.potential().kind()) {
        (PotentialKind::Bessel { .. }, PotentialKind::Bessel { .. }) => Some((near_origin_fit(sol1, opts)?, near_origin_fit(sol2, opts)?)),
        _ => None,
    };
    let slope_deviation = (eta.slope - 1.0).abs();
    let pass = slope_deviation <= opts.slope_tol
        && density <= opts.identity_tol
        && logd.max_error <= opts.identity_tol
        && potential_match <= opts.potential_tol
        && centrifugal.is_none_or(|(c1, c2)| (c1 - c2).abs() <= opts.centrifugal_tol);
    report.verdict = if pass { Verdict::EqualUpToShift } else { Verdict::Inconclusive };
    report.eta = Some(eta);
    report.slope_deviation = Some(slope_deviation);
    report.density_error = Some(density);
    report.logderivative = Some(logd);
    report.potential_match = Some(potential_match);
    report.centrifugal = centrifugal;
    Ok(report)
}

fn near_origin_fit(sol: &EntireSolution, opts: &ExperimentOptions) -> Result<f64> {
    let top = 0.4f64.min(0.5 * sol.b());
    let xs: Vec<f64> = (0..16).map(|i| 0.05 * top / 0.4 + (top - 0.05 * top / 0.4) * i as f64 / 15.0).collect();
    fit_centrifugal(&recover_potential(sol, opts.lambda_probe, &xs)?)
}

fn growth_note(sol: &EntireSolution) -> Result<String> {
    let space = DeBrangesSpace::new(sol.clone(), sol.b())?;
    let radii = [1e2, 3e2, 1e3, 3e3];
    let real: Vec<f64> = (-200..=200).map(|i| i as f64 * 15.0).collect();
    let d = cartwright_diagnostics(&space.e_function(), &radii, &real)?;
    Ok(format!(
        "bounded type assumed from growth heuristics: order {:.3}, log integral tail ratio {:.3}, {}",
        d.order_estimate,
        d.tail_ratio,
        if d.consistent_with_cartwright { "consistent with Cartwright class" } else { "not consistent with Cartwright class" }
    ))
}

/// Spectral-measure comparison of two perturbed Bessel operators in the
/// leading-coefficient normalization.
pub fn bessel_uniqueness_experiment(p1: Potential, p2: Potential, lambda_max: f64) -> Result<UniquenessReport> {
    for p in [&p1, &p2] {
        if p.bessel_index().is_none() {
            return Err(invalid("bessel experiment needs Bessel-kind potentials"));
        }
    }
    let s1 = EntireSolution::bessel(p1)?;
    let s2 = EntireSolution::bessel(p2)?;
    uniqueness_experiment(&s1, &s2, &ExperimentOptions { lambda_max, ..Default::default() })
}

/// Measures of the gauge counterexample.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub original: SpectralMeasure,
    /// `κ_n w_n` at the altered atoms, `w_n` elsewhere.
    pub perturbed: SpectralMeasure,
    /// `e^{-2g}` applied to the perturbed measure.
    pub realigned: SpectralMeasure,
    pub gauge: RescalingFunction,
    /// Per-atom ratio of the perturbed to the original weight.
    pub scale_factors: Vec<f64>,
    /// Largest relative weight mismatch between `realigned` and `original`.
    pub realignment_error: f64,
}

/// Builds `ρ₂` with weights multiplied by `κ_n` at the listed atom indices
/// (1-based), and the real entire `g` with `e^{-2g} ρ₂ = ρ₁`: `g` interpolates
/// `ln(κ_n)/2` at the altered atoms and `0` at every other atom of `base`.
pub fn counterexample_forward(base: &SpectralMeasure, kappa: &[(usize, f64)]) -> Result<Counterexample> {
    let atoms = base.atoms();
    let mut factors = alloc::vec![1.0; atoms.len()];
    for &(n, k) in kappa {
        if n == 0 || n > atoms.len() {
            return Err(Error::InvalidArgument(format!("atom index {n} outside 1..={}", atoms.len())));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid("kappa must be positive and finite"));
        }
        factors[n - 1] = k;
    }
    let perturbed_atoms: Vec<Atom> =
        atoms.iter().zip(&factors).map(|(a, &k)| Atom { lambda: a.lambda, weight: a.weight * k }).collect();
    let perturbed = SpectralMeasure::new(perturbed_atoms, base.lambda_max(), base.gauge())?;
    let gauge = if atoms.is_empty() {
        RescalingFunction::zero()
    } else {
        RescalingFunction::interpolating(base.lambdas(), factors.iter().map(|k| 0.5 * k.ln()).collect())?
    };
    let realigned = rescale_measure(&perturbed, &gauge)?;
    let realignment_error = realigned
        .atoms()
        .iter()
        .zip(atoms)
        .map(|(r, o)| (r.weight - o.weight).abs() / o.weight)
        .fold(0.0, f64::max);
    Ok(Counterexample { original: base.clone(), perturbed, realigned, gauge, scale_factors: factors, realignment_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::PotentialFn;
    use core::f64::consts::PI;

    fn regular(a: f64, b: f64, q: PotentialFn) -> EntireSolution {
        EntireSolution::regular(Potential::regular(a, b, q).unwrap(), 0.0).unwrap()
    }

    fn cosine() -> PotentialFn {
        PotentialFn::custom(|x| x.cos())
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn identity_shift() {
        let s = regular(0.0, PI, cosine());
        let grid = linspace(0.3, 2.8, 9);
        let eta = detect_shift(&s, &s, &grid, I).unwrap();
        assert!((eta.slope - 1.0).abs() < 1e-9 && eta.intercept.abs() < 1e-8, "{eta:?}");
        assert!(check_density_identity(&s, &s, &eta, I, &grid).unwrap() < 1e-6);
        assert!(check_logderivative_identity(&s, &s, &eta, 3.0, &grid).unwrap().max_error < 1e-7);
    }

    #[test]
    fn shifted_copy() {
        let s = 0.3;
        let s1 = regular(-s, PI - s, cosine());
        let s2 = regular(0.0, PI, cosine().shifted(s));
        let grid = linspace(0.0, 2.5, 11);
        let eta = detect_shift(&s1, &s2, &grid, I).unwrap();
        assert!((eta.slope - 1.0).abs() < 1e-6 && (eta.intercept - s).abs() < 1e-5, "{eta:?}");
        assert!(check_density_identity(&s1, &s2, &eta, I, &grid).unwrap() < 1e-5);
        let ld = check_logderivative_identity(&s1, &s2, &eta, 5.0, &grid).unwrap();
        assert!(ld.max_error < 1e-5, "{ld:?}");
    }

    #[test]
    fn log_derivative_negative_control() {
        let s1 = regular(0.0, PI, PotentialFn::Zero);
        let s2 = regular(0.0, PI, PotentialFn::Constant(1.0));
        let eta = ShiftMap::from_samples(alloc::vec![(0.5, 0.5), (2.0, 2.0)]).unwrap();
        let ld = check_logderivative_identity(&s1, &s2, &eta, 4.0, &linspace(0.2, 3.0, 15)).unwrap();
        assert!(ld.max_error > 0.1);
    }

    #[test]
    fn recovery_examples() {
        let free = regular(0.0, PI, PotentialFn::Zero);
        let q = recover_potential(&free, 1.0, &linspace(0.1, PI - 0.1, 40)).unwrap();
        assert!(q.values.iter().all(|v| v.norm() < 1e-5));
        let b = EntireSolution::bessel(Potential::bessel(1.0, PI, PotentialFn::Zero).unwrap()).unwrap();
        let q = recover_potential(&b, 0.0, &linspace(0.2, 3.0, 30)).unwrap();
        for (x, v) in q.grid.iter().zip(&q.values) {
            assert!((v.re - 2.0 / (x * x)).abs() < 1e-4 * 2.0 / (x * x));
        }
        assert!((fit_centrifugal(&q).unwrap() - 2.0).abs() < 1e-3);
        let c = regular(0.0, PI, cosine());
        let grid = linspace(0.1, PI - 0.1, 40);
        let q5 = recover_potential(&c, 5.0, &grid).unwrap();
        assert!(q5.grid.iter().zip(&q5.values).all(|(x, v)| (v.re - x.cos()).abs() < 1e-4));
    }

    #[test]
    fn saturation_is_reported() {
        let s1 = regular(0.0, 2.0, PotentialFn::Zero);
        let s2 = regular(0.0, 1.0, PotentialFn::Zero);
        let r = detect_shift(&s1, &s2, &[0.5, 1.8], I);
        assert!(matches!(r, Err(Error::BoundarySaturation { x1, .. }) if x1 == 1.8));
    }

    #[test]
    fn counterexample_scales_designated_atoms() {
        let base = spectral_measure(&regular(0.0, PI, PotentialFn::Zero), 0.0, 100.0).unwrap();
        let c = counterexample_forward(&base, &[(1, 2.0)]).unwrap();
        assert!((c.perturbed.atoms()[0].weight / base.atoms()[0].weight - 2.0).abs() < 1e-9);
        assert!(c.scale_factors[1..].iter().all(|&k| k == 1.0));
        assert!(c.realignment_error < 1e-9);
        let none = counterexample_forward(&base, &[]).unwrap();
        assert!(none.gauge.is_zero() && none.perturbed == base);
        assert!(counterexample_forward(&base, &[(11, 2.0)]).is_err());
    }
}
