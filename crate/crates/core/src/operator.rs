//! Potentials and propagation of solutions of `-u'' + V(x) u = z u`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ode::{self, ScaledState, Trajectory};
use crate::quadrature::{integrate_real, uniform_breaks, QuadOptions};

/// Relative and absolute local error tolerances of the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-10, abs: 1e-12 }
    }
}

impl Tolerances {
    pub fn with_rel(rel: f64) -> Self {
        Tolerances { rel, ..Default::default() }
    }
}

/// Piecewise-linear tabulated function with constant extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Arc<[f64]>,
    ys: Arc<[f64]>,
}

impl Table {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "table needs at least two (x, q) rows of equal length, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(String::from("table x values must be strictly increasing")));
        }
        if !xs.iter().chain(&ys).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(String::from("table values must be finite")));
        }
        Ok(Table { xs: xs.into(), ys: ys.into() })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }

    /// Trapezoidal `∫|q|` over the tabulated nodes inside `[a, b]`.
    fn trapezoid_abs(&self, a: f64, b: f64) -> f64 {
        let mut pts: Vec<f64> = self.xs.iter().copied().filter(|&x| x > a && x < b).collect();
        pts.insert(0, a);
        pts.push(b);
        pts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]).abs() + self.eval(w[1]).abs()))
            .sum()
    }
}

/// The potential (or perturbation) `q` as an evaluable function.
#[derive(Clone)]
pub enum PotentialFn {
    Zero,
    Constant(f64),
    /// Coefficients in increasing degree.
    Polynomial(Arc<[f64]>),
    Tabulated(Table),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl PotentialFn {
    pub fn polynomial(coeffs: &[f64]) -> Self {
        PotentialFn::Polynomial(coeffs.into())
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        PotentialFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PotentialFn::Zero => 0.0,
            PotentialFn::Constant(c) => *c,
            PotentialFn::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            PotentialFn::Tabulated(t) => t.eval(x),
            PotentialFn::Custom(f) => f(x),
        }
    }

    /// `x ↦ q(x - s)`.
    pub fn shifted(self, s: f64) -> Self {
        match self {
            PotentialFn::Zero | PotentialFn::Constant(_) => self,
            other => PotentialFn::Custom(Arc::new(move |x| other.eval(x - s))),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialFn::Zero)
    }
}

impl fmt::Debug for PotentialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialFn::Zero => write!(f, "Zero"),
            PotentialFn::Constant(c) => write!(f, "Constant({c})"),
            PotentialFn::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            PotentialFn::Tabulated(t) => write!(f, "Tabulated({} rows)", t.xs.len()),
            PotentialFn::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// Regular left endpoint `a`; `q` integrable up to `a`.
    Regular,
    /// Perturbed Bessel endpoint at `a = 0` with index `l >= -1/2`.
    Bessel { l: f64 },
}

/// Interval `(a, b)` together with the coefficient data of the operator.
#[derive(Debug, Clone)]
pub struct Potential {
    a: f64,
    b: f64,
    kind: PotentialKind,
    q: PotentialFn,
    description: String,
}

impl Potential {
    /// Regular operator `-d²/dx² + q` on `(a, b)`.
    pub fn regular(a: f64, b: f64, q: PotentialFn) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidInterval { a, b });
        }
        let l1 = match &q {
            PotentialFn::Zero => 0.0,
            PotentialFn::Constant(c) => c.abs() * (b - a),
            PotentialFn::Tabulated(t) => t.trapezoid_abs(a, b),
            _ => integrate_real(
                |x| Ok(q.eval(x).abs()),
                &uniform_breaks(a, b, 8),
                QuadOptions { rel: 1e-8, abs: 1e-300, max_intervals: 4000 },
            )
            .map_err(|_| Error::NotIntegrable(format!("∫|q| over ({a}, {b}) does not converge")))?,
        };
        if !l1.is_finite() {
            return Err(Error::NotIntegrable(format!("∫|q| over ({a}, {b}) is not finite")));
        }
        Ok(Potential { a, b, kind: PotentialKind::Regular, q, description: String::from("regular") })
    }

    /// Perturbed Bessel operator `-d²/dx² + l(l+1)/x² + q` on `(0, b)`.
    pub fn bessel(l: f64, b: f64, q: PotentialFn) -> Result<Self> {
        if !l.is_finite() || l < -0.5 {
            return Err(Error::InvalidBesselIndex(l));
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::InvalidInterval { a: 0.0, b });
        }
        qbar_probe(l, b, &q)?;
        Ok(Potential {
            a: 0.0,
            b,
            kind: PotentialKind::Bessel { l },
            q,
            description: format!("bessel l={l}"),
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn q(&self) -> &PotentialFn {
        &self.q
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn bessel_index(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Bessel { l } => Some(l),
            PotentialKind::Regular => None,
        }
    }

    /// Full potential entering the equation, including `l(l+1)/x²`.
    #[inline]
    pub fn effective(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Regular => self.q.eval(x),
            PotentialKind::Bessel { l } => l * (l + 1.0) / (x * x) + self.q.eval(x),
        }
    }

    /// Admissible range for propagation endpoints: regular endpoints are
    /// included, the Bessel endpoint at zero is not.
    pub fn check_point(&self, x: f64) -> Result<()> {
        let ok = match self.kind {
            PotentialKind::Regular => x >= self.a && x <= self.b,
            PotentialKind::Bessel { .. } => x > 0.0 && x <= self.b,
        };
        if ok && x.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x, lo: self.a, hi: self.b })
        }
    }
}

/// Integrability of `x|q|` (or `x(1 - ln x)|q|` for `l = -1/2`) near zero,
/// probed on dyadic shells down to `1e-8`. The shell integrals of an
/// integrable function decay geometrically; a non-decaying sequence means
/// the perturbation is too singular.
fn qbar_probe(l: f64, b: f64, q: &PotentialFn) -> Result<()> {
    if q.is_zero() {
        return Ok(());
    }
    let log_case = l == -0.5;
    let qbar = |x: f64| {
        let w = if log_case { x * (1.0 - x.ln()) } else { x };
        w * q.eval(x).abs()
    };
    let mut hi = (0.5 * b).min(0.5);
    let mut shells = Vec::new();
    while hi > 1e-8 {
        let lo = 0.5 * hi;
        let s = match q {
            PotentialFn::Tabulated(_) => {
                let n = 64;
                let h = (hi - lo) / n as f64;
                (0..n).map(|i| 0.5 * h * (qbar(lo + i as f64 * h) + qbar(lo + (i + 1) as f64 * h))).sum()
            }
            _ => integrate_real(
                |x| Ok(qbar(x)),
                &[lo, hi],
                QuadOptions { rel: 1e-8, abs: 1e-300, max_intervals: 500 },
            )
            .map_err(|_| Error::NotIntegrable(format!("q̄ quadrature fails on [{lo:e}, {hi:e}]")))?,
        };
        if !s.is_finite() {
            return Err(Error::NotIntegrable(format!("q̄ is not finite on [{lo:e}, {hi:e}]")));
        }
        shells.push(s);
        hi = lo;
    }
    let k = shells.len();
    let mid = k / 2;
    let (s_mid, s_last) = (shells[mid], shells[k - 1]);
    if s_mid == 0.0 || s_last == 0.0 {
        return Ok(());
    }
    let ratio = (s_last / s_mid).powf(1.0 / (k - 1 - mid) as f64);
    if ratio < 0.999 {
        Ok(())
    } else {
        Err(Error::NotIntegrable(format!(
            "q̄ shell integrals do not decay near zero (ratio per halving {ratio:.4})"
        )))
    }
}

/// Value and derivative of a solution at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionState {
    pub x: f64,
    pub u: Complex64,
    pub du: Complex64,
}

impl SolutionState {
    pub fn new(x: f64, u: Complex64, du: Complex64) -> Self {
        SolutionState { x, u, du }
    }

    pub fn real(x: f64, u: f64, du: f64) -> Self {
        SolutionState { x, u: Complex64::new(u, 0.0), du: Complex64::new(du, 0.0) }
    }

    pub fn wronskian(&self, other: &SolutionState) -> Complex64 {
        self.u * other.du - self.du * other.u
    }
}

/// Solution of `τu = zu` with data `from` carried to `to_x`.
pub fn propagate(
    p: &Potential,
    z: Complex64,
    from: SolutionState,
    to_x: f64,
    tol: Tolerances,
) -> Result<SolutionState> {
    p.check_point(from.x)?;
    p.check_point(to_x)?;
    if from.u == Complex64::new(0.0, 0.0) && from.du == Complex64::new(0.0, 0.0) {
        return Ok(SolutionState { x: to_x, ..from });
    }
    let t = ode::integrate(p, z, ScaledState::new(from.x, from.u, from.du), to_x, tol)?;
    let (u, du) = t.end().values(z)?;
    Ok(SolutionState { x: to_x, u, du })
}

/// A solution of `τu = zu` fixed by its data at an anchor point.
#[derive(Debug, Clone)]
pub struct SolutionEvaluator {
    potential: Potential,
    z: Complex64,
    anchor: SolutionState,
    tol: Tolerances,
}

impl SolutionEvaluator {
    pub fn new(potential: Potential, z: Complex64, anchor: SolutionState, tol: Tolerances) -> Result<Self> {
        potential.check_point(anchor.x)?;
        Ok(SolutionEvaluator { potential, z, anchor, tol })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn anchor(&self) -> SolutionState {
        self.anchor
    }

    pub fn eval(&self, x: f64) -> Result<SolutionState> {
        propagate(&self.potential, self.z, self.anchor, x, self.tol)
    }

    /// Trajectory from the anchor to `x`, for evaluation at many points.
    pub fn trajectory_to(&self, x: f64) -> Result<Trajectory> {
        self.potential.check_point(x)?;
        let a = self.anchor;
        ode::integrate(&self.potential, self.z, ScaledState::new(a.x, a.u, a.du), x, self.tol)
    }
}

/// Fundamental pair `c`, `s` with `c(anchor) = s'(anchor) = 1` and
/// `c'(anchor) = s(anchor) = 0`.
pub fn fundamental_system(
    p: &Potential,
    z: Complex64,
    anchor: f64,
    tol: Tolerances,
) -> Result<(SolutionEvaluator, SolutionEvaluator)> {
    let c = SolutionEvaluator::new(p.clone(), z, SolutionState::real(anchor, 1.0, 0.0), tol)?;
    let s = SolutionEvaluator::new(p.clone(), z, SolutionState::real(anchor, 0.0, 1.0), tol)?;
    Ok((c, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn make_regular_examples() {
        assert!(Potential::regular(0.0, PI, PotentialFn::Zero).is_ok());
        let p = Potential::regular(0.0, 1.0, PotentialFn::Constant(1.0)).unwrap();
        assert_eq!(p.effective(0.3), 1.0);
        let p = Potential::regular(0.0, PI, PotentialFn::custom(|x| x.cos())).unwrap();
        assert!((p.effective(0.0) - 1.0).abs() < 1e-15);
        assert!(matches!(Potential::regular(1.0, 1.0, PotentialFn::Zero), Err(Error::InvalidInterval { .. })));
        assert!(matches!(Potential::regular(2.0, 1.0, PotentialFn::Zero), Err(Error::InvalidInterval { .. })));
        assert!(Potential::regular(0.0, f64::INFINITY, PotentialFn::Zero).is_err());
        assert!(Potential::regular(f64::NAN, 1.0, PotentialFn::Zero).is_err());
    }

    #[test]
    fn regular_rejects_non_integrable() {
        let r = Potential::regular(0.0, 1.0, PotentialFn::custom(|x| 1.0 / (x * x)));
        assert!(matches!(r, Err(Error::NotIntegrable(_))));
    }

    #[test]
    fn make_bessel_examples() {
        let p = Potential::bessel(1.0, PI, PotentialFn::Zero).unwrap();
        assert!((p.effective(2.0) - 0.5).abs() < 1e-15);
        let p = Potential::bessel(0.0, PI, PotentialFn::Zero).unwrap();
        assert_eq!(p.effective(0.01), 0.0);
        assert_eq!(p.bessel_index(), Some(0.0));
        assert!(Potential::bessel(-0.5, 1.0, PotentialFn::custom(|x| x.powf(-0.5))).is_ok());
        assert!(matches!(
            Potential::bessel(-0.6, 1.0, PotentialFn::Zero),
            Err(Error::InvalidBesselIndex(_))
        ));
        // 2/x² disguised as a perturbation: x q̄ = 2/x is not integrable.
        let r = Potential::bessel(0.0, PI, PotentialFn::custom(|x| 2.0 / (x * x) * (-x * x).exp()));
        assert!(matches!(r, Err(Error::NotIntegrable(_))));
        // Borderline but integrable: x^{-1.9} gives q̄ = x^{-0.9}.
        assert!(Potential::bessel(1.0, 1.0, PotentialFn::custom(|x| x.powf(-1.9))).is_ok());
    }

    #[test]
    fn tabulated_interpolation_and_probe() {
        let t = Table::new(alloc::vec![0.0, 1.0, 2.0], alloc::vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(5.0), 0.0);
        assert!(Table::new(alloc::vec![0.0, 0.0], alloc::vec![1.0, 1.0]).is_err());
        let p = Potential::regular(0.0, 2.0, PotentialFn::Tabulated(t)).unwrap();
        assert_eq!(p.effective(1.5), 1.0);
    }

    #[test]
    fn propagate_free_examples() {
        let p = Potential::regular(0.0, 3.0, PotentialFn::Zero).unwrap();
        let s = propagate(&p, c(1.0), SolutionState::real(1.0, 1f64.sin(), 1f64.cos()), 2.0, Tolerances::default())
            .unwrap();
        assert!((s.u - c(2f64.sin())).norm() < 1e-9);
        assert!((s.du - c(2f64.cos())).norm() < 1e-9);
        let s = propagate(&p, c(0.0), SolutionState::real(1.0, 1.0, 1.0), 2.0, Tolerances::default()).unwrap();
        assert!((s.u - c(2.0)).norm() < 1e-12);
        assert!((s.du - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn propagate_riccati_bessel() {
        // ψ(x) = sin(kx)/(kx) - cos(kx) solves the l = 1 equation at z = k².
        let p = Potential::bessel(1.0, 3.0, PotentialFn::Zero).unwrap();
        let k = 2.0;
        let psi = |x: f64| (k * x).sin() / (k * x) - (k * x).cos();
        let dpsi = |x: f64| {
            k * (k * x).cos() / (k * x) - (k * x).sin() / (k * x * x) + k * (k * x).sin()
        };
        let s = propagate(&p, c(k * k), SolutionState::real(1.0, psi(1.0), dpsi(1.0)), 2.0, Tolerances::default())
            .unwrap();
        assert!((s.u.re - psi(2.0)).abs() < 1e-9);
        assert!((s.du.re - dpsi(2.0)).abs() < 1e-9);
        assert!(propagate(&p, c(1.0), SolutionState::real(0.0, 0.0, 1.0), 1.0, Tolerances::default()).is_err());
    }

    #[test]
    fn fundamental_system_examples() {
        let p = Potential::regular(0.0, 3.0, PotentialFn::Zero).unwrap();
        let k = 1.7;
        let (cs, ss) = fundamental_system(&p, c(k * k), 0.0, Tolerances::default()).unwrap();
        for x in [0.5, 1.3, 2.9] {
            assert!((cs.eval(x).unwrap().u.re - (k * x).cos()).abs() < 1e-9);
            assert!((ss.eval(x).unwrap().u.re - (k * x).sin() / k).abs() < 1e-9);
        }
        let (cs, ss) = fundamental_system(&p, c(0.0), 1.0, Tolerances::default()).unwrap();
        for x in [0.0, 0.5, 2.5] {
            assert!((cs.eval(x).unwrap().u - c(1.0)).norm() < 1e-12);
            assert!((ss.eval(x).unwrap().u - c(x - 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn wronskian_is_conserved() {
        let p = Potential::regular(0.0, PI, PotentialFn::custom(|x| x.cos() + 0.3 * x)).unwrap();
        for z in [Complex64::new(3.0, 0.0), Complex64::new(-4.0, 7.0), Complex64::new(20.0, -2.0)] {
            let (cs, ss) = fundamental_system(&p, z, 1.0, Tolerances::default()).unwrap();
            for x in [0.0, 0.4, 1.0, 2.2, PI] {
                let (a, b) = (cs.eval(x).unwrap(), ss.eval(x).unwrap());
                let size = (a.u.norm() + a.du.norm()) * (b.u.norm() + b.du.norm());
                let w = a.wronskian(&b);
                assert!((w - c(1.0)).norm() < 1e-9 * size, "z={z} x={x} w={w}");
            }
        }
    }

    #[test]
    fn regular_rejects_interior_singularity() {
        let p = Potential::regular(0.0, 2.0, PotentialFn::custom(|x| 1.0 / (x - 1.0).powi(2)));
        assert!(p.is_err());
    }
}
