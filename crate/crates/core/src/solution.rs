//! The real entire solution `phi(z, x)` and its gauge rescalings `e^{g(z)} phi`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::frobenius::{FrobeniusGrid, SeriesSolution, MAX_HALVINGS};
use crate::ode::{self, ScaledState, Trajectory};
use crate::operator::{Potential, PotentialKind, SolutionState, Tolerances};

/// Largest admissible degree of a rescaling polynomial.
pub const MAX_GAUGE_DEGREE: usize = 64;

/// Real entire function `g` given as a real polynomial, either by monomial
/// coefficients or by its values at distinct real nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum RescalingFunction {
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
    /// Interpolating polynomial in barycentric form; exact at the nodes.
    Interpolating { nodes: Vec<f64>, values: Vec<f64>, weights: Vec<f64> },
}

impl RescalingFunction {
    pub fn zero() -> Self {
        RescalingFunction::Polynomial(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        RescalingFunction::Polynomial(alloc::vec![c])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("rescaling coefficients must be finite"));
        }
        let degree = coeffs.len().saturating_sub(1);
        if degree > MAX_GAUGE_DEGREE {
            return Err(Error::DegreeCap { degree, cap: MAX_GAUGE_DEGREE });
        }
        Ok(RescalingFunction::Polynomial(coeffs))
    }

    /// Polynomial of minimal degree through `(nodes[j], values[j])`.
    pub fn interpolating(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(invalid("interpolation needs matching, non-empty node and value lists"));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("interpolation data must be finite"));
        }
        let degree = nodes.len() - 1;
        if degree > MAX_GAUGE_DEGREE {
            return Err(Error::DegreeCap { degree, cap: MAX_GAUGE_DEGREE });
        }
        let mut weights = Vec::with_capacity(nodes.len());
        for (j, &xj) in nodes.iter().enumerate() {
            let mut w = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    let d = xj - xk;
                    if d == 0.0 {
                        return Err(invalid("interpolation nodes must be distinct"));
                    }
                    w /= d;
                }
            }
            weights.push(w);
        }
        let scale = weights.iter().map(|w| w.abs()).fold(0.0, f64::max);
        if scale.is_finite() && scale > 0.0 {
            for w in &mut weights {
                *w /= scale;
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Ok(RescalingFunction::zero());
        }
        Ok(RescalingFunction::Interpolating { nodes, values, weights })
    }

    pub fn degree(&self) -> usize {
        match self {
            RescalingFunction::Polynomial(c) => c.len().saturating_sub(1),
            RescalingFunction::Interpolating { nodes, .. } => nodes.len() - 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RescalingFunction::Polynomial(c) => c.iter().all(|&v| v == 0.0),
            RescalingFunction::Interpolating { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            RescalingFunction::Polynomial(c) => {
                c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * z + ci)
            }
            RescalingFunction::Interpolating { nodes, values, weights } => {
                let mut num = Complex64::new(0.0, 0.0);
                let mut den = Complex64::new(0.0, 0.0);
                for ((&x, &y), &w) in nodes.iter().zip(values).zip(weights) {
                    let d = z - x;
                    if d == Complex64::new(0.0, 0.0) {
                        return Complex64::new(y, 0.0);
                    }
                    let t = w / d;
                    num += t * y;
                    den += t;
                }
                num / den
            }
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(Complex64::new(x, 0.0)).re
    }
}

#[derive(Debug, Clone)]
enum Start {
    Regular { angle: f64 },
    Bessel { grid: Arc<FrobeniusGrid> },
}

/// Evaluator of the real entire solution `phi(z, x)`.
///
/// Regular endpoints use `phi(z, a) = sin(angle)`, `phi'(z, a) = cos(angle)`.
/// Bessel endpoints use `phi(z, x) ~ x^{l+1}` as `x -> 0`.
#[derive(Debug, Clone)]
pub struct EntireSolution {
    potential: Potential,
    start: Start,
    tol: Tolerances,
    gauge: Vec<RescalingFunction>,
}

impl EntireSolution {
    pub fn regular(potential: Potential, angle: f64) -> Result<Self> {
        if potential.kind() != PotentialKind::Regular {
            return Err(invalid("regular start requested for a Bessel potential"));
        }
        if !(0.0..core::f64::consts::PI).contains(&angle) {
            return Err(invalid("boundary angle must lie in [0, pi)"));
        }
        Ok(EntireSolution {
            potential,
            start: Start::Regular { angle },
            tol: Tolerances::default(),
            gauge: Vec::new(),
        })
    }

    pub fn bessel(potential: Potential) -> Result<Self> {
        if potential.bessel_index().is_none() {
            return Err(invalid("Frobenius start requested for a regular potential"));
        }
        let x_top = (0.1f64).min(potential.b() / 10.0);
        let grid = FrobeniusGrid::for_potential(&potential, x_top);
        Ok(EntireSolution {
            potential,
            start: Start::Bessel { grid: Arc::new(grid) },
            tol: Tolerances::default(),
            gauge: Vec::new(),
        })
    }

    /// Same Bessel solution with a different initial matching point.
    pub fn with_x_match(self, x_match: f64) -> Result<Self> {
        match self.start {
            Start::Bessel { .. } if x_match > 0.0 && x_match < self.potential.b() => {
                let grid = FrobeniusGrid::for_potential(&self.potential, x_match);
                Ok(EntireSolution { start: Start::Bessel { grid: Arc::new(grid) }, ..self })
            }
            Start::Bessel { .. } => Err(Error::OutOfDomain { x: x_match, lo: 0.0, hi: self.potential.b() }),
            Start::Regular { .. } => Err(invalid("matching point only applies to Bessel potentials")),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn gauge(&self) -> &[RescalingFunction] {
        &self.gauge
    }

    pub fn a(&self) -> f64 {
        self.potential.a()
    }

    pub fn b(&self) -> f64 {
        self.potential.b()
    }

    /// Left boundary angle for regular starts.
    pub fn boundary_angle(&self) -> Option<f64> {
        match self.start {
            Start::Regular { angle } => Some(angle),
            Start::Bessel { .. } => None,
        }
    }

    pub fn x_match(&self) -> Option<f64> {
        match &self.start {
            Start::Bessel { grid } => Some(grid.x_top()),
            Start::Regular { .. } => None,
        }
    }

    /// Tag describing the normalisation of `phi`.
    pub fn normalization(&self) -> String {
        let base = match (&self.start, self.potential.bessel_index()) {
            (Start::Regular { angle }, _) => format!("regular:angle={angle}"),
            (Start::Bessel { .. }, Some(l)) => format!("frobenius:l={l}:leading=1"),
            (Start::Bessel { .. }, None) => String::from("frobenius"),
        };
        if self.gauge.iter().all(|g| g.is_zero()) {
            base
        } else {
            format!("{base}+gauge(deg {})", self.gauge.iter().map(|g| g.degree()).max().unwrap_or(0))
        }
    }

    /// `phĩ = e^{g} phi`; repeated rescalings compose additively in `g`.
    pub fn rescaled(&self, g: RescalingFunction) -> Self {
        let mut out = self.clone();
        if !g.is_zero() {
            out.gauge.push(g);
        }
        out
    }

    /// `Σ g(z)` over the attached gauges.
    pub fn gauge_exponent(&self, z: Complex64) -> Complex64 {
        self.gauge.iter().map(|g| g.eval(z)).sum()
    }

    fn halvings_for(&self, z: Complex64, grid: &FrobeniusGrid) -> usize {
        let k = z.norm().sqrt();
        let mut s = 0;
        while s < MAX_HALVINGS && k * grid.x_match(s) > 2.0 {
            s += 1;
        }
        s
    }

    /// Solution data on the whole interval at `z`.
    pub fn profile(&self, z: Complex64) -> Result<Profile> {
        self.profile_to(z, self.potential.b())
    }

    /// Solution data on `(a, x_end]` at `z`.
    pub fn profile_to(&self, z: Complex64, x_end: f64) -> Result<Profile> {
        self.potential.check_point(x_end)?;
        let gauge = self.gauge_exponent(z);
        if gauge.re > 700.0 || !gauge.re.is_finite() {
            return Err(Error::Overflow { z });
        }
        match &self.start {
            Start::Regular { angle } => {
                let y0 = ScaledState::new(
                    self.potential.a(),
                    Complex64::new(angle.sin(), 0.0),
                    Complex64::new(angle.cos(), 0.0),
                );
                let traj = ode::integrate(&self.potential, z, y0, x_end, self.tol)?;
                Ok(Profile { z, gauge, lo: self.potential.a(), x_end, series: None, traj: Some(traj) })
            }
            Start::Bessel { grid } => {
                let mut s = self.halvings_for(z, grid);
                let series = loop {
                    match grid.solve(z, s) {
                        Ok(series) => break series,
                        Err(Error::SeriesNonConvergence { .. }) if s < MAX_HALVINGS => s += 1,
                        Err(e) => return Err(e),
                    }
                };
                let traj = if x_end > series.x_match() {
                    let (u, du) = series.eval(series.x_match(), grid);
                    let y0 = ScaledState::new(series.x_match(), u, du);
                    Some(ode::integrate(&self.potential, z, y0, x_end, self.tol)?)
                } else {
                    None
                };
                let series = Some(BesselPart { series, grid: grid.clone() });
                Ok(Profile { z, gauge, lo: 0.0, x_end, series, traj })
            }
        }
    }

    pub fn eval(&self, z: Complex64, x: f64) -> Result<SolutionState> {
        self.profile_to(z, x)?.eval(x)
    }

    /// `(phi, phi')` at `x` in scaled form, for arguments where the values
    /// themselves overflow.
    pub fn eval_scaled(&self, z: Complex64, x: f64) -> Result<ScaledState> {
        self.profile_to(z, x)?.eval_scaled(x)
    }
}

#[derive(Debug, Clone)]
struct BesselPart {
    series: SeriesSolution,
    grid: Arc<FrobeniusGrid>,
}

/// `phi(z, ·)` for one `z`, evaluable anywhere on `(a, x_end]`.
#[derive(Debug, Clone)]
pub struct Profile {
    z: Complex64,
    gauge: Complex64,
    lo: f64,
    x_end: f64,
    series: Option<BesselPart>,
    traj: Option<Trajectory>,
}

impl Profile {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    /// Breakpoints of the adaptive mesh (plus the matching point).
    pub fn mesh(&self) -> Vec<f64> {
        let mut m = Vec::new();
        m.push(self.lo);
        if let Some(t) = &self.traj {
            m.extend(t.nodes().iter().map(|n| n.x));
        } else {
            m.push(self.x_end);
        }
        m.dedup();
        m
    }

    fn with_gauge(&self, s: ScaledState) -> ScaledState {
        if self.gauge == Complex64::new(0.0, 0.0) {
            return s;
        }
        let phase = Complex64::from_polar(1.0, self.gauge.im);
        ScaledState { x: s.x, u: s.u * phase, du: s.du * phase, log_scale: s.log_scale + self.gauge.re }
    }

    pub fn eval_scaled(&self, x: f64) -> Result<ScaledState> {
        let in_range = if self.series.is_some() { x > 0.0 } else { x >= self.lo };
        if !in_range || x > self.x_end || !x.is_finite() {
            return Err(Error::OutOfDomain { x, lo: self.lo, hi: self.x_end });
        }
        let raw = match (&self.series, &self.traj) {
            (Some(b), traj) if traj.is_none() || x <= b.series.x_match() => {
                let (u, du) = b.series.eval(x, &b.grid);
                ScaledState::new(x, u, du)
            }
            (_, Some(t)) => t.eval(x)?,
            _ => unreachable!("profile has a series or a trajectory"),
        };
        Ok(self.with_gauge(raw))
    }

    pub fn eval(&self, x: f64) -> Result<SolutionState> {
        let s = self.eval_scaled(x)?;
        let (u, du) = s.values(self.z)?;
        Ok(SolutionState { x, u, du })
    }

    /// `ln phi(x)` on the principal branch, overflow-free.
    pub fn ln_value(&self, x: f64) -> Result<Complex64> {
        let s = self.eval_scaled(x)?;
        Ok(s.u.ln() + s.log_scale)
    }

    /// Same solution at `z` integrated on this profile's mesh.
    pub fn replay(&self, z: Complex64, gauge: Complex64) -> Result<Profile> {
        let series = match &self.series {
            Some(b) => Some(BesselPart { series: b.grid.solve(z, b.series.halvings())?, grid: b.grid.clone() }),
            None => None,
        };
        let traj = match (&self.traj, &series) {
            (Some(t), Some(b)) => {
                let (u, du) = b.series.eval(b.series.x_match(), &b.grid);
                Some(t.replay(z, ScaledState::new(t.start().x, u, du)))
            }
            (Some(t), None) => Some(t.replay(z, *t.start())),
            (None, _) => None,
        };
        Ok(Profile { z, gauge, lo: self.lo, x_end: self.x_end, series, traj })
    }
}

/// `|x^l ((l+1) f(x) - x f'(x))|` along `ladder` for `(f, f')` supplied by `eval`.
pub fn boundary_residuals<F>(l: f64, ladder: &[f64], mut eval: F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<(Complex64, Complex64)>,
{
    ladder
        .iter()
        .map(|&x| {
            let (f, df) = eval(x)?;
            Ok((f * (l + 1.0) - df * x).norm() * x.powf(l))
        })
        .collect()
}

/// Bessel boundary-condition residuals of `phi(z, ·)` along `ladder`.
pub fn bessel_bc_residuals(sol: &EntireSolution, z: Complex64, ladder: &[f64]) -> Result<Vec<f64>> {
    let l = sol
        .potential()
        .bessel_index()
        .ok_or_else(|| invalid("boundary residual needs a Bessel potential"))?;
    let x_max = ladder.iter().copied().fold(0.0, f64::max);
    let prof = sol.profile_to(z, x_max.min(sol.b()))?;
    boundary_residuals(l, ladder, |x| {
        let s = prof.eval(x)?;
        Ok((s.u, s.du))
    })
}

/// Largest boundary residual along `ladder`.
pub fn check_bessel_bc(sol: &EntireSolution, z: Complex64, ladder: &[f64]) -> Result<f64> {
    Ok(bessel_bc_residuals(sol, z, ladder)?.into_iter().fold(0.0, f64::max))
}

/// `|phi(iy, x)/phi(iy, x̃) e^{-(x - x̃) sqrt(-iy)} - 1|` for each `y`, via
/// logarithms so that large `y` cannot overflow.
pub fn check_asymptotics(sol: &EntireSolution, x: f64, xt: f64, y_ladder: &[f64]) -> Result<Vec<f64>> {
    let x_hi = x.max(xt);
    y_ladder
        .iter()
        .map(|&y| {
            let z = Complex64::new(0.0, y);
            let prof = sol.profile_to(z, x_hi)?;
            let lr = prof.ln_value(x)? - prof.ln_value(xt)?;
            let expo = lr - (-z).sqrt() * (x - xt);
            Ok((expo.exp() - 1.0).norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::PotentialFn;
    use core::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn free() -> EntireSolution {
        EntireSolution::regular(Potential::regular(0.0, PI, PotentialFn::Zero).unwrap(), 0.0).unwrap()
    }

    fn bessel(l: f64) -> EntireSolution {
        EntireSolution::bessel(Potential::bessel(l, PI, PotentialFn::Zero).unwrap()).unwrap()
    }

    fn rb1(z: Complex64, x: f64) -> Complex64 {
        let k = z.sqrt();
        ((k * x).sin() / (k * k * k * x) - (k * x).cos() / (k * k)) * 3.0
    }

    #[test]
    fn free_dirichlet_is_sinc() {
        let s = free();
        for z in [c(4.0), Complex64::new(3.0, -20.0), c(-9.0)] {
            let k = z.sqrt();
            for x in [0.3, 1.7, PI] {
                let e = (k * x).sin() / k;
                assert!((s.eval(z, x).unwrap().u - e).norm() < 1e-9 * (1.0 + e.norm()));
            }
        }
        let st = s.eval(c(0.0), 2.0).unwrap();
        assert!((st.u - c(2.0)).norm() < 1e-12 && (st.du - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn neumann_angle() {
        let p = Potential::regular(0.0, PI, PotentialFn::Zero).unwrap();
        let s = EntireSolution::regular(p, PI / 2.0).unwrap();
        assert!((s.eval(c(9.0), 0.0).unwrap().u - c(1.0)).norm() < 1e-15);
        assert!((s.eval(c(9.0), 1.1).unwrap().u.re - (3.3f64).cos()).abs() < 1e-9);
        assert!(EntireSolution::regular(Potential::regular(0.0, 1.0, PotentialFn::Zero).unwrap(), PI).is_err());
    }

    #[test]
    fn bessel_l1_closed_form() {
        let s = bessel(1.0);
        for z in [c(4.0), c(37.0), Complex64::new(-5.0, 12.0), Complex64::new(0.0, 2500.0)] {
            for x in [1e-3, 0.05, 0.1, 0.7, 2.0, PI] {
                let e = rb1(z, x);
                let got = s.eval(z, x).unwrap().u;
                assert!((got - e).norm() < 1e-8 * e.norm(), "z={z} x={x} got={got} exact={e}");
            }
        }
        let st = s.eval(c(0.0), 1.5).unwrap();
        assert!((st.u.re - 2.25).abs() < 1e-9, "{st:?}");
    }

    #[test]
    fn bessel_l0_matches_free() {
        let s = bessel(0.0);
        let k = 2.5f64;
        for x in [0.01, 0.5, 3.0] {
            assert!((s.eval(c(k * k), x).unwrap().u.re - (k * x).sin() / k).abs() < 1e-10);
        }
    }

    #[test]
    fn real_on_real_axis() {
        let p = Potential::bessel(0.5, 2.0, PotentialFn::custom(|x| x.cos())).unwrap();
        let s = EntireSolution::bessel(p).unwrap();
        let st = s.eval(c(11.0), 1.3).unwrap();
        assert_eq!(st.u.im, 0.0);
        assert_eq!(st.du.im, 0.0);
    }

    #[test]
    fn x_match_independence() {
        let p = Potential::bessel(1.0, PI, PotentialFn::custom(|x| 1.0 + x.sin())).unwrap();
        let s1 = EntireSolution::bessel(p.clone()).unwrap();
        let s2 = EntireSolution::bessel(p).unwrap().with_x_match(0.03).unwrap();
        for z in [c(5.0), Complex64::new(2.0, 9.0)] {
            let a = s1.eval(z, 2.0).unwrap().u;
            let b = s2.eval(z, 2.0).unwrap().u;
            assert!((a - b).norm() < 1e-8 * a.norm());
        }
    }

    #[test]
    fn bc_residual_examples() {
        let s = bessel(0.0);
        let ladder: Vec<f64> = (4..=20).map(|k| 0.5f64.powi(k)).collect();
        let r = bessel_bc_residuals(&s, c(1.0), &ladder).unwrap();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        assert!(r[r.len() - 1] < 1e-4 && r[0] < 1e-4);

        // l = 1/4, z = 0: phi = x^{5/4} exactly.
        let s = bessel(0.25);
        assert!(check_bessel_bc(&s, c(0.0), &ladder).unwrap() < 1e-14);

        // cos x is the wrong solution at l = 0.
        let r = boundary_residuals(0.0, &ladder, |x| Ok((c(x.cos()), c(-x.sin())))).unwrap();
        assert!(r.iter().all(|&v| v > 0.9));
    }

    #[test]
    fn asymptotics_examples() {
        let ys = [1e2, 1e3, 1e4];
        let e = check_asymptotics(&free(), 2.0, 1.0, &ys).unwrap();
        assert!(e[2] < 1e-2, "{e:?}");
        assert!(check_asymptotics(&free(), 1.5, 1.5, &ys).unwrap().iter().all(|&v| v == 0.0));
        let e = check_asymptotics(&bessel(1.0), 2.0, 1.0, &ys).unwrap();
        assert!(e[2] < 1e-2 && e[2] < e[1] && e[1] < e[0], "{e:?}");
    }

    #[test]
    fn rescaling_examples() {
        let s = free();
        let z = c(100.0);
        let base = s.eval(z, 1.0).unwrap().u;
        assert_eq!(s.rescaled(RescalingFunction::zero()).eval(z, 1.0).unwrap().u, base);
        let e1 = s.rescaled(RescalingFunction::constant(1.0)).eval(z, 1.0).unwrap().u;
        assert!((e1 - base * core::f64::consts::E).norm() < 1e-14);
        let g = RescalingFunction::polynomial(alloc::vec![0.0, 0.01]).unwrap();
        let e2 = s.rescaled(g).eval(z, 1.0).unwrap().u;
        assert!((e2 - base * core::f64::consts::E).norm() < 1e-14);
        let big = RescalingFunction::constant(800.0);
        assert!(matches!(s.rescaled(big).eval(z, 1.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn interpolating_gauge_is_exact_at_nodes() {
        let nodes: Vec<f64> = (1..=20).map(|n| (n * n) as f64).collect();
        let mut values = alloc::vec![0.0; 20];
        values[0] = 0.5 * 2f64.ln();
        let g = RescalingFunction::interpolating(nodes.clone(), values.clone()).unwrap();
        for (x, v) in nodes.iter().zip(&values) {
            assert_eq!(g.eval_real(*x), *v);
        }
        assert_eq!(g.degree(), 19);
        assert!(RescalingFunction::polynomial(alloc::vec![1.0; 70]).is_err());
    }
}
