//! Adaptive sixth-order Magnus integration of `(u, u')' = [[0, 1], [V - z, 0]] (u, u')`.
//!
//! Each step exponentiates the three-point Gauss–Legendre Magnus generator in
//! closed form, which keeps the scheme exact for piecewise-constant potentials
//! and well behaved for large `|z|`. Local error is estimated by step
//! doubling. The state is renormalised after every step and the scale carried
//! as a logarithm, so exponentially growing solutions never overflow.
//!
//! A [`Trajectory`] keeps every accepted node; evaluation between nodes takes
//! a fresh (doubled) sub-step from the preceding node, which serves as dense
//! output at the same accuracy as the accepted steps.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::operator::{Potential, Tolerances};

const SQRT15_10: f64 = 0.387_298_334_620_741_7;
const MAX_STEPS: usize = 2_000_000;
/// Bound on the growth exponent `|Re s|` of a single step.
const MAX_GROWTH: f64 = 30.0;

/// Solution state `(u, u')` at `x`, stored as `exp(log_scale) * (u, du)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledState {
    pub x: f64,
    pub u: Complex64,
    pub du: Complex64,
    pub log_scale: f64,
}

impl ScaledState {
    pub fn new(x: f64, u: Complex64, du: Complex64) -> Self {
        ScaledState { x, u, du, log_scale: 0.0 }.normalized()
    }

    fn normalized(mut self) -> Self {
        let n = self.u.norm().max(self.du.norm());
        if n > 0.0 && n.is_finite() {
            self.u /= n;
            self.du /= n;
            self.log_scale += n.ln();
        }
        self
    }

    /// Unscaled `(u, u')`; errors if the scale exceeds the floating range.
    pub fn values(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if self.log_scale > 700.0 {
            return Err(Error::Overflow { z });
        }
        let s = self.log_scale.exp();
        Ok((self.u * s, self.du * s))
    }
}

fn wnorm(u: Complex64, du: Complex64, kappa: f64) -> f64 {
    (kappa * u.norm()).max(du.norm())
}

/// Sixth-order Magnus propagator over `[x, x + h]` (`h` may be negative).
pub(crate) fn magnus(pot: &Potential, z: Complex64, x: f64, h: f64) -> Mat2 {
    let w1 = Complex64::new(pot.effective(x + (0.5 - SQRT15_10) * h), 0.0) - z;
    let w2 = Complex64::new(pot.effective(x + 0.5 * h), 0.0) - z;
    let w3 = Complex64::new(pot.effective(x + (0.5 + SQRT15_10) * h), 0.0) - z;
    let (a1, a2, a3) = (Mat2::companion(w1), Mat2::companion(w2), Mat2::companion(w3));
    let al1 = a2.scale_re(h);
    let al2 = (a3 - a1).scale_re(h * 15.0_f64.sqrt() / 3.0);
    let al3 = (a3 - a2.scale_re(2.0) + a1).scale_re(h * 10.0 / 3.0);
    let c1 = al1.commutator(al2);
    let c2 = al1.commutator(al3.scale_re(2.0) + c1).scale_re(-1.0 / 60.0);
    let lhs = al1.scale_re(-20.0) - al3 + c1;
    let omega = al1 + al3.scale_re(1.0 / 12.0) + lhs.commutator(al2 + c2).scale_re(1.0 / 240.0);
    omega.exp_traceless()
}

fn doubled(pot: &Potential, z: Complex64, x: f64, h: f64) -> Mat2 {
    magnus(pot, z, x + 0.5 * h, 0.5 * h) * magnus(pot, z, x, 0.5 * h)
}

/// Accepted integration nodes for one spectral parameter.
#[derive(Debug, Clone)]
pub struct Trajectory {
    potential: Potential,
    z: Complex64,
    nodes: Vec<ScaledState>,
    forward: bool,
}

impl Trajectory {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn start(&self) -> &ScaledState {
        &self.nodes[0]
    }

    pub fn end(&self) -> &ScaledState {
        self.nodes.last().expect("trajectory has a start node")
    }

    pub fn nodes(&self) -> &[ScaledState] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    fn covers(&self, x: f64) -> bool {
        let (s, e) = (self.start().x, self.end().x);
        let (lo, hi) = if s <= e { (s, e) } else { (e, s) };
        x >= lo && x <= hi
    }

    /// State at any `x` between the first and last node.
    pub fn eval(&self, x: f64) -> Result<ScaledState> {
        if !self.covers(x) {
            let (s, e) = (self.start().x, self.end().x);
            return Err(Error::OutOfDomain { x, lo: s.min(e), hi: s.max(e) });
        }
        let key = |n: &ScaledState| if self.forward { n.x } else { -n.x };
        let kx = if self.forward { x } else { -x };
        let idx = match self.nodes.binary_search_by(|n| key(n).partial_cmp(&kx).unwrap()) {
            Ok(i) => return Ok(self.nodes[i]),
            Err(i) => i - 1,
        };
        let node = self.nodes[idx];
        let h = x - node.x;
        let m = doubled(&self.potential, self.z, node.x, h);
        let (u, du) = m.apply(node.u, node.du);
        Ok(ScaledState { x, u, du, log_scale: node.log_scale }.normalized())
    }

    /// Re-integrates on the same mesh at a different spectral parameter.
    /// The discretisation is then a smooth function of `z`, which keeps
    /// finite differences in `z` free of step-selection noise.
    pub fn replay(&self, z: Complex64, start: ScaledState) -> Trajectory {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut y = ScaledState { x: self.nodes[0].x, ..start };
        nodes.push(y);
        for w in self.nodes.windows(2) {
            let m = doubled(&self.potential, z, w[0].x, w[1].x - w[0].x);
            let (u, du) = m.apply(y.u, y.du);
            y = ScaledState { x: w[1].x, u, du, log_scale: y.log_scale }.normalized();
            nodes.push(y);
        }
        Trajectory { potential: self.potential.clone(), z, nodes, forward: self.forward }
    }
}

/// Integrates from `start` to `x_end` with adaptive step control.
pub fn integrate(
    pot: &Potential,
    z: Complex64,
    start: ScaledState,
    x_end: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    let start = start.normalized();
    let forward = x_end >= start.x;
    let dir = if forward { 1.0 } else { -1.0 };
    let mut nodes = Vec::new();
    nodes.push(start);
    let span = (x_end - start.x).abs();
    if span == 0.0 {
        return Ok(Trajectory { potential: pot.clone(), z, nodes, forward });
    }
    let mut y = start;
    let mut h = (span / 8.0).min(2.0 / (1.0 + z.norm().sqrt()));
    let h_min = 1e-14 * (1.0 + start.x.abs().max(x_end.abs()));
    for _ in 0..MAX_STEPS {
        let remaining = (x_end - y.x).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        let wmid = Complex64::new(pot.effective(y.x + 0.5 * dir * h), 0.0) - z;
        let growth = wmid.sqrt().re.abs() * h;
        let (h_try, last) = if growth > MAX_GROWTH { (h * MAX_GROWTH / growth, false) } else { (h, last) };
        let kappa = (1.0 + wmid.norm()).sqrt();
        let full = magnus(pot, z, y.x, dir * h_try);
        let half = doubled(pot, z, y.x, dir * h_try);
        let (u1, du1) = full.apply(y.u, y.du);
        let (u2, du2) = half.apply(y.u, y.du);
        let scale = tol.abs + tol.rel * wnorm(u2, du2, kappa).max(wnorm(y.u, y.du, kappa));
        let err = wnorm(u2 - u1, du2 - du1, kappa) / 63.0 / scale;
        if !err.is_finite() {
            return Err(Error::StepUnderflow { x: y.x });
        }
        let fac = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-1.0 / 7.0)).clamp(0.2, 4.0) };
        if err <= 1.0 {
            let x_new = if last { x_end } else { y.x + dir * h_try };
            y = ScaledState { x: x_new, u: u2, du: du2, log_scale: y.log_scale }.normalized();
            nodes.push(y);
            if last {
                return Ok(Trajectory { potential: pot.clone(), z, nodes, forward });
            }
            h = h_try * fac;
        } else {
            h = h_try * fac;
            if h < h_min {
                return Err(Error::StepUnderflow { x: y.x });
            }
        }
    }
    Err(Error::StepBudget { x: y.x })
}

/// Scalar Dormand–Prince 5(4) integration of `theta' = f(x, theta)`, used for
/// the Prüfer angle. Returns `theta(x_end)`.
pub(crate) fn dopri_scalar<F>(mut f: F, x0: f64, theta0: f64, x_end: f64, rtol: f64) -> Result<f64>
where
    F: FnMut(f64, f64) -> f64,
{
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];
    let span = x_end - x0;
    if span == 0.0 {
        return Ok(theta0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = theta0;
    let mut h = span.abs() / 64.0;
    let mut k = [0.0; 7];
    k[0] = f(x, y);
    for _ in 0..MAX_STEPS {
        let remaining = (x_end - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;
        for s in 1..7 {
            let yi = y + hs * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(x + C[s] * hs, yi);
        }
        let y_new = y + hs * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let err_abs = (hs * (0..7).map(|j| E[j] * k[j]).sum::<f64>()).abs();
        let err = err_abs / (rtol * (1.0 + y.abs().max(y_new.abs())));
        if err <= 1.0 {
            x = if last { x_end } else { x + hs };
            y = y_new;
            k[0] = k[6];
            if last {
                return Ok(y);
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * (1.0 + x.abs()) {
            return Err(Error::StepUnderflow { x });
        }
    }
    Err(Error::StepBudget { x })
}
