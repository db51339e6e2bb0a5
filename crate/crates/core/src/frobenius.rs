//! Frobenius start at a Bessel endpoint.
//!
//! Writing `u = x^{l+1} v` turns `-u'' + (l(l+1)/x² + q - z) u = 0` into
//! `(x^{2l+2} v')' = x^{2l+2} (q - z) v` with `v(0) = 1`. The solution is the
//! Picard series `v = Σ v_k`, `v_0 = 1`, `v_{k+1} = T[(q - z) v_k]` where
//!
//! * `l > -1/2`: `T[w](x) = (∫₀ˣ t w - x^{-(2l+1)} ∫₀ˣ t^{2l+2} w) / (2l+1)`,
//! * `l = -1/2`: `T[w](x) = ln x ∫₀ˣ t w - ∫₀ˣ t ln t w`.
//!
//! The integrals are evaluated on dyadic panels `[R/2, R]` with a Legendre
//! integration matrix, which resolves the power behaviour of `q` at zero
//! panel by panel. Below the smallest panel `v` is taken as `1`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::operator::{Potential, PotentialFn};
use crate::quadrature::{integrated_legendre, LegendrePanelRule};

const ORDER: usize = 16;
/// Panels below the matching point used by one series evaluation.
const DEPTH: usize = 64;
/// Extra panels above, available when the matching point is halved.
pub(crate) const MAX_HALVINGS: usize = 16;
const TERM_BUDGET: usize = 300;

/// Nodes and `q` values on the dyadic panels below `x_top`; independent of `z`.
#[derive(Debug, Clone)]
pub(crate) struct FrobeniusGrid {
    l: f64,
    log_case: bool,
    x_top: f64,
    rule: LegendrePanelRule,
    /// Ascending panels; panel `p` is `[R_p / 2, R_p]`.
    rights: Vec<f64>,
    xs: Vec<f64>,
    qs: Vec<f64>,
}

impl FrobeniusGrid {
    pub(crate) fn new(l: f64, q: &PotentialFn, x_top: f64) -> Self {
        let rule = LegendrePanelRule::new(ORDER);
        let panels = DEPTH + MAX_HALVINGS;
        let rights: Vec<f64> = (0..panels).map(|p| x_top * 0.5f64.powi((panels - 1 - p) as i32)).collect();
        let mut xs = Vec::with_capacity(panels * ORDER);
        for &r in &rights {
            for t in &rule.nodes {
                xs.push(0.25 * r * (t + 3.0));
            }
        }
        let qs = xs.iter().map(|&x| q.eval(x)).collect();
        FrobeniusGrid { l, log_case: 2.0 * l + 1.0 < 1e-10, x_top, rule, rights, xs, qs }
    }

    pub(crate) fn for_potential(p: &Potential, x_top: f64) -> Self {
        FrobeniusGrid::new(p.bessel_index().unwrap_or(0.0), p.q(), x_top)
    }

    pub(crate) fn x_top(&self) -> f64 {
        self.x_top
    }

    /// Matching point after `halvings` halvings of `x_top`.
    pub(crate) fn x_match(&self, halvings: usize) -> f64 {
        self.x_top * 0.5f64.powi(halvings as i32)
    }

    /// Weight factors `(a, b)` of the two moments at node `x` in a panel with
    /// right edge `r`: `a = t`, and `b = (t/r)^{2l+2}` or `t ln t`.
    fn factors(&self, x: f64, r: f64) -> (f64, f64) {
        if self.log_case {
            (x, x * x.ln())
        } else {
            (x, (x / r).powf(2.0 * self.l + 2.0))
        }
    }

    /// `T[w]` given panel-local moments `ip` (first) and `ir` (second).
    fn apply(&self, x: f64, r: f64, ip: Complex64, ir: Complex64) -> Complex64 {
        if self.log_case {
            ip * x.ln() - ir
        } else {
            let e = 2.0 * self.l + 2.0;
            (ip - ir * (x * (r / x).powf(e))) / (2.0 * self.l + 1.0)
        }
    }

    /// `v'` from the second moment (or the first one in the log case).
    fn derivative(&self, x: f64, r: f64, ip: Complex64, ir: Complex64) -> Complex64 {
        if self.log_case {
            ip / x
        } else {
            ir * (r / x).powf(2.0 * self.l + 2.0)
        }
    }

    /// Carries the scaled second moment from one panel to the next (twice as wide).
    fn carry(&self, ir: Complex64) -> Complex64 {
        if self.log_case {
            ir
        } else {
            ir * 0.5f64.powf(2.0 * self.l + 2.0)
        }
    }

    pub(crate) fn solve(&self, z: Complex64, halvings: usize) -> Result<SeriesSolution> {
        if halvings > MAX_HALVINGS {
            return Err(Error::SeriesNonConvergence { terms: 0, x_match: self.x_match(halvings) });
        }
        let n = ORDER;
        let hi = self.rights.len() - halvings;
        let lo = hi - DEPTH;
        let base = lo * n;
        let nodes = DEPTH * n;
        let w: Vec<Complex64> = self.qs[base..base + nodes].iter().map(|&q| Complex64::new(q, 0.0) - z).collect();
        let mut term = vec![Complex64::new(1.0, 0.0); nodes];
        let mut total = term.clone();
        let mut next = vec![Complex64::new(0.0, 0.0); nodes];
        let mut converged = false;
        let mut terms = 0;
        while terms < TERM_BUDGET {
            terms += 1;
            self.sweep(lo, hi, &w, &term, &mut next);
            let tmax = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (t, v) in total.iter_mut().zip(&next) {
                *t += v;
            }
            core::mem::swap(&mut term, &mut next);
            let vmax = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !vmax.is_finite() {
                break;
            }
            if tmax <= 1e-17 * vmax {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::SeriesNonConvergence { terms, x_match: self.x_match(halvings) });
        }
        // Panel data of the integrand for evaluation anywhere below x_match.
        let mut panels = Vec::with_capacity(DEPTH);
        let (mut ip, mut ir) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (k, p) in (lo..hi).enumerate() {
            let r = self.rights[p];
            let mut fp = Vec::with_capacity(n);
            let mut fr = Vec::with_capacity(n);
            for m in 0..n {
                let i = k * n + m;
                let (a, b) = self.factors(self.xs[base + i], r);
                fp.push(w[i] * total[i] * a);
                fr.push(w[i] * total[i] * b);
            }
            if k > 0 {
                ir = self.carry(ir);
            }
            let panel = SeriesPanel { right: r, fp, fr, ip0: ip, ir0: ir };
            let h2 = 0.25 * r;
            ip += h2 * dot(&self.rule.weights, &panel.fp);
            ir += h2 * dot(&self.rule.weights, &panel.fr);
            panels.push(panel);
        }
        let x_m = self.rights[hi - 1];
        let v = Complex64::new(1.0, 0.0) + self.apply(x_m, x_m, ip, ir);
        let dv = self.derivative(x_m, x_m, ip, ir);
        Ok(SeriesSolution {
            l: self.l,
            log_case: self.log_case,
            x_min: 0.5 * self.rights[lo],
            x_match: x_m,
            v_end: v,
            dv_end: dv,
            panels,
            halvings,
        })
    }

    /// One Picard step: `out = T[w * input]` at the nodes of panels `lo..hi`.
    fn sweep(&self, lo: usize, hi: usize, w: &[Complex64], input: &[Complex64], out: &mut [Complex64]) {
        let n = ORDER;
        let base = lo * n;
        let (mut ip, mut ir) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut fp = [Complex64::new(0.0, 0.0); ORDER];
        let mut fr = [Complex64::new(0.0, 0.0); ORDER];
        for (k, p) in (lo..hi).enumerate() {
            let r = self.rights[p];
            let h2 = 0.25 * r;
            for m in 0..n {
                let i = k * n + m;
                let (a, b) = self.factors(self.xs[base + i], r);
                let g = w[i] * input[i];
                fp[m] = g * a;
                fr[m] = g * b;
            }
            if k > 0 {
                ir = self.carry(ir);
            }
            for j in 0..n {
                let i = k * n + j;
                let cum = &self.rule.cumulative[j];
                let cp = ip + h2 * dot(cum, &fp);
                let cr = ir + h2 * dot(cum, &fr);
                out[i] = self.apply(self.xs[base + i], r, cp, cr);
            }
            ip += h2 * dot(&self.rule.weights, &fp);
            ir += h2 * dot(&self.rule.weights, &fr);
        }
    }
}

fn dot(w: &[f64], f: &[Complex64]) -> Complex64 {
    w.iter().zip(f).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + b * a)
}

#[derive(Debug, Clone)]
struct SeriesPanel {
    right: f64,
    fp: Vec<Complex64>,
    fr: Vec<Complex64>,
    ip0: Complex64,
    ir0: Complex64,
}

/// Converged series for one `z`, evaluable on `(0, x_match]`.
#[derive(Debug, Clone)]
pub(crate) struct SeriesSolution {
    l: f64,
    log_case: bool,
    x_min: f64,
    x_match: f64,
    v_end: Complex64,
    dv_end: Complex64,
    panels: Vec<SeriesPanel>,
    halvings: usize,
}

impl SeriesSolution {
    pub(crate) fn x_match(&self) -> f64 {
        self.x_match
    }

    pub(crate) fn halvings(&self) -> usize {
        self.halvings
    }

    /// `(v, v')` at `x` in `(0, x_match]`.
    pub(crate) fn reduced(&self, x: f64, grid: &FrobeniusGrid) -> (Complex64, Complex64) {
        if x >= self.x_match {
            return (self.v_end, self.dv_end);
        }
        if x < self.x_min {
            return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let k = self.panels.partition_point(|p| p.right < x).min(self.panels.len() - 1);
        let panel = &self.panels[k];
        let r = panel.right;
        let t = (4.0 * x / r - 3.0).clamp(-1.0, 1.0);
        let mut scratch = [0.0; ORDER + 1];
        let mut ileg = [0.0; ORDER];
        integrated_legendre(ORDER, t, &mut scratch, &mut ileg);
        let mut cp = panel.ip0;
        let mut cr = panel.ir0;
        for (kk, il) in ileg.iter().enumerate() {
            let row = &grid.rule.to_coeffs[kk];
            cp += dot(row, &panel.fp) * (0.25 * r * il);
            cr += dot(row, &panel.fr) * (0.25 * r * il);
        }
        let v = Complex64::new(1.0, 0.0) + grid.apply(x, r, cp, cr);
        let dv = grid.derivative(x, r, cp, cr);
        (v, dv)
    }

    /// `(u, u')` with `u = x^{l+1} v`.
    pub(crate) fn eval(&self, x: f64, grid: &FrobeniusGrid) -> (Complex64, Complex64) {
        let (v, dv) = self.reduced(x, grid);
        let l = self.l;
        let xl = if self.log_case { x.powf(-0.5) } else { x.powf(l) };
        let u = v * (xl * x);
        let du = v * ((l + 1.0) * xl) + dv * (xl * x);
        (u, du)
    }
}
