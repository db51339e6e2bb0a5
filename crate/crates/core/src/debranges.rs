//! De Branges functions `E(z, c) = phi(z, c) + i phi'(z, c)`, their
//! reproducing kernels, the weighted inner product of `B(c)`, growth
//! diagnostics and the ordering of nested spaces.
//!
//! Growth diagnostics (mean type, order, logarithmic integral) are finite
//! samples of asymptotic quantities. They give evidence, not certificates.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{composite_gauss, integrate, uniform_breaks, QuadOptions};
use crate::solution::{EntireSolution, Profile};
use crate::spectral::{transform_at_scaled, transform_on_atoms, GridFunction, SpectralMeasure};
use crate::I;

/// Distance `|ζ* - z|` below which the kernel uses its diagonal limit.
const DIAGONAL: f64 = 1e-6;

/// An entire function with the Hermite–Biehler property.
pub trait DeBrangesFunction {
    fn e(&self, z: Complex64) -> Result<Complex64>;

    /// `E#(z) = conj(E(conj z))`.
    fn e_sharp(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.e(z.conj())?.conj())
    }

    /// `(E(z), E#(z))`.
    fn e_pair(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.e(z)?, self.e_sharp(z)?))
    }

    /// `(E(z), E'(z))`, by default from fourth-order central differences.
    fn e_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let h = 1e-4 * (1.0 + z.norm());
        let d = (self.e(z + h)? - self.e(z - h)?) * 8.0 - (self.e(z + 2.0 * h)? - self.e(z - 2.0 * h)?);
        Ok((self.e(z)?, d / (12.0 * h)))
    }

    /// `(E#(z), E#'(z))`.
    fn e_sharp_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (e, de) = self.e_and_derivative(z.conj())?;
        Ok((e.conj(), de.conj()))
    }

    /// `ln|E(z)| - ln|E(conj z)|`, positive in the upper half-plane.
    fn hb_margin(&self, z: Complex64) -> Result<f64> {
        Ok(self.e(z)?.norm().ln() - self.e(z.conj())?.norm().ln())
    }
}

/// Closed-form test fixture, such as `E(z) = z + i`.
#[derive(Clone)]
pub struct SyntheticE {
    pub label: String,
    f: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl SyntheticE {
    pub fn new<F: Fn(Complex64) -> Complex64 + Send + Sync + 'static>(label: &str, f: F) -> Self {
        SyntheticE { label: label.into(), f: Arc::new(f) }
    }
}

impl DeBrangesFunction for SyntheticE {
    fn e(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.f)(z))
    }
}

type ScaledFn = Arc<dyn Fn(Complex64) -> Result<(Complex64, f64)> + Send + Sync>;

/// An entire function given by an evaluator of `(m, s)` with `F(z) = m e^s`,
/// so that values beyond the floating range stay usable.
#[derive(Clone)]
pub struct EntireFunction {
    pub label: String,
    scaled: ScaledFn,
}

impl core::fmt::Debug for EntireFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "EntireFunction({})", self.label)
    }
}

impl EntireFunction {
    pub fn new<F>(label: &str, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        EntireFunction::scaled(label, move |z| Ok((f(z)?, 0.0)))
    }

    pub fn scaled<F>(label: &str, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<(Complex64, f64)> + Send + Sync + 'static,
    {
        EntireFunction { label: label.into(), scaled: Arc::new(f) }
    }

    /// `e^{w(z)}` for an entire exponent `w`.
    pub fn exp_of<W>(label: &str, w: W) -> Self
    where
        W: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        EntireFunction::scaled(label, move |z| {
            let e = w(z);
            Ok((Complex64::from_polar(1.0, e.im), e.re))
        })
    }

    pub fn zero() -> Self {
        EntireFunction::new("0", |_| Ok(Complex64::new(0.0, 0.0)))
    }

    pub fn eval_scaled(&self, z: Complex64) -> Result<(Complex64, f64)> {
        (self.scaled)(z)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (m, s) = self.eval_scaled(z)?;
        if s > 700.0 {
            return Err(Error::Overflow { z });
        }
        Ok(m * s.exp())
    }

    pub fn ln_abs(&self, z: Complex64) -> Result<f64> {
        let (m, s) = self.eval_scaled(z)?;
        Ok(m.norm().ln() + s)
    }
}

/// `B(c)` built from an entire solution and a point `c` of `(a, b]`.
#[derive(Debug, Clone)]
pub struct DeBrangesSpace {
    solution: EntireSolution,
    c: f64,
}

/// Truncation control of the `B(c)` inner product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductOptions {
    /// Target size of the remaining tail relative to the accumulated value.
    pub tail_rel: f64,
    /// Relative tolerance of each quadrature segment.
    pub quad_rel: f64,
    /// Largest `|λ|` the integration may reach.
    pub lambda_cap: f64,
}

impl Default for InnerProductOptions {
    fn default() -> Self {
        InnerProductOptions { tail_rel: 1e-8, quad_rel: 1e-10, lambda_cap: 1e8 }
    }
}

impl DeBrangesSpace {
    pub fn new(solution: EntireSolution, c: f64) -> Result<Self> {
        let p = solution.potential();
        if !(c > p.a() && c <= p.b()) {
            return Err(Error::OutOfDomain { x: c, lo: p.a(), hi: p.b() });
        }
        Ok(DeBrangesSpace { solution, c })
    }

    pub fn solution(&self) -> &EntireSolution {
        &self.solution
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn profile(&self, z: Complex64) -> Result<Profile> {
        self.solution.profile_to(z, self.c)
    }

    /// `(phi(z, c), phi'(z, c))`.
    pub fn boundary_values(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let s = self.profile(z)?.eval(self.c)?;
        Ok((s.u, s.du))
    }

    /// `|E(λ)|² = phi(λ, c)² + phi'(λ, c)²` for real `λ`, as `(m, s)`
    /// with `|E|² = m e^s`.
    pub fn e_abs_sq_scaled(&self, lambda: f64) -> Result<(f64, f64)> {
        let st = self.profile(Complex64::new(lambda, 0.0))?.eval_scaled(self.c)?;
        Ok((st.u.norm_sqr() + st.du.norm_sqr(), 2.0 * st.log_scale))
    }

    /// `(E(z), E#(z))` sharing one scale factor.
    fn e_pair_scaled(&self, z: Complex64) -> Result<(Complex64, Complex64, f64)> {
        let st = self.profile(z)?.eval_scaled(self.c)?;
        Ok((st.u + I * st.du, st.u - I * st.du, st.log_scale))
    }

    /// `K(ζ, z)` as `(m, s)` with `K = m e^s`.
    pub fn kernel_scaled(&self, zeta: Complex64, z: Complex64) -> Result<(Complex64, f64)> {
        let w = zeta.conj();
        let d = w - z;
        if d.norm() < DIAGONAL {
            return Ok((kernel_formula(self, zeta, z)?, 0.0));
        }
        let (ez, hz, sz) = self.e_pair_scaled(z)?;
        let (ew, hw, sw) = self.e_pair_scaled(w)?;
        Ok(((ez * hw - ew * hz) / (2.0 * I * d), sz + sw))
    }

    pub fn kernel(&self, zeta: Complex64, z: Complex64) -> Result<Complex64> {
        kernel_formula(self, zeta, z)
    }

    pub fn kernel_by_integral(&self, zeta: Complex64, z: Complex64) -> Result<Complex64> {
        kernel_integral(&self.solution, self.c, zeta, z)
    }

    /// `E(·, c)` as an [`EntireFunction`] with overflow-free `ln|E|`.
    pub fn e_function(&self) -> EntireFunction {
        let h = self.clone();
        EntireFunction::scaled("E", move |z| {
            let (e, _, s) = h.e_pair_scaled(z)?;
            Ok((e, s))
        })
    }

    /// `K(ζ, ·, c)` as an [`EntireFunction`].
    pub fn kernel_function(&self, zeta: Complex64) -> EntireFunction {
        let s = self.clone();
        EntireFunction::scaled("K", move |z| s.kernel_scaled(zeta, z))
    }

    /// `(1/π) ∫ F(λ) G(λ)* / |E(λ, c)|² dλ`.
    pub fn inner_product(&self, f: &EntireFunction, g: &EntireFunction, opts: InnerProductOptions) -> Result<Complex64> {
        let same = Arc::ptr_eq(&f.scaled, &g.scaled);
        let kernel = |lambda: f64| -> Result<Complex64> {
            let z = Complex64::new(lambda, 0.0);
            let (w, sw) = self.e_abs_sq_scaled(lambda)?;
            let (fv, sf) = f.eval_scaled(z)?;
            let (gv, sg) = if same { (fv, sf) } else { g.eval_scaled(z)? };
            let v = fv * gv.conj();
            if v == Complex64::new(0.0, 0.0) {
                return Ok(v);
            }
            Ok(v * ((sf + sg - sw).exp() / (w * PI)))
        };
        let dk = PI / (2.0 * self.c);
        let pos = half_line(|k| Ok(kernel(k * k)? * (2.0 * k)), dk, opts)?;
        let neg = half_line(|k| Ok(kernel(-k * k)? * (2.0 * k)), dk, opts)?;
        Ok(pos + neg)
    }

    pub fn norm_sq(&self, f: &EntireFunction, opts: InnerProductOptions) -> Result<f64> {
        Ok(self.inner_product(f, f, opts)?.re)
    }
}

/// `∫_0^∞ h(k) dk` by octaves `[K, 2K]` on panels of width `dk`, with a
/// geometric estimate of the remaining tail added at the end.
fn half_line<H>(mut h: H, dk: f64, opts: InnerProductOptions) -> Result<Complex64>
where
    H: FnMut(f64) -> Result<Complex64>,
{
    let qopts = QuadOptions { rel: opts.quad_rel, abs: 0.0, max_intervals: 200_000 };
    let k_cap = opts.lambda_cap.sqrt();
    let mut hi = 16.0 * dk;
    let mut total = integrate(&mut h, &uniform_breaks(0.0, hi, 16), qopts)?.value;
    let mut prev: Option<Complex64> = None;
    let mut prev_ext: Option<Complex64> = None;
    loop {
        let lo = hi;
        hi = 2.0 * lo;
        let panels = ((hi - lo) / dk).ceil() as usize;
        let c = integrate(&mut h, &uniform_breaks(lo, hi, panels), qopts)?.value;
        total += c;
        if c == Complex64::new(0.0, 0.0) && prev.is_some_and(|p| p == Complex64::new(0.0, 0.0)) {
            return Ok(total);
        }
        let tail = match prev {
            Some(p) if p.norm() > 0.0 => {
                let r = c.norm() / p.norm();
                if r < 0.9 { c * (r / (1.0 - r)) } else { Complex64::new(f64::INFINITY, 0.0) }
            }
            _ => Complex64::new(f64::INFINITY, 0.0),
        };
        let ext = total + tail;
        let scale = ext.norm().max(1e-300);
        if tail.norm().is_finite() {
            let settled = match prev_ext {
                Some(pe) => (ext - pe).norm() <= opts.tail_rel * scale,
                None => false,
            };
            if settled || tail.norm() <= opts.tail_rel * scale {
                return Ok(ext);
            }
            prev_ext = Some(ext);
        }
        if hi >= k_cap {
            return Err(Error::TailDivergence { cut: hi * hi, partial: total });
        }
        prev = Some(c);
    }
}

impl DeBrangesFunction for DeBrangesSpace {
    fn e(&self, z: Complex64) -> Result<Complex64> {
        let (u, du) = self.boundary_values(z)?;
        Ok(u + I * du)
    }

    /// `phi` is real entire, so `E#(z) = phi(z, c) - i phi'(z, c)`.
    fn e_sharp(&self, z: Complex64) -> Result<Complex64> {
        let (u, du) = self.boundary_values(z)?;
        Ok(u - I * du)
    }

    fn e_pair(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (u, du) = self.boundary_values(z)?;
        Ok((u + I * du, u - I * du))
    }

    /// Central differences taken on a frozen integration mesh.
    fn e_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (e, de, _, _) = self.frozen_derivatives(z)?;
        Ok((e, de))
    }

    fn e_sharp_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (_, _, es, des) = self.frozen_derivatives(z)?;
        Ok((es, des))
    }

    fn hb_margin(&self, z: Complex64) -> Result<f64> {
        let s = self.profile(z)?.eval_scaled(self.c)?;
        Ok((s.u + I * s.du).norm().ln() - (s.u - I * s.du).norm().ln())
    }
}

impl DeBrangesSpace {
    /// `(E, E', E#, E#')` at `z`.
    fn frozen_derivatives(&self, z: Complex64) -> Result<(Complex64, Complex64, Complex64, Complex64)> {
        let base = self.profile(z)?;
        let h = 1e-4 * (1.0 + z.norm());
        let at = |dz: f64| -> Result<(Complex64, Complex64)> {
            let w = z + dz;
            let p = base.replay(w, self.solution.gauge_exponent(w))?;
            let s = p.eval(self.c)?;
            Ok((s.u, s.du))
        };
        let (u0, du0) = base.eval(self.c).map(|s| (s.u, s.du))?;
        let (up1, dup1) = at(h)?;
        let (um1, dum1) = at(-h)?;
        let (up2, dup2) = at(2.0 * h)?;
        let (um2, dum2) = at(-2.0 * h)?;
        let d = |p1: Complex64, m1: Complex64, p2: Complex64, m2: Complex64| ((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * h);
        let du_z = d(up1, um1, up2, um2);
        let ddu_z = d(dup1, dum1, dup2, dum2);
        Ok((u0 + I * du0, du_z + I * ddu_z, u0 - I * du0, du_z - I * ddu_z))
    }
}

/// `E(z, c)` for the solution `sol`.
pub fn debranges_function(sol: &EntireSolution, c: f64, z: Complex64) -> Result<Complex64> {
    DeBrangesSpace::new(sol.clone(), c)?.e(z)
}

/// `K(ζ, z) = (E(z) E#(ζ*) - E(ζ*) E#(z)) / (2i (ζ* - z))`, with the
/// derivative form at the midpoint when `ζ*` and `z` nearly coincide.
pub fn kernel_formula<D: DeBrangesFunction + ?Sized>(e: &D, zeta: Complex64, z: Complex64) -> Result<Complex64> {
    let w = zeta.conj();
    let d = w - z;
    if d.norm() < DIAGONAL {
        let s = (w + z) * 0.5;
        let (es, des) = e.e_and_derivative(s)?;
        let (hs, dhs) = e.e_sharp_and_derivative(s)?;
        return Ok((es * dhs - des * hs) / (2.0 * I));
    }
    let (ez, hz) = e.e_pair(z)?;
    let (ew, hw) = e.e_pair(w)?;
    Ok((ez * hw - ew * hz) / (2.0 * I * d))
}

/// `K(ζ, z, c) = ∫_a^c conj(phi(ζ, x)) phi(z, x) dx` by adaptive quadrature.
pub fn kernel_integral(sol: &EntireSolution, c: f64, zeta: Complex64, z: Complex64) -> Result<Complex64> {
    let pz = sol.profile_to(z, c)?;
    let pw = if zeta == z { pz.clone() } else { sol.profile_to(zeta, c)? };
    let a = sol.a();
    let mut breaks = pz.mesh();
    if let Some(xm) = sol.x_match() {
        let mut x = xm.min(c);
        while x > 1e-6 * xm {
            breaks.push(x);
            x *= 0.25;
        }
    }
    breaks.retain(|&x| x >= a && x <= c);
    breaks.push(a);
    breaks.push(c);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup();
    let q = integrate(
        |x| Ok(pw.eval(x)?.u.conj() * pz.eval(x)?.u),
        &breaks,
        QuadOptions { rel: 1e-12, abs: 0.0, max_intervals: 100_000 },
    )?;
    Ok(q.value)
}

/// Finite-ladder estimate of `limsup ln|N(iy)| / y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTypeEstimate {
    /// `ln|N(iy)|/y` at the top of the ladder.
    pub estimate: f64,
    /// Least-squares slope of `ln|N(iy)|/y` against `ln y` over the top decade.
    pub trend_slope: f64,
    pub samples: Vec<(f64, f64)>,
}

pub fn mean_type_estimate(n: &EntireFunction, y_ladder: &[f64]) -> Result<MeanTypeEstimate> {
    if y_ladder.is_empty() || y_ladder.iter().any(|&y| !(y > 0.0)) {
        return Err(invalid("mean type needs a positive ladder"));
    }
    let samples = y_ladder
        .iter()
        .map(|&y| Ok((y, n.ln_abs(Complex64::new(0.0, y))? / y)))
        .collect::<Result<Vec<_>>>()?;
    let y_top = y_ladder.iter().copied().fold(0.0, f64::max);
    let top: Vec<(f64, f64)> = samples.iter().copied().filter(|&(y, _)| y >= y_top / 10.0).collect();
    let estimate = top.iter().max_by(|a, b| a.0.partial_cmp(&b.0).unwrap()).map_or(0.0, |s| s.1);
    let pts: Vec<(f64, f64)> = top.iter().map(|&(y, v)| (y.ln(), v)).collect();
    Ok(MeanTypeEstimate { estimate, trend_slope: ls_slope(&pts), samples })
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 { 0.0 } else { sxy / sxx }
}

/// Growth order and logarithmic integral of an entire function.
#[derive(Debug, Clone, PartialEq)]
pub struct CartwrightDiagnostics {
    /// Slope of `ln ln M(r)` against `ln r`.
    pub order_estimate: f64,
    /// Trapezoidal `∫ ln⁺|F(x)| / (1 + x²) dx` over the real grid.
    pub log_integral: f64,
    /// Outer-octave contribution of the log integral over the one before it.
    pub tail_ratio: f64,
    pub log_integral_convergent: bool,
    /// Heuristic verdict, never a certificate.
    pub consistent_with_cartwright: bool,
    pub ln_max_modulus: Vec<(f64, f64)>,
}

pub fn cartwright_diagnostics(f: &EntireFunction, radius_ladder: &[f64], real_grid: &[f64]) -> Result<CartwrightDiagnostics> {
    const CIRCLE: usize = 64;
    let mut ln_max = Vec::with_capacity(radius_ladder.len());
    for &r in radius_ladder {
        let mut m = f64::NEG_INFINITY;
        for j in 0..CIRCLE {
            let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / CIRCLE as f64);
            m = m.max(f.ln_abs(z)?);
        }
        ln_max.push((r, m));
    }
    let pts: Vec<(f64, f64)> = ln_max.iter().filter(|p| p.1 > 0.0).map(|&(r, m)| (r.ln(), m.ln())).collect();
    let order_estimate = if pts.len() < 2 { 0.0 } else { ls_slope(&pts).max(0.0) };

    let mut grid: Vec<f64> = real_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let vals = grid
        .iter()
        .map(|&x| Ok(f.ln_abs(Complex64::new(x, 0.0))?.max(0.0) / (1.0 + x * x)))
        .collect::<Result<Vec<f64>>>()?;
    let x_out = grid.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let band = |lo: f64, hi: f64| -> f64 {
        grid.windows(2)
            .zip(vals.windows(2))
            .filter(|(g, _)| {
                let m = 0.5 * (g[0] + g[1]).abs();
                m > lo && m <= hi
            })
            .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
            .sum()
    };
    let log_integral = band(-1.0, f64::INFINITY);
    let outer = band(x_out / 2.0, x_out);
    let inner = band(x_out / 4.0, x_out / 2.0);
    let tail_ratio = if inner > 0.0 { outer / inner } else if outer > 0.0 { f64::INFINITY } else { 0.0 };
    let convergent = log_integral.is_finite() && tail_ratio < 1.0;
    let consistent = order_estimate < 0.95 || ((order_estimate - 1.0).abs() <= 0.05 && convergent);
    Ok(CartwrightDiagnostics {
        order_estimate,
        log_integral,
        tail_ratio,
        log_integral_convergent: convergent,
        consistent_with_cartwright: consistent,
        ln_max_modulus: ln_max,
    })
}

/// Sample count and worst margin of a Hermite–Biehler or positivity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepReport {
    pub samples: usize,
    pub violations: usize,
    pub worst: f64,
}

/// `n × n` grid on `[-re, re] × (0, im]`.
pub fn upper_half_grid(re: f64, im: f64, n: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = if n == 1 { 0.0 } else { -re + 2.0 * re * i as f64 / (n - 1) as f64 };
        for j in 1..=n {
            pts.push(Complex64::new(x, im * j as f64 / n as f64));
        }
    }
    pts
}

/// Counts points with `|E(z)| <= |E(z*)|`.
pub fn hermite_biehler_sweep<D: DeBrangesFunction + ?Sized>(e: &D, points: &[Complex64]) -> Result<SweepReport> {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for &z in points {
        let m = e.hb_margin(z)?;
        if !(m > 0.0) {
            violations += 1;
        }
        worst = worst.min(m);
    }
    Ok(SweepReport { samples: points.len(), violations, worst })
}

/// Counts points with `K(ζ, ζ) <= 0`.
pub fn kernel_positivity_sweep<D: DeBrangesFunction + ?Sized>(e: &D, points: &[Complex64]) -> Result<SweepReport> {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for &z in points {
        let k = kernel_formula(e, z, z)?;
        let v = k.re;
        if !(v > 0.0) || k.im.abs() > 1e-6 * v.abs().max(1e-300) {
            violations += 1;
        }
        worst = worst.min(v);
    }
    Ok(SweepReport { samples: points.len(), violations, worst })
}

/// Ordering of two spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    FirstInSecond,
    SecondInFirst,
    Equal,
    Incomparable,
}

/// Per-probe outcome of [`verify_containment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeContainment {
    pub support_right: f64,
    pub norm_l2: f64,
    /// Relative distance of `f̂` from each space, measured in `L²(ρ)`.
    pub error_in_first: f64,
    pub error_in_second: f64,
    /// `B(c)` norms of `f̂` from the weighted inner product, when the
    /// probe is supported in `(a, c)`.
    pub norm_in_first: Option<f64>,
    pub norm_in_second: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub verdict: Containment,
    /// A probe of the larger space lies outside the smaller one.
    pub strict: bool,
    pub probes: Vec<ProbeContainment>,
}

/// Largest relative representation error still counted as membership.
pub const MEMBERSHIP_TOL: f64 = 1e-2;

/// Relative `L²(ρ)` distance of `F` (given on the atoms) from `B(c)`: the
/// orthogonal projection is `f` restricted to `(a, c)`, so the distance is
/// `sqrt(‖F‖²_ρ - ∫_a^c |Σ F(λ_n) w_n phi(λ_n, x)|² dx)`.
struct Projector {
    weights: Vec<f64>,
    quad_w: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

impl Projector {
    fn new(space: &DeBrangesSpace, measure: &SpectralMeasure) -> Result<Self> {
        let (a, c) = (space.solution.a(), space.c);
        let n = measure.len().max(1);
        let panels = (8 * n).max(32);
        let (xs, quad_w) = composite_gauss(a, c, panels, 8);
        let mut phi = Vec::with_capacity(measure.len());
        for at in measure.atoms() {
            let prof = space.profile(Complex64::new(at.lambda, 0.0))?;
            phi.push(xs.iter().map(|&x| prof.eval(x).map(|s| s.u.re)).collect::<Result<Vec<f64>>>()?);
        }
        Ok(Projector { weights: measure.weights(), quad_w, phi })
    }

    fn error(&self, fhat: &[Complex64]) -> (f64, f64) {
        let total: f64 = fhat.iter().zip(&self.weights).map(|(f, w)| f.norm_sqr() * w).sum();
        let mut proj = 0.0;
        for (j, qw) in self.quad_w.iter().enumerate() {
            let mut g = Complex64::new(0.0, 0.0);
            for ((row, f), w) in self.phi.iter().zip(fhat).zip(&self.weights) {
                g += f * (w * row[j]);
            }
            proj += g.norm_sqr() * qw;
        }
        let rel = if total > 0.0 { ((total - proj).max(0.0) / total).sqrt() } else { 0.0 };
        (rel, total.sqrt())
    }
}

/// Decides the ordering of `h1` and `h2` from probe functions, using the
/// spectral measure both spaces embed into. Probes supported in `(a, c_i)`
/// must lie in the space of every larger `c`. With `norms` set, the `B(c)`
/// norms of the probe transforms are computed as well.
pub fn verify_containment(
    h1: &DeBrangesSpace,
    h2: &DeBrangesSpace,
    measure: &SpectralMeasure,
    probes: &[GridFunction],
    norms: Option<InnerProductOptions>,
) -> Result<ContainmentReport> {
    let p1 = Projector::new(h1, measure)?;
    let p2 = Projector::new(h2, measure)?;
    let mut reports = Vec::with_capacity(probes.len());
    for f in probes {
        let fhat = transform_on_atoms(&h1.solution, f, measure)?;
        let (e1, _) = p1.error(&fhat);
        let (e2, _) = p2.error(&fhat);
        let fn_hat = {
            let sol = h1.solution.clone();
            let f = f.clone();
            EntireFunction::scaled("f̂", move |z| transform_at_scaled(&sol, &f, z))
        };
        let norm_in = |h: &DeBrangesSpace| -> Result<Option<f64>> {
            match norms {
                Some(opts) if f.c <= h.c => Ok(Some(h.norm_sq(&fn_hat, opts)?.max(0.0).sqrt())),
                _ => Ok(None),
            }
        };
        reports.push(ProbeContainment {
            support_right: f.c,
            norm_l2: f.norm_sq().sqrt(),
            error_in_first: e1,
            error_in_second: e2,
            norm_in_first: norm_in(h1)?,
            norm_in_second: norm_in(h2)?,
        });
    }
    let in_first = |r: &ProbeContainment| r.support_right <= h1.c;
    let in_second = |r: &ProbeContainment| r.support_right <= h2.c;
    let first_sub = reports.iter().filter(|r| in_first(r)).all(|r| r.error_in_second < MEMBERSHIP_TOL);
    let second_sub = reports.iter().filter(|r| in_second(r)).all(|r| r.error_in_first < MEMBERSHIP_TOL);
    let (verdict, strict) = match (first_sub, second_sub) {
        (true, true) => (Containment::Equal, false),
        (true, false) => (Containment::FirstInSecond, true),
        (false, true) => (Containment::SecondInFirst, true),
        (false, false) => (Containment::Incomparable, false),
    };
    Ok(ContainmentReport { verdict, strict, probes: reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Potential, PotentialFn};

    fn free_space(c: f64) -> DeBrangesSpace {
        let s = EntireSolution::regular(Potential::regular(0.0, PI, PotentialFn::Zero).unwrap(), 0.0).unwrap();
        DeBrangesSpace::new(s, c).unwrap()
    }

    fn bessel_space(c: f64) -> DeBrangesSpace {
        let s = EntireSolution::bessel(Potential::bessel(1.0, PI, PotentialFn::Zero).unwrap()).unwrap();
        DeBrangesSpace::new(s, c).unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn e_examples() {
        let h = free_space(PI);
        let e0 = h.e(cx(0.0, 0.0)).unwrap();
        assert!((e0 - cx(PI, 1.0)).norm() < 1e-12);
        let k = 1.3;
        let e = h.e(cx(k * k, 0.0)).unwrap();
        assert!((e - cx((k * PI).sin() / k, (k * PI).cos())).norm() < 1e-9);
        let syn = SyntheticE::new("z+i", |z| z + I);
        for z in [cx(1.0, 0.5), cx(-3.0, 2.0)] {
            let lhs = syn.e(z).unwrap().norm_sqr() - syn.e(z.conj()).unwrap().norm_sqr();
            assert!((lhs - 4.0 * z.im).abs() < 1e-12);
        }
        assert_eq!(hermite_biehler_sweep(&syn, &upper_half_grid(50.0, 50.0, 5)).unwrap().violations, 0);
    }

    #[test]
    fn kernel_examples() {
        let h = free_space(PI);
        let k00 = h.kernel(cx(0.0, 0.0), cx(0.0, 0.0)).unwrap();
        assert!((k00.re - PI.powi(3) / 3.0).abs() < 1e-8, "{k00}");
        let k14 = h.kernel(cx(1.0, 0.0), cx(4.0, 0.0)).unwrap();
        let i14 = h.kernel_by_integral(cx(1.0, 0.0), cx(4.0, 0.0)).unwrap();
        assert!(k14.norm() < 1e-9 && (k14 - i14).norm() < 1e-8);
        let (a, b) = (cx(2.0, 3.0), cx(-5.0, 1.5));
        assert!((h.kernel(a, b).unwrap() - h.kernel(b, a).unwrap().conj()).norm() < 1e-9);
        let kd = h.kernel_by_integral(cx(0.0, 7.0), cx(0.0, 7.0)).unwrap();
        assert!(kd.re > 0.0 && kd.im.abs() < 1e-12 * kd.re);
        let hb = bessel_space(PI);
        let kb = hb.kernel_by_integral(cx(0.0, 0.0), cx(0.0, 0.0)).unwrap();
        assert!((kb.re - PI.powi(5) / 5.0).abs() < 1e-7 * kb.re);
        let kf = hb.kernel(cx(0.0, 0.0), cx(0.0, 0.0)).unwrap();
        assert!((kf.re - PI.powi(5) / 5.0).abs() < 1e-7 * kf.re);
    }

    #[test]
    fn gauge_covariance_of_kernel() {
        let h = free_space(2.0);
        let g = crate::solution::RescalingFunction::polynomial(alloc::vec![0.1, 0.02, -0.001]).unwrap();
        let hg = DeBrangesSpace::new(h.solution().rescaled(g.clone()), 2.0).unwrap();
        let (zeta, z) = (cx(3.0, 1.0), cx(-2.0, 4.0));
        let expected = h.kernel(zeta, z).unwrap() * (g.eval(zeta).conj() + g.eval(z)).exp();
        assert!((hg.kernel(zeta, z).unwrap() - expected).norm() < 1e-9 * expected.norm());
    }

    #[test]
    fn inner_product_reproduces_kernel_diagonal() {
        let h = free_space(PI);
        let k0 = h.kernel_function(cx(0.0, 0.0));
        let opts = InnerProductOptions { tail_rel: 1e-7, ..Default::default() };
        let v = h.inner_product(&k0, &k0, opts).unwrap();
        assert!((v.re - PI.powi(3) / 3.0).abs() < 1e-5 * PI.powi(3) / 3.0, "{v}");
        let z = h.inner_product(&EntireFunction::zero(), &k0, opts).unwrap();
        assert_eq!(z, cx(0.0, 0.0));
    }

    #[test]
    fn mean_type_examples() {
        let n = EntireFunction::exp_of("exp(-iz)", |z| -I * z);
        let ys = [1e2, 2e2, 5e2, 1e3];
        let m = mean_type_estimate(&n, &ys).unwrap();
        assert!((m.estimate - 1.0).abs() < 1e-3);
        let one = EntireFunction::new("1", |_| Ok(cx(1.0, 0.0)));
        assert_eq!(mean_type_estimate(&one, &ys).unwrap().estimate, 0.0);
        let e = free_space(PI).e_function();
        let m = mean_type_estimate(&e, &ys).unwrap();
        assert!(m.estimate > 0.0 && m.estimate < 0.1 && m.trend_slope < 0.0, "{m:?}");
    }

    #[test]
    fn cartwright_examples() {
        let radii = [1e2, 3e2, 1e3, 3e3, 1e4];
        let real: Vec<f64> = (-400..=400).map(|i| i as f64 * 25.0).collect();
        let d = cartwright_diagnostics(&free_space(PI).e_function(), &radii, &real).unwrap();
        assert!((d.order_estimate - 0.5).abs() < 0.05, "{d:?}");
        assert!(d.consistent_with_cartwright);
        let g = EntireFunction::exp_of("exp(z^2)", |z| z * z);
        let d = cartwright_diagnostics(&g, &radii, &real).unwrap();
        assert!((d.order_estimate - 2.0).abs() < 0.05 && !d.consistent_with_cartwright);
        let one = EntireFunction::new("1", |_| Ok(cx(1.0, 0.0)));
        let d = cartwright_diagnostics(&one, &radii, &real).unwrap();
        assert_eq!(d.order_estimate, 0.0);
        assert_eq!(d.log_integral, 0.0);
        assert!(d.consistent_with_cartwright);
    }

    #[test]
    fn hermite_biehler_and_positivity() {
        let grid = upper_half_grid(50.0, 50.0, 20);
        for h in [free_space(PI), free_space(1.0), bessel_space(2.0)] {
            assert_eq!(hermite_biehler_sweep(&h, &grid).unwrap().violations, 0);
            assert_eq!(kernel_positivity_sweep(&h, &grid[..40]).unwrap().violations, 0);
        }
    }
}
