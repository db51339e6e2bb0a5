//! Eigenvalues, spectral measure atoms and the transform `f ↦ f̂`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::ode::{self, ScaledState};
use crate::operator::PotentialKind;
use crate::quadrature::{integrate, QuadOptions};
use crate::roots::brent;
use crate::solution::{EntireSolution, RescalingFunction};

/// One atom `weight · δ_lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

/// Finite atomic measure `Σ w_n δ_{λ_n}` truncated at `lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    lambda_max: f64,
    gauge: String,
}

/// Slack allowed above `lambda_max` for an eigenvalue sitting on it.
fn top_slack(lambda_max: f64) -> f64 {
    1e-10 * (1.0 + lambda_max.abs())
}

/// Atom-by-atom comparison of two measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureComparison {
    /// Number of atoms matched within the alignment tolerance.
    pub matched: usize,
    /// Atoms of either measure without a partner.
    pub unmatched: usize,
    /// `|λ¹_1 - λ²_1|` between the lowest atoms.
    pub first_atom_difference: f64,
    /// Largest `|λ¹_n - λ²_n|` over index-paired atoms.
    pub max_lambda_difference: f64,
    /// Ratio `w²/w¹` at the lowest common atom.
    pub gauge_ratio: f64,
    /// Largest relative weight mismatch after dividing by `gauge_ratio`.
    pub max_weight_difference: f64,
}

impl MeasureComparison {
    pub fn equal(&self, weight_tol: f64) -> bool {
        self.unmatched == 0 && self.matched > 0 && self.max_weight_difference <= weight_tol
    }
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<Atom>, lambda_max: f64, gauge: impl Into<String>) -> Result<Self> {
        if !lambda_max.is_finite() {
            return Err(invalid("lambda_max must be finite"));
        }
        for a in &atoms {
            if !a.lambda.is_finite() || !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "atom ({}, {}) needs a finite position and a positive weight",
                    a.lambda, a.weight
                )));
            }
            if a.lambda > lambda_max + top_slack(lambda_max) {
                return Err(Error::InvalidArgument(format!(
                    "atom at {} exceeds lambda_max {lambda_max}",
                    a.lambda
                )));
            }
        }
        if !atoms.windows(2).all(|w| w[0].lambda < w[1].lambda) {
            return Err(invalid("atoms must be strictly increasing"));
        }
        Ok(SpectralMeasure { atoms, lambda_max, gauge: gauge.into() })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.lambda).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn gauge(&self) -> &str {
        &self.gauge
    }

    /// Pairs atoms whose positions agree within `1e-6 (1 + |λ|)` and reports
    /// the residual weight mismatch after matching the lowest common atom.
    pub fn compare(&self, other: &SpectralMeasure) -> MeasureComparison {
        let mut pairs = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() && j < other.atoms.len() {
            let (a, b) = (self.atoms[i], other.atoms[j]);
            let tol = 1e-6 * (1.0 + a.lambda.abs());
            if (a.lambda - b.lambda).abs() <= tol {
                pairs.push((a, b));
                i += 1;
                j += 1;
            } else if a.lambda < b.lambda {
                i += 1;
            } else {
                j += 1;
            }
        }
        let first = match (self.atoms.first(), other.atoms.first()) {
            (Some(a), Some(b)) => (a.lambda - b.lambda).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        let max_lambda = self
            .atoms
            .iter()
            .zip(&other.atoms)
            .map(|(a, b)| (a.lambda - b.lambda).abs())
            .fold(0.0, f64::max);
        let gauge_ratio = pairs.first().map(|(a, b)| b.weight / a.weight).unwrap_or(f64::NAN);
        let max_weight = pairs
            .iter()
            .map(|(a, b)| (b.weight / gauge_ratio - a.weight).abs() / a.weight)
            .fold(0.0, f64::max);
        MeasureComparison {
            matched: pairs.len(),
            unmatched: self.atoms.len() + other.atoms.len() - 2 * pairs.len(),
            first_atom_difference: first,
            max_lambda_difference: max_lambda,
            gauge_ratio,
            max_weight_difference: if pairs.is_empty() { f64::INFINITY } else { max_weight },
        }
    }
}

/// Prüfer angle `θ(b)` with `(phi, phi') = r (sin θ, cos θ)`.
fn prufer_angle(sol: &EntireSolution, lambda: f64) -> Result<f64> {
    let p = sol.potential();
    let (a, b) = (p.a(), p.b());
    let (x0, theta0) = match p.kind() {
        PotentialKind::Regular => {
            let angle = sol.boundary_angle().unwrap_or(0.0);
            if p.effective(a).is_finite() {
                (a, angle)
            } else {
                let x0 = a + 1e-10 * (b - a);
                let y0 = ScaledState::new(a, Complex64::new(angle.sin(), 0.0), Complex64::new(angle.cos(), 0.0));
                let t = ode::integrate(p, Complex64::new(lambda, 0.0), y0, x0, sol.tolerances())?;
                let e = t.end();
                (x0, e.u.re.atan2(e.du.re))
            }
        }
        PotentialKind::Bessel { .. } => {
            let xm = sol.x_match().unwrap_or(0.1);
            let xs = if lambda.abs() > 0.0 { xm.min(0.5 / lambda.abs().sqrt()) } else { xm };
            let st = sol.eval_scaled(Complex64::new(lambda, 0.0), xs)?;
            (xs, st.u.re.atan2(st.du.re))
        }
    };
    ode::dopri_scalar(
        |x, th| {
            let (s, c) = th.sin_cos();
            c * c + (lambda - p.effective(x)) * s * s
        },
        x0,
        theta0,
        b,
        1e-12,
    )
}

/// Number of eigenvalues `<= lambda` for the condition
/// `cos(angle) phi(b) + sin(angle) phi'(b) = 0` at the right endpoint.
pub fn eigenvalue_count(sol: &EntireSolution, right_angle: f64, lambda: f64) -> Result<usize> {
    let theta = prufer_angle(sol, lambda)?;
    let n = ((theta + right_angle) / core::f64::consts::PI + 1e-12).floor();
    Ok(if n > 0.0 { n as usize } else { 0 })
}

fn boundary_function(sol: &EntireSolution, right_angle: f64, lambda: f64) -> Result<f64> {
    let s = sol.eval_scaled(Complex64::new(lambda, 0.0), sol.b())?;
    Ok(right_angle.cos() * s.u.re + right_angle.sin() * s.du.re)
}

/// Lower bound for the spectrum: `inf q - 1`, lowered until no eigenvalue lies below.
fn spectrum_floor(sol: &EntireSolution, right_angle: f64, lambda_max: f64) -> Result<f64> {
    let p = sol.potential();
    let (a, b) = (p.a(), p.b());
    let inf_q = (1..200)
        .map(|i| p.q().eval(a + (b - a) * i as f64 / 200.0))
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let mut lo = (inf_q - 1.0).min(lambda_max - 1.0);
    if !lo.is_finite() {
        lo = lambda_max - 1.0;
    }
    for _ in 0..60 {
        if eigenvalue_count(sol, right_angle, lo)? == 0 {
            return Ok(lo);
        }
        lo -= 2.0 * (1.0 + lo.abs());
    }
    Err(Error::BracketExhausted { found: Vec::new() })
}

/// All eigenvalues `<= lambda_max`, each isolated by the oscillation count
/// and polished by Brent's method on the boundary function.
pub fn eigenvalues(sol: &EntireSolution, right_angle: f64, lambda_max: f64) -> Result<Vec<f64>> {
    if !lambda_max.is_finite() {
        return Err(invalid("lambda_max must be finite"));
    }
    let top = lambda_max + 1e-6 * (1.0 + lambda_max.abs());
    let n_top = eigenvalue_count(sol, right_angle, top)?;
    if n_top == 0 {
        return Ok(Vec::new());
    }
    let lo = spectrum_floor(sol, right_angle, lambda_max)?;
    // Initial grid: equal spacing in k = sqrt(λ), matched to free oscillation.
    let dk = core::f64::consts::PI / (2.0 * (sol.b() - sol.a()));
    let mut grid = alloc::vec![lo];
    if lo < 0.0 {
        let mut kk = (-lo).sqrt() - dk;
        while kk > 0.0 {
            grid.push(-kk * kk);
            kk -= dk;
        }
    }
    let mut k = if lo > 0.0 { lo.sqrt() + dk } else { dk };
    while k * k < top {
        grid.push(k * k);
        k += dk;
    }
    grid.push(top);
    grid.dedup_by(|x, y| *x <= *y);

    let mut counts = Vec::with_capacity(grid.len());
    for &g in &grid {
        counts.push(eigenvalue_count(sol, right_angle, g)?);
    }
    let mut cells = Vec::new();
    let mut stack = Vec::new();
    for i in (0..grid.len() - 1).rev() {
        stack.push((grid[i], counts[i], grid[i + 1], counts[i + 1]));
    }
    let mut found = Vec::new();
    while let Some((l, nl, h, nh)) = stack.pop() {
        match nh.saturating_sub(nl) {
            0 => {}
            1 => cells.push((l, h)),
            _ => {
                let m = 0.5 * (l + h);
                if h - l <= 1e-13 * (1.0 + m.abs()) {
                    return Err(Error::BracketExhausted { found });
                }
                let nm = eigenvalue_count(sol, right_angle, m)?;
                stack.push((m, nm, h, nh));
                stack.push((l, nl, m, nm));
            }
        }
    }
    for (l, h) in cells {
        let f = |x: f64| boundary_function(sol, right_angle, x);
        let (mut l2, mut h2) = (l, h);
        let (mut fl, mut fh) = (f(l2)?, f(h2)?);
        let mut widen = 1e-10 * (1.0 + h.abs());
        let mut tries = 0;
        while fl.signum() == fh.signum() && fl != 0.0 && fh != 0.0 {
            tries += 1;
            if tries > 30 {
                return Err(Error::BracketExhausted { found });
            }
            h2 += widen;
            l2 -= widen;
            widen *= 2.0;
            fl = f(l2)?;
            fh = f(h2)?;
        }
        let root = brent(f, l2, h2, 1e-13 * (1.0 + h.abs()).max(1.0), 200)?;
        if root <= lambda_max + top_slack(lambda_max) {
            found.push(root);
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(found)
}

/// `w_n = 1 / ∫ |phi(λ_n, x)|² dx` over `(a, b)`.
pub fn atom_weights(sol: &EntireSolution, eigenvalues: &[f64]) -> Result<Vec<f64>> {
    eigenvalues.iter().map(|&lam| Ok(1.0 / norm_sq(sol, lam)?)).collect()
}

fn norm_sq(sol: &EntireSolution, lambda: f64) -> Result<f64> {
    let prof = sol.profile(Complex64::new(lambda, 0.0))?;
    let mut breaks = prof.mesh();
    if let Some(xm) = sol.x_match() {
        let mut x = xm;
        while x > 1e-6 * xm {
            breaks.push(x);
            x *= 0.25;
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
    }
    let q = integrate(
        |x| Ok(Complex64::new(prof.eval(x)?.u.norm_sqr(), 0.0)),
        &breaks,
        QuadOptions { rel: 1e-13, abs: 0.0, max_intervals: 50_000 },
    )?;
    Ok(q.value.re)
}

/// Eigenvalues and weights below `lambda_max` combined into a measure.
pub fn spectral_measure(sol: &EntireSolution, right_angle: f64, lambda_max: f64) -> Result<SpectralMeasure> {
    let lams = eigenvalues(sol, right_angle, lambda_max)?;
    let ws = atom_weights(sol, &lams)?;
    let atoms = lams.into_iter().zip(ws).map(|(lambda, weight)| Atom { lambda, weight }).collect();
    SpectralMeasure::new(atoms, lambda_max, sol.normalization())
}

/// Weights `w_n ↦ e^{-2 g(λ_n)} w_n`.
pub fn rescale_measure(measure: &SpectralMeasure, g: &RescalingFunction) -> Result<SpectralMeasure> {
    let mut atoms = Vec::with_capacity(measure.len());
    for a in measure.atoms() {
        let e = -2.0 * g.eval_real(a.lambda);
        if !(-700.0..=700.0).contains(&e) {
            return Err(Error::Overflow { z: Complex64::new(a.lambda, 0.0) });
        }
        atoms.push(Atom { lambda: a.lambda, weight: a.weight * e.exp() });
    }
    let gauge = if g.is_zero() {
        String::from(measure.gauge())
    } else {
        format!("{}+gauge(deg {})", measure.gauge(), g.degree())
    };
    SpectralMeasure::new(atoms, measure.lambda_max, gauge)
}

/// Samples of a function on `(a, c]` with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub c: f64,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, weights: Vec<f64>, c: f64) -> Result<Self> {
        if grid.len() != values.len() || grid.len() != weights.len() {
            return Err(invalid("grid, values and weights must have equal length"));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("grid must be strictly increasing"));
        }
        if grid.last().is_some_and(|&x| x > c) {
            return Err(invalid("grid must lie in (a, c]"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) || weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("grid function samples must be finite"));
        }
        Ok(GridFunction { grid, values, weights, c })
    }

    /// Samples on a given grid with trapezoidal weights.
    pub fn from_samples(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        let mut weights = alloc::vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let h = 0.5 * (grid[i + 1] - grid[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        let c = grid.last().copied().unwrap_or(0.0);
        GridFunction::new(grid, values, weights, c)
    }

    /// `f` sampled on a composite Gauss rule over `[lo, hi]`.
    pub fn gauss<F: FnMut(f64) -> Complex64>(lo: f64, hi: f64, panels: usize, order: usize, mut f: F) -> Result<Self> {
        let (grid, weights) = crate::quadrature::composite_gauss(lo, hi, panels, order);
        let values = grid.iter().map(|&x| f(x)).collect();
        GridFunction::new(grid, values, weights, hi)
    }

    pub fn zero_like(&self) -> Self {
        GridFunction { values: alloc::vec![Complex64::new(0.0, 0.0); self.grid.len()], ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v.norm_sqr() * w).sum()
    }

    /// `∫ f g*` for two functions on the same grid.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(invalid("inner product needs a common grid"));
        }
        Ok(self.values.iter().zip(&other.values).zip(&self.weights).map(|((f, g), w)| f * g.conj() * w).sum())
    }

    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.grid.len() != other.grid.len() {
            return Err(invalid("sup distance needs a common grid"));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// `f̂(z) = ∫ phi(z, x) f(x) dx` on the grid of `f`.
pub fn transform_at(sol: &EntireSolution, f: &GridFunction, z: Complex64) -> Result<Complex64> {
    let (m, s) = transform_at_scaled(sol, f, z)?;
    if s > 700.0 {
        return Err(Error::Overflow { z });
    }
    Ok(m * s.exp())
}

/// `f̂(z)` as `(m, s)` with `f̂(z) = m e^s`.
pub fn transform_at_scaled(sol: &EntireSolution, f: &GridFunction, z: Complex64) -> Result<(Complex64, f64)> {
    let zero = Complex64::new(0.0, 0.0);
    let Some(&x_max) = f.grid.last() else {
        return Ok((zero, 0.0));
    };
    if f.values.iter().all(|v| *v == zero) {
        return Ok((zero, 0.0));
    }
    let prof = sol.profile_to(z, x_max)?;
    let states = f.grid.iter().map(|&x| prof.eval_scaled(x)).collect::<Result<Vec<_>>>()?;
    let top = states.iter().map(|s| s.log_scale).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = zero;
    for ((st, v), &w) in states.iter().zip(&f.values).zip(&f.weights) {
        acc += st.u * v * (w * (st.log_scale - top).exp());
    }
    Ok((acc, top))
}

/// `f̂` at the given points together with a barycentric interpolant through them.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedFunction {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
    bary: Vec<Complex64>,
}

impl TransformedFunction {
    pub fn new(points: Vec<Complex64>, values: Vec<Complex64>) -> Self {
        let bary = points
            .iter()
            .enumerate()
            .map(|(j, &pj)| {
                let prod: Complex64 = points
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &pk)| pj - pk)
                    .product();
                if prod == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { prod.inv() }
            })
            .collect::<Vec<_>>();
        let scale = bary.iter().map(|b| b.norm()).fold(0.0, f64::max);
        let bary = if scale > 0.0 && scale.is_finite() { bary.into_iter().map(|b| b / scale).collect() } else { bary };
        TransformedFunction { points, values, bary }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// The transform values at the points; these are the contract.
    pub fn atom_values(&self) -> &[Complex64] {
        &self.values
    }

    /// Interpolated value, exact at the points.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((p, v), w) in self.points.iter().zip(&self.values).zip(&self.bary) {
            let d = z - p;
            if d == Complex64::new(0.0, 0.0) {
                return *v;
            }
            let t = w / d;
            num += t * v;
            den += t;
        }
        if den == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { num / den }
    }
}

/// The transform of `f` at every point of `z_set`.
pub fn transform(sol: &EntireSolution, f: &GridFunction, z_set: &[Complex64]) -> Result<TransformedFunction> {
    let values = z_set.iter().map(|&z| transform_at(sol, f, z)).collect::<Result<Vec<_>>>()?;
    Ok(TransformedFunction::new(z_set.to_vec(), values))
}

pub fn transform_on_atoms(sol: &EntireSolution, f: &GridFunction, measure: &SpectralMeasure) -> Result<Vec<Complex64>> {
    measure.atoms().iter().map(|a| transform_at(sol, f, Complex64::new(a.lambda, 0.0))).collect()
}

/// Outcome of a Parseval comparison `Σ |f̂(λ_n)|² w_n` against `∫ |f|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalReport {
    pub relative_error: f64,
    pub atom_sum: f64,
    pub norm_sq: f64,
    /// Mass in the top quarter of atoms relative to the quarter below it.
    pub tail_ratio: f64,
    pub tail_decaying: bool,
}

pub fn parseval_check(measure: &SpectralMeasure, sol: &EntireSolution, f: &GridFunction) -> Result<ParsevalReport> {
    let fhat = transform_on_atoms(sol, f, measure)?;
    let terms: Vec<f64> = fhat.iter().zip(measure.atoms()).map(|(v, a)| v.norm_sqr() * a.weight).collect();
    let atom_sum: f64 = terms.iter().sum();
    let norm_sq = f.norm_sq();
    let n = terms.len();
    let q = (n / 4).max(1);
    let (tail_ratio, tail_decaying) = if n >= 2 * q && n >= 2 {
        let top: f64 = terms[n - q..].iter().sum();
        let below: f64 = terms[n - 2 * q..n - q].iter().sum();
        let negligible = top <= 1e-14 * atom_sum.max(norm_sq);
        let r = if below > 0.0 { top / below } else if top > 0.0 { f64::INFINITY } else { 0.0 };
        (r, negligible || r < 1.0)
    } else {
        (f64::NAN, false)
    };
    let relative_error = if norm_sq > 0.0 {
        (atom_sum - norm_sq).abs() / norm_sq
    } else {
        atom_sum
    };
    Ok(ParsevalReport { relative_error, atom_sum, norm_sq, tail_ratio, tail_decaying })
}

/// `f(x) = Σ f̂(λ_n) phi(λ_n, x) w_n` on `grid`, with trapezoidal weights.
pub fn inverse_transform(
    measure: &SpectralMeasure,
    sol: &EntireSolution,
    fhat_atoms: &[Complex64],
    grid: &[f64],
) -> Result<GridFunction> {
    if fhat_atoms.len() != measure.len() {
        return Err(invalid("one transform value per atom is required"));
    }
    let mut values = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
    let Some(&x_max) = grid.last() else {
        return GridFunction::from_samples(Vec::new(), Vec::new());
    };
    for (a, &fh) in measure.atoms().iter().zip(fhat_atoms) {
        if fh == Complex64::new(0.0, 0.0) {
            continue;
        }
        let prof = sol.profile_to(Complex64::new(a.lambda, 0.0), x_max)?;
        for (v, &x) in values.iter_mut().zip(grid) {
            *v += prof.eval(x)?.u * fh * a.weight;
        }
    }
    GridFunction::from_samples(grid.to_vec(), values)
}
