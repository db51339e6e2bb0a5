//! Gauss–Legendre rules, globally adaptive Gauss–Kronrod integration and
//! Legendre-series helpers used by the Frobenius start.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, t);
            let dt = p / (n as f64 * (t * p - pm1) / (t * t - 1.0));
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, t);
        let dp = n as f64 * (t * p - pm1) / (t * t - 1.0);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(t), P_{n-1}(t))` by the three-term recurrence.
fn legendre_pair(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = t;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `P_0(t), ..., P_{n}(t)`.
pub fn legendre_values(n: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n == 0 {
        return;
    }
    out[1] = t;
    for k in 2..=n {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Composite Gauss–Legendre rule on `[a, b]` split into `panels` equal
/// panels of `order` nodes each.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(lo + 0.5 * h * (ti + 1.0));
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

/// Gauss–Legendre nodes on Legendre-series panels: coefficient transform
/// and cumulative integration from the left edge at each node.
#[derive(Debug, Clone)]
pub struct LegendrePanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `cumulative[i][m]`: weight of node `m` in `∫_{-1}^{t_i}`.
    pub cumulative: Vec<Vec<f64>>,
    /// `to_coeffs[n][m]`: weight of node `m` in the `n`-th Legendre coefficient.
    pub to_coeffs: Vec<Vec<f64>>,
}

impl LegendrePanelRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let mut p = vec![0.0; n + 1];
        let mut to_coeffs = vec![vec![0.0; n]; n];
        for m in 0..n {
            legendre_values(n, nodes[m], &mut p);
            for k in 0..n {
                to_coeffs[k][m] = (2.0 * k as f64 + 1.0) * 0.5 * weights[m] * p[k];
            }
        }
        let mut cumulative = vec![vec![0.0; n]; n];
        let mut ip = vec![0.0; n];
        for i in 0..n {
            integrated_legendre(n, nodes[i], &mut p, &mut ip);
            for m in 0..n {
                cumulative[i][m] = (0..n).map(|k| to_coeffs[k][m] * ip[k]).sum();
            }
        }
        LegendrePanelRule { nodes, weights, cumulative, to_coeffs }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `∫_{-1}^{t} P_k(s) ds` for `k < n`; `scratch` must hold `n + 1` values.
pub fn integrated_legendre(n: usize, t: f64, scratch: &mut [f64], out: &mut [f64]) {
    legendre_values(n, t, scratch);
    out[0] = t + 1.0;
    for k in 1..n {
        out[k] = (scratch[k + 1] - scratch[k - 1]) / (2.0 * k as f64 + 1.0);
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel: 1e-12, abs: 1e-300, max_intervals: 20_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: Complex64,
    pub error: f64,
    /// Estimate of `∫|f|`, the scale the relative tolerance refers to.
    pub l1: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
    l1: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        k += (f1 + f2) * WGK[j];
        l1 += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    let value = k * h;
    let error = ((k - g) * h).norm();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::QuadratureNonConvergence { partial: value, error: f64::INFINITY });
    }
    Ok(Segment { lo, hi, value, error, l1: l1 * h.abs() })
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of a complex-valued
/// function over `[breaks[0], breaks[last]]`, starting from the panels given
/// by `breaks`. Converges when the summed error falls below
/// `max(abs, rel * ∫|f|)`.
pub fn integrate<F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<Quad>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if breaks.len() < 2 {
        return Ok(Quad { value: Complex64::new(0.0, 0.0), error: 0.0, l1: 0.0, intervals: 0 });
    }
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1])?);
        }
    }
    loop {
        let (value, error, l1) = heap.iter().fold(
            (Complex64::new(0.0, 0.0), 0.0, 0.0),
            |(v, e, l), s| (v + s.value, e + s.error, l + s.l1),
        );
        if error <= opts.abs.max(opts.rel * l1) {
            return Ok(Quad { value, error, l1, intervals: heap.len() });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence { partial: value, error });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => return Ok(Quad { value, error, l1, intervals: 0 }),
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::QuadratureNonConvergence { partial: value, error });
        }
        heap.push(kronrod(&mut f, worst.lo, mid)?);
        heap.push(kronrod(&mut f, mid, worst.hi)?);
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(integrate(|x| f(x).map(|v| Complex64::new(v, 0.0)), breaks, opts)?.value.re)
}

/// Breakpoints `lo, lo * 2, ..., hi` graded geometrically towards `lo > 0`
/// followed by nothing; used for integrands with power behaviour at zero.
pub fn dyadic_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = hi;
    while x > lo {
        v.push(x);
        x *= 0.5;
    }
    v.push(lo);
    v.reverse();
    v
}

/// `n + 1` equally spaced breakpoints on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}
