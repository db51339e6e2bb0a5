//! Bracketed scalar root finding.


use crate::error::{invalid, Result};

/// Brent's method on a bracket with `f(lo) * f(hi) <= 0`.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(invalid("brent: root is not bracketed"));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}

/// Bisection for a monotone predicate: returns the smallest `x` (to `xtol`)
/// in `[lo, hi]` with `pred(x)` true, assuming `pred(lo)` false and
/// `pred(hi)` true.
pub fn bisect_predicate<F>(mut pred: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_tan_x_equals_x_root() {
        let r = brent(|x| Ok(x.sin() - x * x.cos()), 4.0, 4.6, 1e-15, 100).unwrap();
        assert!((r - 4.493_409_457_909_064).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50).is_err());
    }

    #[test]
    fn bisect_threshold() {
        let x = bisect_predicate(|x| Ok(x >= 0.3), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-11);
    }
}
