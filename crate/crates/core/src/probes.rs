//! Seeded smooth test functions with compact support.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::spectral::GridFunction;

/// Parameters of one bump `(t(1-t))^6 (1 + 0.5 cos(ω x + φ))` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let t = (x - self.lo) / (self.hi - self.lo);
        (t * (1.0 - t)).powi(6) * (1.0 + 0.5 * (self.omega * x + self.phase).cos())
    }

    /// The bump sampled on a composite Gauss rule over its support.
    pub fn grid_function(&self, panels: usize, order: usize) -> Result<GridFunction> {
        GridFunction::gauss(self.lo, self.hi, panels, order, |x| Complex64::new(self.eval(x), 0.0))
    }
}

/// A bump with support of width at least `0.4 (hi - lo)` inside `(lo, hi)`.
pub fn random_bump<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Result<Bump> {
    if !(lo < hi) {
        return Err(invalid("probe support needs lo < hi"));
    }
    let len = hi - lo;
    let width = len * rng.gen_range(0.4..1.0);
    let start = lo + rng.gen_range(0.0..=1.0) * (len - width);
    Ok(Bump {
        lo: start,
        hi: (start + width).min(hi),
        omega: rng.gen_range(0.0..3.0),
        phase: rng.gen_range(0.0..core::f64::consts::TAU),
    })
}

/// `count` seeded bumps on `(lo, hi)`, each on a 48-panel, 8-point Gauss grid.
pub fn smooth_probes<R: Rng + ?Sized>(rng: &mut R, count: usize, lo: f64, hi: f64) -> Result<Vec<GridFunction>> {
    (0..count).map(|_| random_bump(rng, lo, hi)?.grid_function(48, 8)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn probes_are_supported_and_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let a = smooth_probes(&mut r1, 5, 0.0, 2.0).unwrap();
        let b = smooth_probes(&mut r2, 5, 0.0, 2.0).unwrap();
        assert_eq!(a, b);
        for f in &a {
            assert!(f.grid[0] > 0.0 && f.c <= 2.0);
            assert!(f.c - f.grid[0] >= 0.8 - 1e-2);
            assert!(f.norm_sq() > 0.0);
        }
    }

    #[test]
    fn bump_vanishes_outside() {
        let b = Bump { lo: 1.0, hi: 2.0, omega: 1.0, phase: 0.0 };
        assert_eq!(b.eval(0.5), 0.0);
        assert_eq!(b.eval(2.0), 0.0);
        assert!(b.eval(1.5) > 0.0);
    }
}
