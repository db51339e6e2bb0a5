//! Complex 2x2 matrices for the first-order form of the Schrödinger equation.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    /// Coefficient matrix of `(u, u')' = [[0, 1], [w, 0]] (u, u')` with
    /// `w = V(x) - z`.
    pub fn companion(w: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(zero, Complex64::new(1.0, 0.0), w, zero)
    }

    pub fn scale(self, s: Complex64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_re(self, s: f64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn commutator(self, other: Mat2) -> Mat2 {
        self * other - other * self
    }

    pub fn apply(&self, u: Complex64, du: Complex64) -> (Complex64, Complex64) {
        (self.a * u + self.b * du, self.c * u + self.d * du)
    }

    /// Exponential of a traceless matrix. For such a matrix `M^2 = -det(M) I`,
    /// so `exp(M) = cosh(s) I + sinh(s)/s M` with `s^2 = -det(M)`.
    pub fn exp_traceless(self) -> Mat2 {
        let shift = (self.a + self.d) * 0.5;
        let m = Mat2::new(self.a - shift, self.b, self.c, self.d - shift);
        let s2 = -m.det();
        let (ch, shc) = cosh_sinhc(s2);
        let e = Mat2::new(ch + shc * m.a, shc * m.b, shc * m.c, ch + shc * m.d);
        if shift == Complex64::new(0.0, 0.0) {
            e
        } else {
            e.scale(shift.exp())
        }
    }
}

/// `(cosh(s), sinh(s)/s)` as functions of `s^2`; both are even in `s`.
fn cosh_sinhc(s2: Complex64) -> (Complex64, Complex64) {
    if s2.norm() < 1e-4 {
        let ch = 1.0 + s2 * (0.5 + s2 * (1.0 / 24.0 + s2 * (1.0 / 720.0)));
        let shc = 1.0 + s2 * (1.0 / 6.0 + s2 * (1.0 / 120.0 + s2 * (1.0 / 5040.0)));
        (ch, shc)
    } else {
        let s = s2.sqrt();
        (s.cosh(), s.sinh() / s)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}
