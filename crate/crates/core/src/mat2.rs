//! Row-major 2×2 complex matrices.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2C {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl Mat2C {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2C { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Self::scalar(C64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Self::scalar(C64::new(0.0, 0.0))
    }

    pub fn scalar(s: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2C::new(s, z, z, s)
    }

    pub fn sigma1() -> Self {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        Mat2C::new(z, o, o, z)
    }

    pub fn sigma2() -> Self {
        let z = c(0.0, 0.0);
        Mat2C::new(z, c(0.0, -1.0), c(0.0, 1.0), z)
    }

    pub fn sigma3() -> Self {
        let z = c(0.0, 0.0);
        Mat2C::new(c(1.0, 0.0), z, z, c(-1.0, 0.0))
    }

    /// `v·σ` for a real 3-vector.
    pub fn pauli_dot(v: [f64; 3]) -> Self {
        Mat2C::new(
            c(v[2], 0.0),
            c(v[0], -v[1]),
            c(v[0], v[1]),
            c(-v[2], 0.0),
        )
    }

    /// `(1 ± v·σ)/2`.
    pub fn projector(v: [f64; 3], sign: f64) -> Self {
        (Mat2C::identity() + Mat2C::pauli_dot(v).scale(c(sign, 0.0))).scale(c(0.5, 0.0))
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn adjoint(&self) -> Self {
        Mat2C::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Mat2C) -> f64 {
        (*self - *other).max_abs()
    }

    /// `M^n` by binary exponentiation, `n ≥ 0`.
    pub fn powu(&self, mut n: u64) -> Self {
        let mut base = *self;
        let mut acc = Mat2C::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Column `j` as a 2-vector.
    pub fn column(&self, j: usize) -> [C64; 2] {
        match j {
            0 => [self.a11, self.a21],
            _ => [self.a12, self.a22],
        }
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (s1, s2, s3) = (Mat2C::sigma1(), Mat2C::sigma2(), Mat2C::sigma3());
        assert_eq!(s1 * s1, Mat2C::identity());
        assert_eq!(s1 * s2, s3.scale(c(0.0, 1.0)));
        let v = [0.6, 0.0, 0.8];
        let m = Mat2C::pauli_dot(v);
        assert!((m * m).dist(&Mat2C::identity()) < 1e-15);
        let p = Mat2C::projector(v, 1.0);
        let q = Mat2C::projector(v, -1.0);
        assert!((p * p).dist(&p) < 1e-15);
        assert!((p * q).max_abs() < 1e-15);
        assert!((p + q).dist(&Mat2C::identity()) < 1e-15);
    }

    #[test]
    fn det_adjoint_power() {
        let m = Mat2C::new(c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0), c(3.0, 0.0));
        assert_eq!(m.det(), c(3.0, 6.0) - c(0.0, -0.5));
        assert_eq!(m.adjoint().adjoint(), m);
        assert!(m.powu(5).dist(&(m * m * m * m * m)) < 1e-12);
        assert_eq!(m.powu(0), Mat2C::identity());
    }
}
