//! 2x2 complex matrices in closed form.
//!
//! Everything downstream multiplies determinant-one transfer matrices, so this
//! module avoids iterative linear algebra entirely: inverses go through the
//! adjugate, the spectral norm comes from the trace/determinant formula for
//! the 2x2 Hermitian matrix `A* A`, and the `1->1` / `inf->inf` norms are the
//! column and row sums used in the growth estimates.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Determinants below this threshold are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2C {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl Mat2C {
    pub fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    /// Matrix from real entries, mostly for tests.
    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Complex64 {
        self.a11 + self.a22
    }

    /// The adjugate `[[a22, -a12], [-a21, a11]]`; equals the inverse whenever
    /// `det = 1`, with no division performed.
    pub fn adjugate(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    /// Inverse with a singularity guard. A matrix whose determinant is exactly
    /// `1.0` gets the plain adjugate, so determinant-one structure survives
    /// bit for bit; anything else divides the adjugate by the determinant.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let det_abs = det.norm();
        if det_abs <= SINGULAR_TOL {
            return Err(CoreError::SingularMatrix { det_abs });
        }
        let adj = self.adjugate();
        if det == Complex64::new(1.0, 0.0) {
            Ok(adj)
        } else {
            Ok(Self::new(adj.a11 / det, adj.a12 / det, adj.a21 / det, adj.a22 / det))
        }
    }

    /// Spectral norm (largest singular value) from the closed-form
    /// eigenvalues of `A* A`. With `t = tr(A* A)` the singular values satisfy
    /// `s_max + s_min = sqrt(t + 2|det|)` and `s_max - s_min =
    /// sqrt(t - 2|det|)`; after rotating the matrix by half the phase of its
    /// determinant both radicands become exact sums of squares, so no
    /// cancellation occurs even for near-unitary input. Entries are scaled by
    /// the largest modulus first so intermediate squares cannot overflow.
    pub fn norm2(&self) -> f64 {
        let s = self
            .entries()
            .iter()
            .map(|e| e.norm())
            .fold(0.0f64, f64::max);
        if s == 0.0 || !s.is_finite() {
            return s;
        }
        let inv = 1.0 / s;
        let det = (self.a11 * inv) * (self.a22 * inv) - (self.a12 * inv) * (self.a21 * inv);
        let phase = Complex64::from_polar(1.0, -det.arg() / 2.0);
        let b11 = self.a11 * inv * phase;
        let b12 = self.a12 * inv * phase;
        let b21 = self.a21 * inv * phase;
        let b22 = self.a22 * inv * phase;
        // t + 2|det| and t - 2|det| as sums of squares of the rotated entries
        let sum = ((b11 + b22.conj()).norm_sqr() + (b12 - b21.conj()).norm_sqr()).sqrt();
        let diff = ((b11 - b22.conj()).norm_sqr() + (b12 + b21.conj()).norm_sqr()).sqrt();
        s * (sum + diff) / 2.0
    }

    /// `(max column absolute sum, max row absolute sum)`, i.e. the operator
    /// norms on `l1` and `l_inf`.
    pub fn norm_one_inf(&self) -> (f64, f64) {
        let (n11, n12, n21, n22) = (
            self.a11.norm(),
            self.a12.norm(),
            self.a21.norm(),
            self.a22.norm(),
        );
        ((n11 + n21).max(n12 + n22), (n11 + n12).max(n21 + n22))
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.a11 * v.0 + self.a12 * v.1,
            self.a21 * v.0 + self.a22 * v.1,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Largest entrywise distance to `other`.
    pub fn max_entry_dist(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;

    fn mul(self, rhs: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;

    fn add(self, rhs: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;

    fn sub(self, rhs: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }
}
