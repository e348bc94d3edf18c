//! Dense 2x2 complex matrices.
//!
//! Everything downstream (transfer matrices, evolution operators, effective
//! Hamiltonians) is 2x2 over `Complex64`, so a tiny concrete type beats a
//! general linear-algebra dependency. Inverses are taken through the
//! adjugate, which is exact for the unimodular matrices that dominate here.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// 2x2 complex matrix in row-major order:
/// `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl Mat2 {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2::new(d1, ZERO, ZERO, d2)
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> C64 {
        self.m11 + self.m22
    }

    /// Inverse via the adjugate. Intended for (near-)unimodular matrices;
    /// returns `None` when the determinant underflows to zero.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        Some(Mat2::new(
            self.m22 / det,
            -self.m12 / det,
            -self.m21 / det,
            self.m11 / det,
        ))
    }

    /// Inverse of a matrix known to have determinant 1 (adjugate only).
    pub fn inverse_unimodular(&self) -> Self {
        Mat2::new(self.m22, -self.m12, -self.m21, self.m11)
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn conj_transpose(&self) -> Self {
        Mat2::new(
            self.m11.conj(),
            self.m21.conj(),
            self.m12.conj(),
            self.m22.conj(),
        )
    }

    /// Max-modulus norm over entries; cheap and good enough for step control
    /// and diagnostics.
    pub fn norm_max(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    /// Entry-wise maximum modulus of the difference.
    pub fn dist_max(&self, other: &Mat2) -> f64 {
        (*self - *other).norm_max()
    }

    /// `exp(c * sigma3) = diag(e^c, e^{-c})` for complex `c`.
    ///
    /// Covers every dressing used by the convention conversions:
    /// `c = i theta` gives the plane-wave phases, real `c` the
    /// intensity-normalizing factors.
    pub fn exp_sigma3(c: C64) -> Self {
        Mat2::diag(c.exp(), (-c).exp())
    }

    /// `e^{c sigma3} M e^{-c sigma3}` (conjugation by the diagonal dressing).
    pub fn dress_sigma3(&self, c: C64) -> Self {
        let e = c.exp();
        let einv = (-c).exp();
        Mat2::new(
            self.m11,
            self.m12 * e * e,
            self.m21 * einv * einv,
            self.m22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 + rhs.m11,
            self.m12 + rhs.m12,
            self.m21 + rhs.m21,
            self.m22 + rhs.m22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 - rhs.m11,
            self.m12 - rhs.m12,
            self.m21 - rhs.m21,
            self.m22 - rhs.m22,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

/// Pauli sigma1.
pub fn sigma1() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

/// Pauli sigma2.
pub fn sigma2() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

/// Pauli sigma3.
pub fn sigma3() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// The nilpotent generator `K = i sigma2 + sigma3 = [[1, 1], [-1, -1]]`.
///
/// `K^2 = 0` and `K sigma1 = -sigma1 K = K`; these exact identities are what
/// collapse the interaction-picture algebra to closed form.
pub fn kmat() -> Mat2 {
    Mat2::new(ONE, ONE, -ONE, -ONE)
}
