//! Complex 2-vector and 2×2 matrix arithmetic.
//!
//! Everything in the crate is a two-level problem, so the types here are
//! plain `Copy` values with closed-form operations instead of a general
//! dense linear algebra backend.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Shorthand for the complex scalar type used throughout the crate.
pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A complex amplitude pair `(a0, a1)` in the `{|↓⟩, |↑⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVec2 {
    pub a0: C64,
    pub a1: C64,
}

impl CVec2 {
    pub const fn new(a0: C64, a1: C64) -> Self {
        Self { a0, a1 }
    }

    pub fn from_real(a0: f64, a1: f64) -> Self {
        Self::new(c(a0, 0.0), c(a1, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    /// Hermitian norm, computed with `hypot` so tiny amplitudes do not underflow.
    pub fn norm(&self) -> f64 {
        self.a0.norm().hypot(self.a1.norm())
    }

    /// Returns the unit vector along `self`. Inputs with norm ≤ 1e−300 are
    /// returned unchanged.
    pub fn normalize(&self) -> Self {
        let n = self.norm();
        if n > 1e-300 {
            self.scale(1.0 / n)
        } else {
            *self
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a0 * s, self.a1 * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self::new(self.a0 * s, self.a1 * s)
    }

    /// Hermitian inner product `⟨self|other⟩` (conjugate-linear in `self`).
    pub fn inner(&self, other: &CVec2) -> C64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// Bilinear (non-conjugating) product `selfᵀ·other`.
    pub fn dot(&self, other: &CVec2) -> C64 {
        self.a0 * other.a0 + self.a1 * other.a1
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a0.conj(), self.a1.conj())
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.a1.is_finite()
    }

    /// `|⟨û|v̂⟩|` for the normalized versions of both vectors.
    pub fn overlap(&self, other: &CVec2) -> f64 {
        let d = self.norm() * other.norm();
        if d == 0.0 {
            return 0.0;
        }
        (self.inner(other).norm() / d).min(1.0)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a0.re, self.a0.im, self.a1.re, self.a1.im]
    }

    pub fn from_array(a: &[f64; 4]) -> Self {
        Self::new(c(a[0], a[1]), c(a[2], a[3]))
    }
}

impl Add for CVec2 {
    type Output = CVec2;
    fn add(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.a0 + rhs.a0, self.a1 + rhs.a1)
    }
}

impl Sub for CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.a0 - rhs.a0, self.a1 - rhs.a1)
    }
}

impl Neg for CVec2 {
    type Output = CVec2;
    fn neg(self) -> CVec2 {
        CVec2::new(-self.a0, -self.a1)
    }
}

/// Which Pauli matrix (or the identity) to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A complex 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CMat2 {
    pub m00: C64,
    pub m01: C64,
    pub m10: C64,
    pub m11: C64,
}

impl CMat2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Self { m00, m01, m10, m11 }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        Self::new(d0, ZERO, ZERO, d1)
    }

    pub fn from_columns(c0: CVec2, c1: CVec2) -> Self {
        Self::new(c0.a0, c1.a0, c0.a1, c1.a1)
    }

    pub fn column(&self, j: usize) -> CVec2 {
        match j {
            0 => CVec2::new(self.m00, self.m10),
            _ => CVec2::new(self.m01, self.m11),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m00 + self.m11
    }

    pub fn det(&self) -> C64 {
        self.m00 * self.m11 - self.m01 * self.m10
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m00, self.m10, self.m01, self.m11)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.m00.conj(), self.m01.conj(), self.m10.conj(), self.m11.conj())
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    /// Closed-form inverse; `None` when the determinant vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO {
            return None;
        }
        let inv = d.inv();
        Some(Self::new(self.m11 * inv, -self.m01 * inv, -self.m10 * inv, self.m00 * inv))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    pub fn apply(&self, v: &CVec2) -> CVec2 {
        CVec2::new(self.m00 * v.a0 + self.m01 * v.a1, self.m10 * v.a0 + self.m11 * v.a1)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.m00.norm_sqr() + self.m01.norm_sqr() + self.m10.norm_sqr() + self.m11.norm_sqr()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMat2) -> f64 {
        [
            (self.m00 - other.m00).norm(),
            (self.m01 - other.m01).norm(),
            (self.m10 - other.m10).norm(),
            (self.m11 - other.m11).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m00.is_finite() && self.m01.is_finite() && self.m10.is_finite() && self.m11.is_finite()
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, r: CMat2) -> CMat2 {
        CMat2::new(self.m00 + r.m00, self.m01 + r.m01, self.m10 + r.m10, self.m11 + r.m11)
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, r: CMat2) -> CMat2 {
        CMat2::new(self.m00 - r.m00, self.m01 - r.m01, self.m10 - r.m10, self.m11 - r.m11)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.scale(-ONE)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, r: CMat2) -> CMat2 {
        CMat2::new(
            self.m00 * r.m00 + self.m01 * r.m10,
            self.m00 * r.m01 + self.m01 * r.m11,
            self.m10 * r.m00 + self.m11 * r.m10,
            self.m10 * r.m01 + self.m11 * r.m11,
        )
    }
}

impl Mul<CVec2> for CMat2 {
    type Output = CVec2;
    fn mul(self, v: CVec2) -> CVec2 {
        self.apply(&v)
    }
}

impl Mul<C64> for CMat2 {
    type Output = CMat2;
    fn mul(self, s: C64) -> CMat2 {
        self.scale(s)
    }
}

impl Mul<f64> for CMat2 {
    type Output = CMat2;
    fn mul(self, s: f64) -> CMat2 {
        self.scale(c(s, 0.0))
    }
}

pub fn pauli(which: Pauli) -> CMat2 {
    match which {
        Pauli::I => CMat2::identity(),
        Pauli::X => CMat2::new(ZERO, ONE, ONE, ZERO),
        Pauli::Y => CMat2::new(ZERO, -I, I, ZERO),
        Pauli::Z => CMat2::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// Real rotation `R_y(φ) = exp(−iφσ_y/2)`.
pub fn rotation_y(phi: f64) -> CMat2 {
    let (s, co) = (phi / 2.0).sin_cos();
    CMat2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// `sin(z)/z` with a Taylor branch near zero.
pub fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Propagator `exp(−i·M·t)` for a constant generator `M`.
///
/// `M = μ·I + K` with `K` traceless, so `K² = −det(K)·I` and the exponential
/// collapses to `e^{−iμt}·[cos(ωt)·I − i·t·sinc(ωt)·K]` with `ω = √(−det K)`.
/// The formula is even in `ω`, so the square-root branch is irrelevant.
pub fn mat_exp(m: &CMat2, t: f64) -> CMat2 {
    let mu = m.trace() * 0.5;
    let k = *m - CMat2::identity().scale(mu);
    let omega = (-k.det()).sqrt();
    let wt = omega * t;
    let cos = wt.cos();
    let s = sinc(wt) * t;
    let phase = (-I * mu * t).exp();
    (CMat2::identity().scale(cos) - k.scale(I * s)).scale(phase)
}

/// Principal square root (`Re ≥ 0`, and `Im ≥ 0` on the imaginary axis).
pub fn sqrt_principal(z: C64) -> C64 {
    let r = z.sqrt();
    if r.re == 0.0 && r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Of `±candidate`, the one closer to `reference`.
#[inline]
pub fn nearest_sign(candidate: C64, reference: C64) -> C64 {
    if (candidate - reference).norm_sqr() <= (candidate + reference).norm_sqr() {
        candidate
    } else {
        -candidate
    }
}
