//! Scalar fields for density-matrix entries: real, complex, quaternion.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::Quaternion;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::StatesError;

/// Which field the matrix entries live in, with its Dyson index α.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
    Quaternion,
}

impl FieldKind {
    pub const ALL: [FieldKind; 3] = [FieldKind::Real, FieldKind::Complex, FieldKind::Quaternion];

    /// α as a fraction: 1/2, 1, 2.
    pub fn alpha(self) -> (i64, i64) {
        match self {
            FieldKind::Real => (1, 2),
            FieldKind::Complex => (1, 1),
            FieldKind::Quaternion => (2, 1),
        }
    }

    pub fn alpha_f64(self) -> f64 {
        let (n, d) = self.alpha();
        n as f64 / d as f64
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
            FieldKind::Quaternion => "quaternion",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldKind {
    type Err = StatesError;

    fn from_str(s: &str) -> Result<Self, StatesError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "rebit" => Ok(FieldKind::Real),
            "complex" | "qubit" => Ok(FieldKind::Complex),
            "quaternion" | "quaternionic" | "quaterbit" => Ok(FieldKind::Quaternion),
            other => Err(StatesError::InvalidArgument(format!(
                "unknown field {other:?}"
            ))),
        }
    }
}

/// Entry type of a self-adjoint matrix.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const KIND: FieldKind;

    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn scale(self, x: f64) -> Self;
    /// Uniform on the unit sphere of the field: ±1, `e^{iθ}`, or `S³`.
    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Independent standard normal in every real component.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// 2×2 complex representation `[[z1, z2], [-z2*, z1*]]`; real and
    /// complex scalars embed as `z2 = 0`.
    fn complex_pair(self) -> (Complex64, Complex64);
}

impl Scalar for f64 {
    const KIND: FieldKind = FieldKind::Real;

    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn complex_pair(self) -> (Complex64, Complex64) {
        (Complex64::new(self, 0.0), Complex64::new(0.0, 0.0))
    }
}

impl Scalar for Complex64 {
    const KIND: FieldKind = FieldKind::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        Complex64::from_polar(1.0, theta)
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    }
    fn complex_pair(self) -> (Complex64, Complex64) {
        (self, Complex64::new(0.0, 0.0))
    }
}

pub type Quat = Quaternion<f64>;

impl Scalar for Quat {
    const KIND: FieldKind = FieldKind::Quaternion;

    fn zero() -> Self {
        Quaternion::new(0.0, 0.0, 0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }
    fn conj(self) -> Self {
        self.conjugate()
    }
    fn re(self) -> f64 {
        self.w
    }
    fn norm_sqr(self) -> f64 {
        self.norm_squared()
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::gaussian(rng);
            let n = q.norm();
            if n > 1e-12 {
                return q / n;
            }
        }
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut c = || -> f64 { StandardNormal.sample(rng) };
        Quaternion::new(c(), c(), c(), c())
    }
    fn complex_pair(self) -> (Complex64, Complex64) {
        // q = z1 + z2 j with z1 = w + x i, z2 = y + z i
        (
            Complex64::new(self.w, self.i),
            Complex64::new(self.j, self.k),
        )
    }
}
