//! Element types shared by the float and exact backends.
//!
//! Shares and worker products live in a [`Scalar`] ring (`f64`, `Complex64`,
//! `BigInt`, `BigRational`); interpolation needs a [`Field`]. The exact
//! backend encodes with integer shares and interpolates over rationals, so
//! every value it touches is error-free.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic backend selected for a job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    FloatReal,
    FloatComplex,
    ExactRational,
}

impl ScalarKind {
    pub fn is_exact(self) -> bool {
        matches!(self, ScalarKind::ExactRational)
    }
}

pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        self.add_assign_ref(&a.mul_ref(b));
    }

    /// Integer power. `None` when `exp < 0` and the type has no inverses
    /// (or the base is zero).
    fn powi(&self, exp: i32) -> Option<Self>;
}

pub trait Field: Scalar {
    fn sub_ref(&self, other: &Self) -> Self;
    /// `None` on division by zero.
    fn div_ref(&self, other: &Self) -> Option<Self>;
    /// Pivot preference for elimination; only compared, never used as a value.
    fn pivot_weight(&self) -> f64;
}

fn pow_u<T: Scalar>(base: &T, mut exp: u32) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc.mul_ref(&b);
        }
        exp >>= 1;
        if exp > 0 {
            b = b.mul_ref(&b);
        }
    }
    acc
}

fn field_powi<T: Field>(base: &T, exp: i32) -> Option<T> {
    let pos = pow_u(base, exp.unsigned_abs());
    if exp >= 0 {
        Some(pos)
    } else {
        T::one().div_ref(&pos)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn powi(&self, exp: i32) -> Option<Self> {
        Some(f64::powi(*self, exp))
    }
}

impl Field for f64 {
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn div_ref(&self, other: &Self) -> Option<Self> {
        (*other != 0.0).then(|| self / other)
    }
    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn powi(&self, exp: i32) -> Option<Self> {
        field_powi(self, exp)
    }
}

impl Field for Complex64 {
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn div_ref(&self, other: &Self) -> Option<Self> {
        (!Scalar::is_zero(other)).then(|| self / other)
    }
    fn pivot_weight(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        if !Zero::is_zero(a) && !Zero::is_zero(b) {
            *self += a * b;
        }
    }
    fn powi(&self, exp: i32) -> Option<Self> {
        (exp >= 0).then(|| pow_u(self, exp as u32))
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        if !Zero::is_zero(a) && !Zero::is_zero(b) {
            *self += a * b;
        }
    }
    fn powi(&self, exp: i32) -> Option<Self> {
        field_powi(self, exp)
    }
}

impl Field for BigRational {
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn div_ref(&self, other: &Self) -> Option<Self> {
        (!Zero::is_zero(other)).then(|| self / other)
    }
    fn pivot_weight(&self) -> f64 {
        // Any nonzero pivot is exact; prefer small denominators loosely.
        if Zero::is_zero(self) {
            0.0
        } else {
            1.0 / (1.0 + self.denom().bits() as f64)
        }
    }
}

/// Lossy view of a rational, used for diagnostics only.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Conversion from the share ring into the interpolation field.
pub trait Lift<F> {
    fn lift(&self) -> F;
}

impl Lift<f64> for f64 {
    fn lift(&self) -> f64 {
        *self
    }
}

impl Lift<Complex64> for Complex64 {
    fn lift(&self) -> Complex64 {
        *self
    }
}

impl Lift<BigRational> for BigInt {
    fn lift(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
}

impl Lift<BigRational> for BigRational {
    fn lift(&self) -> BigRational {
        self.clone()
    }
}
