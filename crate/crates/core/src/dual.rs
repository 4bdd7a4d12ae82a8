//! Forward-mode automatic differentiation over complex numbers.
//!
//! [`Scalar`] abstracts over plain `Complex64` and [`Dual`] numbers, and
//! `Dual` is itself generic over any `Scalar`, so nesting
//! `Dual<Dual<Complex64>>` yields exact second derivatives (and one more
//! level yields third derivatives) from a single evaluation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: Complex64) -> Self;

    /// The innermost (undifferentiated) value.
    fn base(&self) -> Complex64;

    fn is_finite(&self) -> bool;

    fn exp(self) -> Self;

    fn ln(self) -> Self;

    fn powi(self, n: i32) -> Self;

    /// Principal-branch power with a constant exponent, `exp(e * Log(self))`.
    fn powc(self, e: Complex64) -> Self;

    fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    fn scale(self, c: Complex64) -> Self {
        self * Self::constant(c)
    }
}

impl Scalar for Complex64 {
    fn constant(c: Complex64) -> Self {
        c
    }

    fn base(&self) -> Complex64 {
        *self
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn exp(self) -> Self {
        Complex64::exp(self)
    }

    fn ln(self) -> Self {
        Complex64::ln(self)
    }

    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }

    fn powc(self, e: Complex64) -> Self {
        if self == Complex64::new(0.0, 0.0) {
            return if e.re > 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(f64::NAN, f64::NAN)
            };
        }
        principal_pow(self, e)
    }
}

/// `z^e` on the principal branch. Signed zeros in the imaginary part are
/// normalised so that the negative real axis always has argument `+pi`.
pub fn principal_pow(z: Complex64, e: Complex64) -> Complex64 {
    (e * principal_ln(z)).exp()
}

pub fn principal_ln(z: Complex64) -> Complex64 {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    Complex64::new(z.norm().ln(), im.atan2(z.re))
}

/// A dual number `value + derivative * d` with `d^2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dual<T> {
    pub value: T,
    pub derivative: T,
}

/// First-order jet of a complex function: its value and exact derivative.
pub type DualValue = Dual<Complex64>;

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, derivative: T) -> Self {
        Self { value, derivative }
    }

    /// The independent variable at `x`.
    pub fn variable(x: T) -> Self {
        Self::new(x, T::real(1.0))
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.derivative + o.derivative)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.derivative - o.derivative)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.value * o.value,
            self.derivative * o.value + self.value * o.derivative,
        )
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.value / o.value;
        Self::new(q, (self.derivative - q * o.derivative) / o.value)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.derivative)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(c: Complex64) -> Self {
        Self::new(T::constant(c), T::real(0.0))
    }

    fn base(&self) -> Complex64 {
        self.value.base()
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.derivative.is_finite()
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, e * self.derivative)
    }

    fn ln(self) -> Self {
        Self::new(self.value.ln(), self.derivative / self.value)
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::real(1.0);
        }
        let lower = self.value.powi(n - 1);
        Self::new(
            lower * self.value,
            lower.scale(Complex64::new(n as f64, 0.0)) * self.derivative,
        )
    }

    fn powc(self, e: Complex64) -> Self {
        let lower = self.value.powc(e - 1.0);
        Self::new(lower * self.value, lower.scale(e) * self.derivative)
    }
}

/// Value plus first and second derivatives of a function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

/// Value plus first three derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

pub type Dual2 = Dual<Dual<Complex64>>;
pub type Dual3 = Dual<Dual<Dual<Complex64>>>;

pub fn seed1(x: Complex64) -> DualValue {
    Dual::variable(x)
}

pub fn seed2(x: Complex64) -> Dual2 {
    Dual::variable(Dual::variable(x))
}

pub fn seed3(x: Complex64) -> Dual3 {
    Dual::variable(Dual::variable(Dual::variable(x)))
}

impl From<Dual2> for Jet2 {
    fn from(d: Dual2) -> Self {
        Jet2 {
            value: d.value.value,
            d1: d.value.derivative,
            d2: d.derivative.derivative,
        }
    }
}

impl From<Dual3> for Jet3 {
    fn from(d: Dual3) -> Self {
        Jet3 {
            value: d.value.value.value,
            d1: d.value.value.derivative,
            d2: d.value.derivative.derivative,
            d3: d.derivative.derivative.derivative,
        }
    }
}

/// Whether `e` is a (small) real integer, so that integer powering can be
/// used instead of a branch-cut power.
pub fn as_integer_exponent(e: Complex64) -> Option<i32> {
    if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() < 1.0e6 {
        Some(e.re as i32)
    } else {
        None
    }
}

/// `z^e`, via integer powering when `e` is an integer.
pub fn pow_const<S: Scalar>(z: S, e: Complex64) -> S {
    match as_integer_exponent(e) {
        Some(n) => z.powi(n),
        None => z.powc(e),
    }
}
