//! Truncated power series in the perturbation parameter ε.
//!
//! The reduced vector fields are obtained by running the exact change of
//! variables on `Series` values and reading off the ε¹ and ε² coefficients.
//! Coefficients are generic over [`Scalar`], so the same pipeline runs on
//! plain `f64` or on [`Dual2`] to carry exact first derivatives in two
//! phase variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Add<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Forward-mode dual number with two infinitesimal directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d: [f64; 2],
}

impl Dual2 {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 2] }
    }

    pub fn variable(v: f64, slot: usize) -> Self {
        let mut d = [0.0; 2];
        d[slot] = 1.0;
        Self { v, d }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Self {
            v: q,
            d: [(self.d[0] - q * o.d[0]) * inv, (self.d[1] - q * o.d[1]) * inv],
        }
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: [-self.d[0], -self.d[1]] }
    }
}

impl Mul<f64> for Dual2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self { v: self.v * k, d: [self.d[0] * k, self.d[1] * k] }
    }
}

impl Add<f64> for Dual2 {
    type Output = Self;
    fn add(self, k: f64) -> Self {
        Self { v: self.v + k, ..self }
    }
}

impl Scalar for Dual2 {
    fn from_f64(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let k = 0.5 / s;
        Self { v: s, d: [self.d[0] * k, self.d[1] * k] }
    }
}

/// Number of stored coefficients (ε⁰ … ε³).
pub const ORDER: usize = 4;

/// `Σ c[k] εᵏ` truncated after ε³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series<T> {
    pub c: [T; ORDER],
}

impl<T: Scalar> Series<T> {
    pub fn constant(v: T) -> Self {
        let mut c = [T::from_f64(0.0); ORDER];
        c[0] = v;
        Self { c }
    }

    pub fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }

    /// Series from leading f64 coefficients; the rest are zero.
    pub fn poly(coeffs: &[f64]) -> Self {
        let mut c = [T::from_f64(0.0); ORDER];
        for (slot, v) in c.iter_mut().zip(coeffs) {
            *slot = T::from_f64(*v);
        }
        Self { c }
    }

    pub fn coeff(&self, k: usize) -> T {
        self.c[k]
    }

    /// Divide by ε, discarding the ε⁰ coefficient (which must vanish).
    /// The top coefficient of the result is unknown and set to zero.
    pub fn shift_down(&self) -> Self {
        let mut c = [T::from_f64(0.0); ORDER];
        c[..ORDER - 1].copy_from_slice(&self.c[1..]);
        Self { c }
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v = *v * k;
        }
        Self { c }
    }

    pub fn mul_scalar(&self, k: T) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v = *v * k;
        }
        Self { c }
    }

    pub fn recip(&self) -> Self {
        let inv0 = T::from_f64(1.0) / self.c[0];
        let mut r = [T::from_f64(0.0); ORDER];
        r[0] = inv0;
        for n in 1..ORDER {
            let mut acc = T::from_f64(0.0);
            for k in 1..=n {
                acc = acc + self.c[k] * r[n - k];
            }
            r[n] = -(acc * inv0);
        }
        Self { c: r }
    }

    pub fn sqrt(&self) -> Self {
        let s0 = self.c[0].sqrt();
        let two_s0 = s0 * 2.0;
        let mut s = [T::from_f64(0.0); ORDER];
        s[0] = s0;
        for n in 1..ORDER {
            let mut acc = self.c[n];
            for k in 1..n {
                acc = acc - s[k] * s[n - k];
            }
            s[n] = acc / two_s0;
        }
        Self { c: s }
    }

    /// Sum the truncated series at a concrete ε.
    pub fn eval(&self, eps: f64) -> T {
        let mut acc = T::from_f64(0.0);
        for k in (0..ORDER).rev() {
            acc = acc * eps + self.c[k];
        }
        acc
    }
}

impl<T: Scalar> Add for Series<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a = *a + b;
        }
        Self { c }
    }
}

impl<T: Scalar> Sub for Series<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a = *a - b;
        }
        Self { c }
    }
}

impl<T: Scalar> Neg for Series<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<T: Scalar> Mul for Series<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [T::from_f64(0.0); ORDER];
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                c[i + j] = c[i + j] + self.c[i] * o.c[j];
            }
        }
        Self { c }
    }
}

impl<T: Scalar> Div for Series<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Scalar> Mul<f64> for Series<T> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

impl<T: Scalar> Add<f64> for Series<T> {
    type Output = Self;
    fn add(self, k: f64) -> Self {
        let mut c = self.c;
        c[0] = c[0] + k;
        Self { c }
    }
}
