//! Error-free transformations and compensated accumulation.
//!
//! The binomial expansions in the closed forms alternate in sign and cancel
//! heavily at high SNR, so they are accumulated in double-word arithmetic
//! ([`TwoFold`]) built on `two_sum` / fused multiply-add.

use core::ops::{Add, Mul, Neg, Sub};

use crate::real::Real;

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` carrying roughly twice the working precision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoFold<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> TwoFold<T> {
    pub fn new(x: T) -> Self {
        TwoFold { hi: x, lo: T::zero() }
    }

    /// `1 + m` with `m` kept at full relative precision (e.g. `m = expm1(-x)`).
    pub fn one_plus(m: T) -> Self {
        let (hi, lo) = two_sum(T::one(), m);
        TwoFold { hi, lo }
    }

    pub fn zero() -> Self {
        Self::new(T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one())
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }

    /// `self / d` for a plain scalar divisor.
    pub fn div_scalar(self, d: T) -> Self {
        let q1 = self.hi / d;
        let (p, pe) = two_prod(q1, d);
        let r = ((self.hi - p) - pe) + self.lo;
        let q2 = r / d;
        let (hi, lo) = quick_two_sum(q1, q2);
        TwoFold { hi, lo }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl<T: Real> Add for TwoFold<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        TwoFold { hi, lo }
    }
}

impl<T: Real> Neg for TwoFold<T> {
    type Output = Self;
    fn neg(self) -> Self {
        TwoFold { hi: -self.hi, lo: -self.lo }
    }
}

impl<T: Real> Sub for TwoFold<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Mul for TwoFold<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        TwoFold { hi, lo }
    }
}

impl<T: Real> Mul<T> for TwoFold<T> {
    type Output = Self;
    fn mul(self, o: T) -> Self {
        let (p, e) = two_prod(self.hi, o);
        let e = e + self.lo * o;
        let (hi, lo) = quick_two_sum(p, e);
        TwoFold { hi, lo }
    }
}

/// Neumaier-compensated running sum of plain scalars.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Real> Extend<T> for CompensatedSum<T> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}
