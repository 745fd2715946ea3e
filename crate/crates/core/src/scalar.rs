//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the library is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier-compensated running sum. Summation order is the insertion order,
/// so results are reproducible bit for bit.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Compensated dot product `Σ a_i b_i`.
pub fn compensated_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Unevaluated sum `hi + lo` carrying roughly twice the working precision,
/// built from error-free transformations (`mul_add` must be fused, which
/// `f32`/`f64` guarantee).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleWord<T> {
    pub hi: T,
    pub lo: T,
}

fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn fast_two_sum<T: Scalar>(a: T, b: T) -> DoubleWord<T> {
    let s = a + b;
    DoubleWord {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl<T: Scalar> DoubleWord<T> {
    pub fn zero() -> Self {
        Self {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    pub fn from_value(x: T) -> Self {
        Self {
            hi: x,
            lo: T::zero(),
        }
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }

    pub fn mul_value(self, y: T) -> Self {
        let (p, e) = two_prod(self.hi, y);
        fast_two_sum(p, e + self.lo * y)
    }

    pub fn div_value(self, y: T) -> Self {
        self / Self::from_value(y)
    }

    /// `Σ a_i b_i` accumulated in double-word precision.
    pub fn dot(a: &[T], b: &[T]) -> Self {
        a.iter().zip(b).fold(Self::zero(), |acc, (&x, &y)| {
            let (p, e) = two_prod(x, y);
            acc + Self { hi: p, lo: e }
        })
    }
}

impl<T: Scalar> Add for DoubleWord<T> {
    type Output = Self;
    fn add(self, y: Self) -> Self {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let v = fast_two_sum(s, e + t);
        fast_two_sum(v.hi, v.lo + f)
    }
}

impl<T: Scalar> Neg for DoubleWord<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl<T: Scalar> Sub for DoubleWord<T> {
    type Output = Self;
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl<T: Scalar> Mul for DoubleWord<T> {
    type Output = Self;
    fn mul(self, y: Self) -> Self {
        let (p, e) = two_prod(self.hi, y.hi);
        fast_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi))
    }
}

impl<T: Scalar> Div for DoubleWord<T> {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        let q = self.hi / y.hi;
        let r = self - y.mul_value(q);
        fast_two_sum(q, r.hi / y.hi)
    }
}

pub(crate) fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1.0e16_f64, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn literal_conversion_rounds_for_f32() {
        assert_eq!(<f32 as Scalar>::lit(0.1), 0.1_f32);
        assert_eq!(<f64 as Scalar>::lit(0.1), 0.1_f64);
    }

    #[test]
    fn double_word_keeps_low_order_bits() {
        // (1 + 2⁻⁴⁰)² − 1 loses 2⁻⁸⁰ in plain f64
        let x = DoubleWord::from_value(1.0 + 2f64.powi(-40));
        let sq = x * x - DoubleWord::from_value(1.0);
        assert_eq!(sq.value(), 2f64.powi(-39) + 2f64.powi(-80));
        let naive = (1.0 + 2f64.powi(-40)).powi(2) - 1.0;
        assert_eq!(naive, 2f64.powi(-39));
        let third = DoubleWord::from_value(1.0).div_value(3.0);
        let back = third.mul_value(3.0) - DoubleWord::from_value(1.0);
        assert!(back.value().abs() < 1e-31);
        assert_eq!(
            DoubleWord::dot(&[1e16, 1.0, -1e16], &[1.0, 1.0, 1.0]).value(),
            1.0
        );
        let f = DoubleWord::<f32>::from_value(1.0).div_value(3.0);
        assert!((f.hi as f64 + f.lo as f64 - 1.0 / 3.0).abs() < 1e-13);
    }
}
