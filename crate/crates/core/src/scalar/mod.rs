//! Scalar types used for integrals and distances.
//!
//! Everything numeric downstream of the state spaces is generic over
//! [`Scalar`]. `f64` is the working precision; [`Exact`] (arbitrary-precision
//! rationals) gives exact metric arithmetic, every `f64` input being lifted to
//! the dyadic rational it denotes.

mod superacc;

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use superacc::SuperAccumulator;

/// Exact rational scalar.
pub type Exact = BigRational;

/// Order-independent summation: adding and removing the same summands in any
/// order yields the same [`ExactSum::value`].
pub trait ExactSum<S>: Clone + Default + Debug + Send + Sync {
    fn add(&mut self, x: &S);
    fn sub(&mut self, x: &S);
    fn value(&self) -> S;
}

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static
{
    type Sum: ExactSum<Self>;

    /// Lift an `f64`. Exact for `f64` and [`Exact`], rounding for `f32`.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_u64(n: u64) -> Self;
    /// 2^-k; zero when it underflows the type.
    fn pow2_neg(k: u32) -> Self;

    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num) / Self::from_u64(den)
    }
}

impl ExactSum<f64> for SuperAccumulator {
    fn add(&mut self, x: &f64) {
        SuperAccumulator::add(self, *x)
    }
    fn sub(&mut self, x: &f64) {
        SuperAccumulator::sub(self, *x)
    }
    fn value(&self) -> f64 {
        SuperAccumulator::value(self)
    }
}

impl Scalar for f64 {
    type Sum = SuperAccumulator;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn pow2_neg(k: u32) -> Self {
        if k > 1074 {
            0.0
        } else {
            superacc::pow2(-(k as i32))
        }
    }
}

/// `f32` sums are accumulated exactly in `f64` terms and rounded on read.
#[derive(Clone, Default, Debug)]
pub struct F32Sum(SuperAccumulator);

impl ExactSum<f32> for F32Sum {
    fn add(&mut self, x: &f32) {
        self.0.add(*x as f64)
    }
    fn sub(&mut self, x: &f32) {
        self.0.sub(*x as f64)
    }
    fn value(&self) -> f32 {
        self.0.value() as f32
    }
}

impl Scalar for f32 {
    type Sum = F32Sum;

    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn from_u64(n: u64) -> Self {
        n as f32
    }
    fn pow2_neg(k: u32) -> Self {
        if k > 149 {
            0.0
        } else {
            (f64::pow2_neg(k)) as f32
        }
    }
}

#[derive(Clone, Debug)]
pub struct RationalSum(BigRational);

impl Default for RationalSum {
    fn default() -> Self {
        Self(BigRational::zero())
    }
}

impl ExactSum<BigRational> for RationalSum {
    fn add(&mut self, x: &BigRational) {
        self.0 += x;
    }
    fn sub(&mut self, x: &BigRational) {
        self.0 -= x;
    }
    fn value(&self) -> BigRational {
        self.0.clone()
    }
}

impl Scalar for BigRational {
    type Sum = RationalSum;

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn pow2_neg(k: u32) -> Self {
        BigRational::new(BigInt::one(), BigInt::one() << k)
    }
}
