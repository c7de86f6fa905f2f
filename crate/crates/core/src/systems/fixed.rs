use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of the circle `R/Z` stored as a 64-bit binary fraction: the value
/// is `bits / 2^64`. Addition and integer multiplication wrap, which is
/// exactly reduction mod 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fixed(pub u64);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const HALF: Fixed = Fixed(1 << 63);

    /// `floor(2^64 * (sqrt(5) - 1) / 2)`, the golden ratio conjugate.
    pub const GOLDEN: Fixed = Fixed(0x9E37_79B9_7F4A_7C15);

    pub fn bits(self) -> u64 {
        self.0
    }

    /// Nearest representable fraction to `x mod 1`.
    pub fn from_f64(x: f64) -> Fixed {
        let frac = x - x.floor();
        // 2^64 * frac can round up to 2^64 for frac just below 1
        let scaled = frac * 18_446_744_073_709_551_616.0;
        if scaled >= 18_446_744_073_709_551_616.0 {
            Fixed(0)
        } else {
            Fixed(scaled as u64)
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 18_446_744_073_709_551_616.0
    }

    /// `num/den mod 1`, rounded down.
    pub fn from_ratio(num: u64, den: u64) -> Fixed {
        assert!(den > 0, "zero denominator");
        let r = ((num % den) as u128) << 64;
        Fixed((r / den as u128) as u64)
    }

    pub fn wrapping_add(self, other: Fixed) -> Fixed {
        Fixed(self.0.wrapping_add(other.0))
    }

    pub fn wrapping_mul(self, k: i64) -> Fixed {
        Fixed(self.0.wrapping_mul(k as u64))
    }

    /// Distance on the circle, as a fraction of the full turn (in `[0, 1/2]`).
    pub fn circle_distance(self, other: Fixed) -> f64 {
        let d = self.0.wrapping_sub(other.0);
        d.min(d.wrapping_neg()) as f64 / 18_446_744_073_709_551_616.0
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({:#018x})", self.0)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn golden_constant_matches_integer_sqrt() {
        // floor((sqrt(5 * 2^128) - 2^64) / 2) = floor(2^64 (sqrt5 - 1) / 2)
        let n: BigUint = BigUint::from(5u32) << 128u32;
        let root = n.sqrt();
        let expected: BigUint = (root - (BigUint::from(1u32) << 64)) >> 1;
        assert_eq!(expected, BigUint::from(Fixed::GOLDEN.0));
    }

    #[test]
    fn from_ratio_and_f64() {
        assert_eq!(Fixed::from_ratio(1, 2), Fixed::HALF);
        assert_eq!(Fixed::from_ratio(3, 2), Fixed::HALF);
        assert_eq!(Fixed::from_f64(0.25), Fixed(1 << 62));
        assert_eq!(Fixed::from_f64(-0.75), Fixed(1 << 62));
        assert_eq!(Fixed::from_f64(1.0 - f64::EPSILON / 4.0), Fixed(0));
    }

    #[test]
    fn circle_distance_wraps() {
        let a = Fixed::from_f64(0.95);
        let b = Fixed::from_f64(0.05);
        assert!((a.circle_distance(b) - 0.1).abs() < 1e-12);
    }
}
