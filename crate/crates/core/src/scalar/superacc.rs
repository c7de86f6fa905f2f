//! Exact fixed-point accumulator for `f64` summands.
//!
//! Every finite `f64` with magnitude below 2^128 is an integer multiple of
//! 2^-1074, so a wide enough two's-complement integer holds any finite sum of
//! such values without rounding. The accumulated value is rounded exactly once
//! (to nearest, ties to even) when read, which makes the result independent of
//! the order of additions and removals.

const LIMBS: usize = 19;
const FRAC_BITS: i32 = 1074;
const MANTISSA_BITS: u32 = 53;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SuperAccumulator {
    limbs: [u64; LIMBS],
}

impl Default for SuperAccumulator {
    fn default() -> Self {
        Self { limbs: [0; LIMBS] }
    }
}

impl std::fmt::Debug for SuperAccumulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("SuperAccumulator").field(&self.value()).finish()
    }
}

impl SuperAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        self.accumulate(x, false);
    }

    pub fn sub(&mut self, x: f64) {
        self.accumulate(x, true);
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    fn accumulate(&mut self, x: f64, negate: bool) {
        assert!(x.is_finite(), "cannot accumulate non-finite value {x}");
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let negative = ((bits >> 63) == 1) ^ negate;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if biased == 0 {
            (frac, -FRAC_BITS)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        assert!(exponent <= 75, "summand {x} exceeds accumulator range");
        let pos = (exponent + FRAC_BITS) as usize;
        let limb = pos / 64;
        let wide = (mantissa as u128) << (pos % 64);
        let lo = wide as u64;
        let hi = (wide >> 64) as u64;
        if negative {
            self.sub_at(limb, lo, hi);
        } else {
            self.add_at(limb, lo, hi);
        }
    }

    fn add_at(&mut self, limb: usize, lo: u64, hi: u64) {
        let (s, c0) = self.limbs[limb].overflowing_add(lo);
        self.limbs[limb] = s;
        let (s, c1) = self.limbs[limb + 1].overflowing_add(hi);
        let (s, c2) = s.overflowing_add(c0 as u64);
        self.limbs[limb + 1] = s;
        let mut carry = c1 || c2;
        let mut i = limb + 2;
        while carry && i < LIMBS {
            let (s, c) = self.limbs[i].overflowing_add(1);
            self.limbs[i] = s;
            carry = c;
            i += 1;
        }
    }

    fn sub_at(&mut self, limb: usize, lo: u64, hi: u64) {
        let (s, b0) = self.limbs[limb].overflowing_sub(lo);
        self.limbs[limb] = s;
        let (s, b1) = self.limbs[limb + 1].overflowing_sub(hi);
        let (s, b2) = s.overflowing_sub(b0 as u64);
        self.limbs[limb + 1] = s;
        let mut borrow = b1 || b2;
        let mut i = limb + 2;
        while borrow && i < LIMBS {
            let (s, b) = self.limbs[i].overflowing_sub(1);
            self.limbs[i] = s;
            borrow = b;
            i += 1;
        }
    }

    /// The accumulated sum, correctly rounded to the nearest `f64`.
    pub fn value(&self) -> f64 {
        let negative = self.limbs[LIMBS - 1] >> 63 == 1;
        let mut mag = self.limbs;
        if negative {
            let mut carry = true;
            for l in mag.iter_mut() {
                let (s, c) = (!*l).overflowing_add(carry as u64);
                *l = s;
                carry = c;
            }
        }
        let Some(top) = highest_bit(&mag) else {
            return 0.0;
        };
        let magnitude = if top < MANTISSA_BITS as usize {
            // subnormal range: exact
            let m = extract(&mag, 0, top + 1);
            m as f64 * pow2(-FRAC_BITS)
        } else {
            let shift = top + 1 - MANTISSA_BITS as usize;
            let mut m = extract(&mag, shift, MANTISSA_BITS as usize);
            let round = bit(&mag, shift - 1);
            let sticky = shift >= 2 && any_below(&mag, shift - 1);
            let mut shift = shift as i32;
            if round && (sticky || m & 1 == 1) {
                m += 1;
                if m == 1u64 << MANTISSA_BITS {
                    m >>= 1;
                    shift += 1;
                }
            }
            m as f64 * pow2(shift - FRAC_BITS)
        };
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn highest_bit(limbs: &[u64; LIMBS]) -> Option<usize> {
    limbs
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &l)| l != 0)
        .map(|(i, &l)| i * 64 + 63 - l.leading_zeros() as usize)
}

fn bit(limbs: &[u64; LIMBS], i: usize) -> bool {
    (limbs[i / 64] >> (i % 64)) & 1 == 1
}

/// `width` (≤ 64) bits starting at bit `from`.
fn extract(limbs: &[u64; LIMBS], from: usize, width: usize) -> u64 {
    let limb = from / 64;
    let off = from % 64;
    let mut wide = (limbs[limb] as u128) >> off;
    if limb + 1 < LIMBS {
        wide |= (limbs[limb + 1] as u128) << (64 - off);
    }
    (wide as u64) & if width == 64 { u64::MAX } else { (1u64 << width) - 1 }
}

/// Whether any bit strictly below position `i` is set.
fn any_below(limbs: &[u64; LIMBS], i: usize) -> bool {
    let limb = i / 64;
    if limbs[..limb].iter().any(|&l| l != 0) {
        return true;
    }
    let off = i % 64;
    off > 0 && limbs[limb] & ((1u64 << off) - 1) != 0
}

/// 2^e for e in [-1074, 1023].
pub(crate) fn pow2(e: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&e));
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + 1074))
    }
}
