//! Exact non-negative dyadic rationals `num / 2^den_pow2`.
//!
//! Every measure, influence and disagreement probability on `{0,1}^n` is a
//! count divided by a power of two, so these stay exact end-to-end.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// `num / 2^den_pow2`, kept in lowest terms (`num` odd, or `den_pow2 == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawDyadic")]
pub struct Dyadic {
    num: u64,
    den_pow2: u32,
}

#[derive(Deserialize)]
struct RawDyadic {
    num: u64,
    den_pow2: u32,
}

impl From<RawDyadic> for Dyadic {
    fn from(raw: RawDyadic) -> Self {
        Dyadic::new(raw.num, raw.den_pow2)
    }
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        num: 0,
        den_pow2: 0,
    };
    pub const ONE: Dyadic = Dyadic {
        num: 1,
        den_pow2: 0,
    };

    pub fn new(num: u64, den_pow2: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let shift = num.trailing_zeros().min(den_pow2);
        Dyadic {
            num: num >> shift,
            den_pow2: den_pow2 - shift,
        }
    }

    pub fn from_integer(v: u64) -> Self {
        Dyadic::new(v, 0)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den_pow2(&self) -> u32 {
        self.den_pow2
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn half(self) -> Self {
        Dyadic::new(self.num, self.den_pow2 + 1)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * (-(self.den_pow2 as f64)).exp2()
    }

    /// Numerator when written over `2^den_pow2`; `None` if `self` needs a
    /// larger denominator or the result overflows.
    pub fn scaled_numerator(&self, den_pow2: u32) -> Option<u64> {
        if den_pow2 < self.den_pow2 {
            return None;
        }
        let shift = den_pow2 - self.den_pow2;
        if shift >= 64 {
            return if self.num == 0 { Some(0) } else { None };
        }
        self.num.checked_mul(1u64 << shift)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        let d = self.den_pow2.max(rhs.den_pow2);
        let (a, b) = (self.wide_at(d), rhs.wide_at(d));
        a.checked_sub(b).map(|v| Self::from_wide(v, d))
    }

    fn wide_at(&self, den_pow2: u32) -> u128 {
        (self.num as u128) << (den_pow2 - self.den_pow2)
    }

    fn from_wide(mut v: u128, mut den_pow2: u32) -> Self {
        while v > u64::MAX as u128 {
            assert!(v & 1 == 0 && den_pow2 > 0, "dyadic numerator overflow");
            v >>= 1;
            den_pow2 -= 1;
        }
        Dyadic::new(v as u64, den_pow2)
    }

    /// Exact comparison against a finite non-negative `f64` (every finite
    /// double is itself dyadic).
    pub fn cmp_f64(&self, x: f64) -> Ordering {
        assert!(x.is_finite(), "comparison against a non-finite value");
        if x < 0.0 {
            return Ordering::Greater;
        }
        let (mant, exp) = decompose(x);
        // self = num * 2^-d ; x = mant * 2^exp
        // compare num * 2^{-d} with mant * 2^{exp}  <=>  num vs mant * 2^{exp + d}
        let shift = exp as i64 + self.den_pow2 as i64;
        let lhs = self.num as u128;
        let rhs = mant as u128;
        if mant == 0 {
            return lhs.cmp(&0);
        }
        if shift >= 0 {
            if shift >= 64 {
                return Ordering::Less;
            }
            lhs.cmp(&(rhs << shift))
        } else {
            let s = (-shift) as u32;
            if s >= 120 {
                return if lhs == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
            (lhs << s).cmp(&rhs)
        }
    }
}

/// Writes a finite non-negative double as `mant * 2^exp` exactly.
pub(crate) fn decompose(x: f64) -> (u64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}

/// `floor(x * count)` computed exactly for finite non-negative `x`.
pub fn floor_mul(x: f64, count: u64) -> u64 {
    let (mant, exp) = decompose(x);
    let prod = mant as u128 * count as u128;
    if exp >= 0 {
        let shifted = if exp >= 64 {
            u128::MAX
        } else {
            prod.checked_shl(exp as u32).unwrap_or(u128::MAX)
        };
        shifted.min(u64::MAX as u128) as u64
    } else {
        let s = (-exp) as u32;
        if s >= 128 {
            0
        } else {
            (prod >> s) as u64
        }
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Self) -> Self {
        let d = self.den_pow2.max(rhs.den_pow2);
        Dyadic::from_wide(self.wide_at(d) + rhs.wide_at(d), d)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("dyadic subtraction underflow")
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.den_pow2.max(other.den_pow2);
        self.wide_at(d).cmp(&other.wide_at(d))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den_pow2 == 0 {
            write!(f, "{}", self.num)
        } else if self.den_pow2 < 64 {
            write!(f, "{}/{}", self.num, 1u128 << self.den_pow2)
        } else {
            write!(f, "{}/2^{}", self.num, self.den_pow2)
        }
    }
}
