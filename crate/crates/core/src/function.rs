//! Bit-packed truth tables on `{0,1}^n`.
//!
//! Index convention: the point `x = (x_1, ..., x_n)` lives at table index
//! `sum_i x_i * 2^(i-1)`, so coordinate 1 is the least-significant bit.
//! Public APIs take 1-based coordinates; internal kernels use 0-based bits.

use std::fmt;
use std::sync::OnceLock;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Default exact-mode cap on `n` (a 16 MiB table).
pub const DEFAULT_MAX_N: usize = 24;
/// Cap can be raised through this environment variable, up to [`HARD_MAX_N`].
pub const MAX_N_ENV: &str = "CUBELAB_MAX_N";
pub const HARD_MAX_N: usize = 32;

/// The exact-mode cap in force for this process.
pub fn exact_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(MAX_N_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .map(|v| v.clamp(1, HARD_MAX_N))
            .unwrap_or(DEFAULT_MAX_N)
    })
}

/// Words with table-index bit `k` equal to 0, for `k < 6`.
pub(crate) const LOW: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// A Boolean function `f: {0,1}^n -> {0,1}` stored as its truth table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: usize,
    words: Vec<u64>,
}

fn word_count(n: usize) -> usize {
    if n <= 6 {
        1
    } else {
        1 << (n - 6)
    }
}

fn valid_mask(n: usize) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n)) - 1
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let cap = exact_cap();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

impl BooleanFunction {
    pub fn zeros(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(BooleanFunction {
            n,
            words: vec![0; word_count(n)],
        })
    }

    pub fn ones(n: usize) -> Result<Self> {
        Ok(Self::zeros(n)?.complement())
    }

    /// Builds a table by evaluating `pred` on every index.
    pub fn from_fn(n: usize, mut pred: impl FnMut(u64) -> bool) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        for x in 0..(1u64 << n) {
            if pred(x) {
                f.words[(x >> 6) as usize] |= 1 << (x & 63);
            }
        }
        Ok(f)
    }

    /// Wraps raw words; bits beyond `2^n` are cleared.
    pub fn from_words(n: usize, mut words: Vec<u64>) -> Result<Self> {
        check_n(n)?;
        if words.len() != word_count(n) {
            return Err(Error::InvalidParameter(format!(
                "expected {} table words for n = {}, got {}",
                word_count(n),
                n,
                words.len()
            )));
        }
        words[0] &= valid_mask(n);
        Ok(BooleanFunction { n, words })
    }

    /// The dictator `x_i` (1-based).
    pub fn coordinate(n: usize, i: usize) -> Result<Self> {
        check_n(n)?;
        check_coord(i, n)?;
        let k = i - 1;
        let words = if k < 6 {
            vec![!LOW[k] & valid_mask(n); word_count(n)]
        } else {
            let s = 1usize << (k - 6);
            (0..word_count(n))
                .map(|w| if w & s != 0 { u64::MAX } else { 0 })
                .collect()
        };
        Ok(BooleanFunction { n, words })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table_len(&self) -> u64 {
        1u64 << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value at a table index.
    #[inline]
    pub fn get(&self, index: u64) -> bool {
        (self.words[(index >> 6) as usize] >> (index & 63)) & 1 == 1
    }

    pub fn set(&mut self, index: u64, value: bool) {
        let w = &mut self.words[(index >> 6) as usize];
        if value {
            *w |= 1 << (index & 63);
        } else {
            *w &= !(1 << (index & 63));
        }
    }

    /// `f(x)` for a point given coordinate by coordinate.
    pub fn evaluate(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.get(point_index(x)))
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `mu(f) = E[f]`, exactly.
    pub fn measure(&self) -> Dyadic {
        Dyadic::new(self.count_ones(), self.n as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.count_ones() == self.table_len()
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.is_one()
    }

    /// `1 - f`.
    pub fn complement(&self) -> Self {
        let mask = valid_mask(self.n);
        BooleanFunction {
            n: self.n,
            words: self.words.iter().map(|w| !w & mask).collect(),
        }
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a ^ b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.same_dim(other)?;
        Ok(BooleanFunction {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub(crate) fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(())
    }

    /// Number of points where `self` and `other` differ.
    pub fn distance(&self, other: &Self) -> Result<u64> {
        self.same_dim(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum())
    }

    /// Number of `x` with `f(x) != f(x ^ e_k)`, `k` 0-based.
    pub(crate) fn flip_disagreements(&self, k: usize) -> u64 {
        if k < 6 {
            let s = 1u32 << k;
            self.words
                .iter()
                .map(|&w| (((w ^ (w >> s)) & LOW[k]).count_ones() as u64) * 2)
                .sum()
        } else {
            let s = 1usize << (k - 6);
            let mut total = 0u64;
            for (i, &w) in self.words.iter().enumerate() {
                if i & s == 0 {
                    total += (w ^ self.words[i | s]).count_ones() as u64 * 2;
                }
            }
            total
        }
    }

    /// `g(x) = f(x ^ mask)` where `mask` is a table index.
    pub(crate) fn xor_index(&self, mask: u64) -> Self {
        let low = mask & 63;
        let high = (mask >> 6) as usize;
        let words = (0..self.words.len())
            .map(|i| {
                let mut w = self.words[i ^ high];
                for (k, &lo) in LOW.iter().enumerate() {
                    if low >> k & 1 == 1 {
                        let s = 1u32 << k;
                        w = ((w & lo) << s) | ((w >> s) & lo);
                    }
                }
                w
            })
            .collect();
        BooleanFunction { n: self.n, words }
    }

    /// Fixes coordinate `i` (1-based) to `b`; survivors are renumbered
    /// `1..n-1` in their original order.
    pub fn restrict(&self, i: usize, b: bool) -> Result<Self> {
        check_coord(i, self.n)?;
        if self.n < 2 {
            return Err(Error::InvalidParameter("restriction needs n >= 2".into()));
        }
        Ok(self.restrict_unchecked(i - 1, b))
    }

    pub(crate) fn restrict_unchecked(&self, k: usize, b: bool) -> Self {
        let m = self.n - 1;
        let out_words = word_count(m);
        let words = if k >= 6 {
            let p = k - 6;
            let low_mask = (1usize << p) - 1;
            (0..out_words)
                .map(|j| {
                    let idx = ((j >> p) << (p + 1)) | ((b as usize) << p) | (j & low_mask);
                    self.words[idx]
                })
                .collect()
        } else {
            let compress = |w: u64| -> u64 {
                let w = if b { w >> (1u32 << k) } else { w };
                let mut out = 0u64;
                for t in 0..32u32 {
                    let pos = ((t >> k) << (k + 1)) | (t & ((1 << k) - 1));
                    out |= ((w >> pos) & 1) << t;
                }
                out
            };
            if m >= 6 {
                (0..out_words)
                    .map(|j| compress(self.words[2 * j]) | (compress(self.words[2 * j + 1]) << 32))
                    .collect()
            } else {
                vec![compress(self.words[0]) & valid_mask(m)]
            }
        };
        BooleanFunction { n: m, words }
    }

    /// Relabels coordinates: coordinate `i` of `self` becomes coordinate
    /// `perm[i-1]` of the result. `perm` is a 1-based permutation of `[n]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidPermutation(format!(
                "expected {} entries, got {}",
                self.n,
                perm.len()
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p == 0 || p > self.n || seen[p - 1] {
                return Err(Error::InvalidPermutation(format!("{perm:?}")));
            }
            seen[p - 1] = true;
        }
        let mut out = BooleanFunction {
            n: self.n,
            words: vec![0; self.words.len()],
        };
        for x in 0..self.table_len() {
            if self.get(x) {
                let mut y = 0u64;
                for (i, &p) in perm.iter().enumerate() {
                    y |= ((x >> i) & 1) << (p - 1);
                }
                out.set(y, true);
            }
        }
        Ok(out)
    }

    /// `g(x) = f(x ^ 1_S)` for a set of 1-based coordinates `S`.
    pub fn negate_inputs(&self, coords: &[usize]) -> Result<Self> {
        Ok(self.xor_index(coord_set_mask(coords, self.n)?))
    }

    /// Lowercase hex with the mandatory `n=<k>:` prefix; the most
    /// significant digit carries the highest table indices.
    pub fn to_hex(&self) -> String {
        let body = if self.n >= 6 {
            self.words
                .iter()
                .rev()
                .map(|w| format!("{w:016x}"))
                .collect::<String>()
        } else {
            let digits = ((1usize << self.n) / 4).max(1);
            format!("{:0width$x}", self.words[0], width = digits)
        };
        format!("n={}:{}", self.n, body)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedSpec {
            spec: text.to_string(),
            reason: reason.to_string(),
        };
        let rest = text
            .strip_prefix("n=")
            .ok_or_else(|| bad("missing `n=<k>:` prefix"))?;
        let (n_str, hex) = rest.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let n: usize = n_str.parse().map_err(|_| bad("n is not an integer"))?;
        check_n(n)?;
        let digits = ((1usize << n) / 4).max(1);
        if hex.len() != digits {
            return Err(bad(&format!(
                "expected {digits} hex digits, got {}",
                hex.len()
            )));
        }
        if !hex
            .bytes()
            .all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c))
        {
            return Err(bad("table must be lowercase hex"));
        }
        let words = if n >= 6 {
            hex.as_bytes()
                .chunks(16)
                .rev()
                .map(|c| u64::from_str_radix(std::str::from_utf8(c).unwrap(), 16).unwrap())
                .collect()
        } else {
            let w = u64::from_str_radix(hex, 16).unwrap();
            if w & !valid_mask(n) != 0 {
                return Err(bad("table has bits beyond 2^n"));
            }
            vec![w]
        };
        Self::from_words(n, words)
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 10 {
            write!(f, "BooleanFunction({})", self.to_hex())
        } else {
            write!(
                f,
                "BooleanFunction(n={}, ones={})",
                self.n,
                self.count_ones()
            )
        }
    }
}

/// Table index of a point given as coordinates `(x_1, ..., x_n)`.
pub fn point_index(x: &[bool]) -> u64 {
    x.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}

pub(crate) fn check_coord(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::CoordinateOutOfRange { coord: i, n });
    }
    Ok(())
}

/// Table-index mask of a set of 1-based coordinates; rejects duplicates.
pub(crate) fn coord_set_mask(coords: &[usize], n: usize) -> Result<u64> {
    let mut mask = 0u64;
    for &c in coords {
        if c == 0 || c > n {
            return Err(Error::InvalidCoordinateSet(format!(
                "coordinate {c} not in 1..={n}"
            )));
        }
        let bit = 1u64 << (c - 1);
        if mask & bit != 0 {
            return Err(Error::InvalidCoordinateSet(format!(
                "duplicate coordinate {c}"
            )));
        }
        mask |= bit;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> BooleanFunction {
        BooleanFunction::from_hex("n=2:8").unwrap()
    }

    fn parity(n: usize) -> BooleanFunction {
        BooleanFunction::from_fn(n, |x| x.count_ones() % 2 == 1).unwrap()
    }

    #[test]
    fn evaluate_and() {
        let f = and2();
        assert!(f.evaluate(&[true, true]).unwrap());
        assert!(!f.evaluate(&[false, true]).unwrap());
        assert!(matches!(
            f.evaluate(&[true]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn evaluate_parity() {
        assert!(!parity(3).evaluate(&[true, true, false]).unwrap());
    }

    #[test]
    fn measures() {
        assert_eq!(and2().measure(), Dyadic::new(1, 2));
        assert_eq!(BooleanFunction::zeros(5).unwrap().measure(), Dyadic::ZERO);
    }

    #[test]
    fn restrictions() {
        let f = and2();
        let r1 = f.restrict(1, true).unwrap();
        assert_eq!(r1, BooleanFunction::coordinate(1, 1).unwrap());
        assert_eq!(r1.measure(), Dyadic::new(1, 1));
        assert!(f.restrict(1, false).unwrap().is_zero());
        assert_eq!(parity(3).restrict(2, true).unwrap(), parity(2).complement());
        assert!(matches!(
            f.restrict(3, true),
            Err(Error::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn restrict_matches_pointwise_definition_on_wide_tables() {
        let f =
            BooleanFunction::from_fn(9, |x| (x.wrapping_mul(0x9e37_79b9) >> 7) & 1 == 1).unwrap();
        for i in 1..=9 {
            for b in [false, true] {
                let r = f.restrict(i, b).unwrap();
                for y in 0..(1u64 << 8) {
                    let low = y & ((1 << (i - 1)) - 1);
                    let high = (y >> (i - 1)) << i;
                    let x = high | ((b as u64) << (i - 1)) | low;
                    assert_eq!(r.get(y), f.get(x), "i={i} b={b} y={y}");
                }
            }
        }
    }

    #[test]
    fn relabelings() {
        let d1 = BooleanFunction::coordinate(2, 1).unwrap();
        let d2 = BooleanFunction::coordinate(2, 2).unwrap();
        assert_eq!(d1.permute(&[2, 1]).unwrap(), d2);
        let nor = BooleanFunction::from_fn(2, |x| x == 0).unwrap();
        assert_eq!(and2().negate_inputs(&[1, 2]).unwrap(), nor);
        assert!(BooleanFunction::zeros(3).unwrap().complement().is_one());
        assert!(d1.permute(&[1, 1]).is_err());
        assert!(d1.negate_inputs(&[3]).is_err());
    }

    #[test]
    fn negate_inputs_on_wide_tables() {
        let f = BooleanFunction::from_fn(8, |x| (x * 37 + 11) % 7 < 3).unwrap();
        let g = f.negate_inputs(&[1, 4, 7, 8]).unwrap();
        let m = 0b1100_1001u64;
        for x in 0..256 {
            assert_eq!(g.get(x), f.get(x ^ m));
        }
    }

    #[test]
    fn hex_format() {
        assert_eq!(and2().to_hex(), "n=2:8");
        assert_eq!(BooleanFunction::coordinate(1, 1).unwrap().to_hex(), "n=1:2");
        let d7 = BooleanFunction::coordinate(7, 7).unwrap();
        assert_eq!(
            d7.to_hex(),
            format!("n=7:{}{}", "f".repeat(16), "0".repeat(16))
        );
        assert_eq!(BooleanFunction::from_hex(&d7.to_hex()).unwrap(), d7);
        assert!(BooleanFunction::from_hex("2:8").is_err());
        assert!(BooleanFunction::from_hex("n=2:88").is_err());
        assert!(BooleanFunction::from_hex("n=1:4").is_err());
        assert!(BooleanFunction::from_hex("n=3:AB").is_err());
    }

    #[test]
    fn coordinate_tables() {
        for n in 1..=8 {
            for i in 1..=n {
                let d = BooleanFunction::coordinate(n, i).unwrap();
                for x in 0..(1u64 << n) {
                    assert_eq!(d.get(x), (x >> (i - 1)) & 1 == 1);
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            BooleanFunction::zeros(exact_cap() + 1),
            Err(Error::CapExceeded { .. })
        ));
        assert!(BooleanFunction::zeros(0).is_err());
    }
}
