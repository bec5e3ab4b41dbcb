//! Named functions and standard test families, materialized as truth tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::function::{coord_set_mask, BooleanFunction};

fn param(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn checked_product(a: usize, b: usize, what: &str) -> Result<usize> {
    a.checked_mul(b)
        .ok_or_else(|| Error::InvalidParameter(format!("{what} overflows")))
}

pub fn constant(n: usize, value: bool) -> Result<BooleanFunction> {
    if value {
        BooleanFunction::ones(n)
    } else {
        BooleanFunction::zeros(n)
    }
}

/// AND of the coordinates in `coords` (1-based); the empty set gives 1.
pub fn and_of(n: usize, coords: impl IntoIterator<Item = usize>) -> Result<BooleanFunction> {
    let mut f = BooleanFunction::ones(n)?;
    for c in coords {
        f = f.and(&BooleanFunction::coordinate(n, c)?)?;
    }
    Ok(f)
}

/// OR of the coordinates in `coords`; the empty set gives 0.
pub fn or_of(n: usize, coords: impl IntoIterator<Item = usize>) -> Result<BooleanFunction> {
    let mut f = BooleanFunction::zeros(n)?;
    for c in coords {
        f = f.or(&BooleanFunction::coordinate(n, c)?)?;
    }
    Ok(f)
}

/// The sub-cube `{x_1 = ... = x_k = 1}` of co-dimension `k`.
pub fn subcube(n: usize, k: usize) -> Result<BooleanFunction> {
    param(k <= n, format!("co-dimension {k} exceeds n = {n}"))?;
    and_of(n, 1..=k)
}

/// `Tribes_{w,s}`: OR of `s` ANDs over consecutive blocks of `w` coordinates.
pub fn tribes(w: usize, s: usize) -> Result<BooleanFunction> {
    param(w >= 1 && s >= 1, "tribes needs w >= 1 and s >= 1")?;
    let n = checked_product(w, s, "w*s")?;
    let mut f = BooleanFunction::zeros(n)?;
    for block in 0..s {
        f = f.or(&and_of(n, block * w + 1..=block * w + w)?)?;
    }
    Ok(f)
}

/// `1 - Tribes_{w,s}(1 - x)`: AND over blocks of the OR of the block.
pub fn dual_tribes(w: usize, s: usize) -> Result<BooleanFunction> {
    param(w >= 1 && s >= 1, "dual tribes needs w >= 1 and s >= 1")?;
    let n = checked_product(w, s, "w*s")?;
    let mut f = BooleanFunction::ones(n)?;
    for block in 0..s {
        f = f.and(&or_of(n, block * w + 1..=block * w + w)?)?;
    }
    Ok(f)
}

/// Dimension of the sharpness construction, `w * 2^w + l`.
pub fn sharpness_dimension(w: usize, l: usize) -> Result<usize> {
    param((1..32).contains(&w), "sharpness needs 1 <= w < 32")?;
    checked_product(w, 1usize << w, "w*2^w")?
        .checked_add(l)
        .ok_or_else(|| Error::InvalidParameter("w*2^w + l overflows".into()))
}

/// Dual tribes `Tribes^dagger_{w,2^w}` on the first `w*2^w` coordinates,
/// conjoined with `x_{n-l+1} = ... = x_n = 1`.
pub fn sharpness_example(w: usize, l: usize) -> Result<BooleanFunction> {
    let n = sharpness_dimension(w, l)?;
    let body = n - l;
    let mut f = BooleanFunction::ones(n)?;
    for block in 0..(1usize << w) {
        f = f.and(&or_of(n, block * w + 1..=block * w + w)?)?;
    }
    f.and(&and_of(n, body + 1..=n)?)
}

/// Lexicographic rank with coordinate 1 as the most significant bit.
pub fn lex_rank(index: u64, n: usize) -> u64 {
    let mut r = 0u64;
    for i in 0..n {
        r |= ((index >> i) & 1) << (n - 1 - i);
    }
    r
}

/// Indicator of the `m` lexicographically largest points.
pub fn lex_segment(n: usize, m: u64) -> Result<BooleanFunction> {
    param(
        n < 64 && m <= 1u64 << n,
        format!("m = {m} out of range 0..=2^{n}"),
    )?;
    let threshold = (1u64 << n) - m;
    BooleanFunction::from_fn(n, |x| lex_rank(x, n) >= threshold)
}

pub fn parity(n: usize) -> Result<BooleanFunction> {
    BooleanFunction::from_fn(n, |x| x.count_ones() % 2 == 1)
}

pub fn majority(n: usize) -> Result<BooleanFunction> {
    param(n % 2 == 1, "majority needs odd n")?;
    BooleanFunction::from_fn(n, |x| x.count_ones() as usize > n / 2)
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of a point (given as little-endian coordinate words) under `seed`.
pub(crate) fn point_hash(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(seed), |h, &w| splitmix64(h ^ w))
}

/// Bit of a seeded random function with `Pr[1] = p_num / p_den`.
pub(crate) fn random_bit(seed: u64, words: &[u64], p_num: u64, p_den: u64) -> bool {
    let h = point_hash(seed, words);
    ((h as u128 * p_den as u128) >> 64) < p_num as u128
}

/// Uniformly random function; each point is an independent seeded bit.
pub fn random_function(n: usize, seed: u64) -> Result<BooleanFunction> {
    random_biased(n, seed, 1, 2)
}

/// Random function with `Pr[f(x) = 1] = p_num / p_den` independently per point.
pub fn random_biased(n: usize, seed: u64, p_num: u64, p_den: u64) -> Result<BooleanFunction> {
    param(
        p_den > 0 && p_num <= p_den,
        "bias must satisfy 0 <= p_num <= p_den, p_den > 0",
    )?;
    BooleanFunction::from_fn(n, |x| random_bit(seed, &[x], p_num, p_den))
}

/// Positive terms (as coordinate masks over `n <= 64`) of the seeded monotone DNF.
pub(crate) fn random_monotone_terms(n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=n.max(1));
    (0..count)
        .map(|_| {
            let width = rng.random_range(1..=n);
            let mut coords: Vec<usize> = (1..=n).collect();
            for i in 0..width {
                let j = rng.random_range(i..n);
                coords.swap(i, j);
            }
            let mut t = coords[..width].to_vec();
            t.sort_unstable();
            t
        })
        .collect()
}

/// Seeded random monotone function: an OR of random positive terms.
pub fn random_monotone(n: usize, seed: u64) -> Result<BooleanFunction> {
    let mut f = BooleanFunction::zeros(n)?;
    for term in random_monotone_terms(n, seed) {
        f = f.or(&and_of(n, term)?)?;
    }
    Ok(f)
}

/// Embeds `g` on the coordinates `coords` of `{0,1}^n`: coordinate `j` of
/// `g` reads coordinate `coords[j-1]` of the ambient point.
pub fn junta_embed(g: &BooleanFunction, n: usize, coords: &[usize]) -> Result<BooleanFunction> {
    if coords.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: coords.len(),
        });
    }
    coord_set_mask(coords, n)?;
    BooleanFunction::from_fn(n, |x| {
        let local = coords
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &c)| acc | (((x >> (c - 1)) & 1) << j));
        g.get(local)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;

    #[test]
    fn tribes_measures() {
        assert_eq!(tribes(2, 4).unwrap().measure(), Dyadic::new(175, 8));
        assert_eq!(tribes(1, 5).unwrap().measure(), Dyadic::new(31, 5));
        assert_eq!(tribes(4, 1).unwrap().measure(), Dyadic::new(1, 4));
    }

    #[test]
    fn dual_tribes_is_input_flipped_complement() {
        for (w, s) in [(1, 1), (2, 4), (3, 2), (2, 3), (4, 2)] {
            let t = tribes(w, s).unwrap();
            let all: Vec<usize> = (1..=w * s).collect();
            let dual = t.negate_inputs(&all).unwrap().complement();
            assert_eq!(dual_tribes(w, s).unwrap(), dual, "w={w} s={s}");
        }
        assert_eq!(dual_tribes(2, 4).unwrap().measure(), Dyadic::new(81, 8));
        assert_eq!(
            dual_tribes(1, 1).unwrap(),
            BooleanFunction::coordinate(1, 1).unwrap()
        );
    }

    #[test]
    fn sharpness_measures() {
        assert_eq!(
            sharpness_example(2, 2).unwrap().measure(),
            Dyadic::new(81, 10)
        );
        assert_eq!(sharpness_example(2, 0).unwrap(), dual_tribes(2, 4).unwrap());
        assert_eq!(sharpness_dimension(3, 1).unwrap(), 25);
    }

    #[test]
    fn lex_segments() {
        assert_eq!(
            lex_segment(4, 8).unwrap(),
            BooleanFunction::coordinate(4, 1).unwrap()
        );
        assert_eq!(lex_segment(4, 2).unwrap(), subcube(4, 3).unwrap());
        // {111, 110, 101} written as (x1, x2, x3)
        let f = lex_segment(3, 3).unwrap();
        let expected = BooleanFunction::from_fn(3, |x| [0b111, 0b011, 0b101].contains(&x)).unwrap();
        assert_eq!(f, expected);
        assert!(lex_segment(3, 9).is_err());
    }

    #[test]
    fn standard_families() {
        assert_eq!(majority(3).unwrap().measure(), Dyadic::new(1, 1));
        assert!(majority(4).is_err());
        assert_eq!(parity(5).unwrap().measure(), Dyadic::new(1, 1));
        let a = random_function(4, 7).unwrap();
        let b = random_function(4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            random_function(10, 7).unwrap(),
            random_function(10, 8).unwrap()
        );
    }

    #[test]
    fn random_monotone_is_monotone() {
        for seed in 0..20 {
            let f = random_monotone(6, seed).unwrap();
            for x in 0..64u64 {
                for k in 0..6 {
                    if f.get(x) {
                        assert!(f.get(x | (1 << k)));
                    }
                }
            }
        }
    }

    #[test]
    fn junta_embedding() {
        let and2 = and_of(2, [1, 2]).unwrap();
        let f = junta_embed(&and2, 5, &[2, 4]).unwrap();
        assert_eq!(f, and_of(5, [2, 4]).unwrap());
        assert!(junta_embed(&and2, 5, &[2, 2]).is_err());
        assert!(junta_embed(&and2, 5, &[2]).is_err());
    }
}
