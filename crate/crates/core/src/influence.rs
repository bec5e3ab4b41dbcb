//! Exact influences, the excess parameter `M`, and the isoperimetric and
//! KKL lower bounds.
//!
//! All logarithms are base 2. `M` is defined by `I(f) = 2 mu (log2(1/mu) + M)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::function::{check_coord, BooleanFunction};

/// `I_k(f) = Pr[f(x) != f(x ^ e_k)]` for 1-based `k`.
pub fn influence(f: &BooleanFunction, k: usize) -> Result<Dyadic> {
    check_coord(k, f.n())?;
    Ok(Dyadic::new(f.flip_disagreements(k - 1), f.n() as u32))
}

/// The full influence vector, coordinate 1 first.
pub fn influences(f: &BooleanFunction) -> Vec<Dyadic> {
    (0..f.n())
        .map(|k| Dyadic::new(f.flip_disagreements(k), f.n() as u32))
        .collect()
}

pub fn total_influence(f: &BooleanFunction) -> Dyadic {
    influences(f).into_iter().sum()
}

/// `p * log2(1/p)`, with `0 log 0 = 0`.
pub fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// If `mu = 2^-k` exactly, returns `k`.
pub fn dyadic_power(mu: Dyadic) -> Option<u32> {
    (mu.num() == 1).then_some(mu.den_pow2())
}

/// `2 mu log2(1/mu)`; exact when `mu` is a power of two.
pub fn iso_bound(mu: Dyadic) -> f64 {
    match dyadic_power(mu) {
        Some(k) => Dyadic::new(2 * k as u64, k).to_f64(),
        None => 2.0 * entropy_term(mu.to_f64()),
    }
}

/// `M * mu = I/2 - mu log2(1/mu)`, well defined for every `mu` in `[0,1]`.
pub fn excess_times_measure(total: Dyadic, mu: Dyadic) -> f64 {
    match dyadic_power(mu) {
        // k * 2^-k is exact
        Some(k) => total.half().to_f64() - Dyadic::new(k as u64, k).to_f64(),
        None => total.half().to_f64() - entropy_term(mu.to_f64()),
    }
}

/// `M`; `0` for the degenerate measures 0 and 1.
pub fn excess(total: Dyadic, mu: Dyadic) -> f64 {
    if mu.is_zero() || mu == Dyadic::ONE {
        return 0.0;
    }
    match dyadic_power(mu) {
        // I / (2 * 2^-k) - k, with I * 2^(k-1) exact
        Some(k) => total.to_f64() * ((k as f64) - 1.0).exp2() - k as f64,
        None => total.to_f64() / (2.0 * mu.to_f64()) + mu.to_f64().log2(),
    }
}

/// Normalized total influence `I / (4 mu (1 - mu))`; `None` for constants.
pub fn normalized_total(total: Dyadic, mu: Dyadic) -> Option<f64> {
    let m = mu.to_f64();
    (m > 0.0 && m < 1.0).then(|| total.to_f64() / (4.0 * m * (1.0 - m)))
}

/// `(9 / t^2) * 9^(-t)` for normalized total influence `t`.
pub fn kkl_bound_from_normalized(t: f64) -> f64 {
    9.0 / (t * t) * 9f64.powf(-t)
}

/// Outcome of comparing `I(f)` with `2 mu log2(1/mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoComparison {
    /// `I(f) > 2 mu log2(1/mu)`.
    Strict,
    /// Equality, decided exactly (only possible when `mu` is a power of two).
    Equal,
    /// The inequality fails.
    Violated,
}

/// Tolerance used when `2 mu log2(1/mu)` is irrational.
pub const ISO_TOLERANCE: f64 = 1e-12;

/// Compares `I(f)` against the isoperimetric bound, exactly when `mu` is a
/// power of two and to [`ISO_TOLERANCE`] otherwise (equality then cannot occur).
pub fn compare_iso(total: Dyadic, mu: Dyadic) -> IsoComparison {
    if mu.is_zero() {
        return if total.is_zero() {
            IsoComparison::Equal
        } else {
            IsoComparison::Strict
        };
    }
    match dyadic_power(mu) {
        Some(k) => match total.cmp(&Dyadic::new(2 * k as u64, k)) {
            Ordering::Greater => IsoComparison::Strict,
            Ordering::Equal => IsoComparison::Equal,
            Ordering::Less => IsoComparison::Violated,
        },
        None => {
            if total.to_f64() - iso_bound(mu) >= -ISO_TOLERANCE {
                IsoComparison::Strict
            } else {
                IsoComparison::Violated
            }
        }
    }
}

/// Index (1-based) of a maximal influence, smallest index on ties.
pub fn max_coordinate(per_coord: &[Dyadic]) -> usize {
    let mut best = 0;
    for (k, v) in per_coord.iter().enumerate() {
        if *v > per_coord[best] {
            best = k;
        }
    }
    best + 1
}

/// The sub-cube containing every 1-point of `f`, as table-index masks
/// `(fixed_ones, fixed_zeros)`, if `f` is exactly that sub-cube.
pub fn subcube_masks(f: &BooleanFunction) -> Option<(u64, u64)> {
    let full = f.table_len() - 1;
    let mut ones = full;
    let mut zeros = full;
    let mut count = 0u64;
    for x in 0..f.table_len() {
        if f.get(x) {
            ones &= x;
            zeros &= !x & full;
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let codim = (ones | zeros).count_ones();
    (count == 1u64 << (f.n() as u32 - codim)).then_some((ones, zeros))
}

pub fn is_subcube(f: &BooleanFunction) -> bool {
    subcube_masks(f).is_some()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub n: usize,
    pub per_coord: Vec<Dyadic>,
    pub total: Dyadic,
    pub mu: Dyadic,
    /// Excess `M`; 0 with `degenerate` set when `mu` is 0 or 1.
    #[serde(rename = "M", with = "crate::real")]
    pub excess: f64,
    pub degenerate: bool,
    /// `2 mu log2(1/mu)`.
    #[serde(with = "crate::real")]
    pub iso_bound: f64,
    /// `2 (1-mu) log2(1/(1-mu))`.
    #[serde(with = "crate::real")]
    pub iso_bound_complement: f64,
    pub iso: IsoComparison,
    #[serde(with = "crate::real::option")]
    pub normalized_total: Option<f64>,
    /// `(9 / t^2) 9^(-t)` with `t = I / (4 mu (1 - mu))`; `None` for constants.
    #[serde(with = "crate::real::option")]
    pub kkl_bound: Option<f64>,
    pub max_coord: usize,
    pub max_influence: Dyadic,
    pub is_subcube: bool,
}

impl InfluenceReport {
    /// `max_k I_k >= kkl_bound` within `tol`; vacuous for constants.
    pub fn kkl_holds(&self, tol: f64) -> bool {
        self.kkl_bound
            .is_none_or(|b| self.max_influence.to_f64() >= b - tol)
    }
}

pub fn report(f: &BooleanFunction) -> InfluenceReport {
    let per_coord = influences(f);
    let total: Dyadic = per_coord.iter().copied().sum();
    let mu = f.measure();
    let degenerate = mu.is_zero() || mu == Dyadic::ONE;
    let comp = Dyadic::ONE - mu;
    let normalized = normalized_total(total, mu);
    let max_coord = max_coordinate(&per_coord);
    InfluenceReport {
        n: f.n(),
        total,
        mu,
        excess: excess(total, mu),
        degenerate,
        iso_bound: iso_bound(mu),
        iso_bound_complement: iso_bound(comp),
        iso: compare_iso(total, mu),
        normalized_total: normalized,
        kkl_bound: normalized.map(kkl_bound_from_normalized),
        max_coord,
        max_influence: per_coord[max_coord - 1],
        is_subcube: is_subcube(f),
        per_coord,
    }
}

/// Both sides of `I(f) = (I(f_1) + I(f_0)) / 2 + I_i(f)`.
pub fn decomposition_check(f: &BooleanFunction, i: usize) -> Result<(Dyadic, Dyadic)> {
    let f1 = f.restrict(i, true)?;
    let f0 = f.restrict(i, false)?;
    let lhs = total_influence(f);
    let rhs = (total_influence(&f1) + total_influence(&f0)).half() + influence(f, i)?;
    Ok((lhs, rhs))
}

/// The gain `2 M mu - M_1 mu_1 - M_0 mu_0` of splitting on one coordinate,
/// with the quantities that bound it from below.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitGain {
    pub coord: usize,
    pub mu: Dyadic,
    pub mu0: Dyadic,
    pub mu1: Dyadic,
    pub influence: Dyadic,
    #[serde(with = "crate::real")]
    pub gain: f64,
    /// `mu_s log2(mu / (2 mu_s))` with `mu_s = min(mu_0, mu_1)`; 0 when `mu_s = 0`.
    #[serde(with = "crate::real")]
    pub small_side_bound: f64,
    /// `gain / min(I_i, mu_0, mu_1)`; `None` when the minimum is 0.
    #[serde(with = "crate::real::option")]
    pub medium_ratio: Option<f64>,
}

impl SplitGain {
    pub fn small_side(&self) -> Dyadic {
        self.mu0.min(self.mu1)
    }

    pub fn small_side_holds(&self, tol: f64) -> bool {
        self.gain >= self.small_side_bound - tol
    }
}

pub fn split_gain(f: &BooleanFunction, i: usize) -> Result<SplitGain> {
    let f1 = f.restrict(i, true)?;
    let f0 = f.restrict(i, false)?;
    let (mu, mu0, mu1) = (f.measure(), f0.measure(), f1.measure());
    let gain = 2.0 * excess_times_measure(total_influence(f), mu)
        - excess_times_measure(total_influence(&f1), mu1)
        - excess_times_measure(total_influence(&f0), mu0);
    let small = mu0.min(mu1);
    let small_side_bound = if small.is_zero() {
        0.0
    } else {
        let s = small.to_f64();
        s * (mu.to_f64() / (2.0 * s)).log2()
    };
    let inf = influence(f, i)?;
    let zeta = inf.min(small);
    Ok(SplitGain {
        coord: i,
        mu,
        mu0,
        mu1,
        influence: inf,
        gain,
        small_side_bound,
        medium_ratio: (!zeta.is_zero()).then(|| gain / zeta.to_f64()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{self, and_of, majority, parity};

    #[test]
    fn single_influences() {
        let d = BooleanFunction::coordinate(3, 1).unwrap();
        assert_eq!(
            influences(&d),
            vec![Dyadic::ONE, Dyadic::ZERO, Dyadic::ZERO]
        );
        let a = and_of(2, [1, 2]).unwrap();
        assert_eq!(influences(&a), vec![Dyadic::new(1, 1); 2]);
        assert_eq!(influences(&parity(3).unwrap()), vec![Dyadic::ONE; 3]);
        assert!(influence(&a, 3).is_err());
    }

    #[test]
    fn and3_attains_isoperimetric_equality() {
        let r = report(&and_of(3, [1, 2, 3]).unwrap());
        assert_eq!(r.mu, Dyadic::new(1, 3));
        assert_eq!(r.total, Dyadic::new(3, 2));
        assert_eq!(r.excess, 0.0);
        assert_eq!(r.iso, IsoComparison::Equal);
        assert!(r.is_subcube);
    }

    #[test]
    fn majority3_kkl() {
        let r = report(&majority(3).unwrap());
        assert_eq!(r.total, Dyadic::new(3, 1));
        assert_eq!(r.normalized_total, Some(1.5));
        assert!((r.kkl_bound.unwrap() - 4.0 / 27.0).abs() < 1e-12);
        assert_eq!(r.max_influence, Dyadic::new(1, 1));
        assert_eq!(r.max_coord, 1);
        assert!(r.kkl_holds(1e-9));
    }

    #[test]
    fn constant_zero_is_degenerate() {
        let r = report(&BooleanFunction::zeros(3).unwrap());
        assert!(r.degenerate);
        assert_eq!(r.excess, 0.0);
        assert_eq!(r.total, Dyadic::ZERO);
        assert!(r.kkl_bound.is_none());
        assert!(!r.is_subcube);
    }

    #[test]
    fn decomposition_examples() {
        let a = and_of(2, [1, 2]).unwrap();
        assert_eq!(
            decomposition_check(&a, 1).unwrap(),
            (Dyadic::ONE, Dyadic::ONE)
        );
        let p = parity(3).unwrap();
        assert_eq!(
            decomposition_check(&p, 3).unwrap(),
            (Dyadic::from_integer(3), Dyadic::from_integer(3))
        );
        let z = BooleanFunction::zeros(3).unwrap();
        assert_eq!(
            decomposition_check(&z, 2).unwrap(),
            (Dyadic::ZERO, Dyadic::ZERO)
        );
    }

    #[test]
    fn split_gain_on_subcube_is_zero() {
        let f = and_of(4, [1, 3]).unwrap();
        let g = split_gain(&f, 1).unwrap();
        assert_eq!(g.mu0, Dyadic::ZERO);
        assert!(g.gain.abs() < 1e-12);
        assert!(g.small_side_holds(1e-12));
        assert!(g.medium_ratio.is_none());
    }

    #[test]
    fn gain_matches_simplified_form() {
        for seed in 0..50 {
            let f = generators::random_biased(6, seed, 1, 4).unwrap();
            for i in 1..=6 {
                let g = split_gain(&f, i).unwrap();
                let simplified = g.influence.to_f64()
                    + entropy_term(g.mu1.to_f64())
                    + entropy_term(g.mu0.to_f64())
                    - 2.0 * entropy_term(g.mu.to_f64());
                assert!((g.gain - simplified).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subcube_detection() {
        assert!(is_subcube(&BooleanFunction::ones(3).unwrap()));
        assert!(is_subcube(
            &BooleanFunction::from_fn(3, |x| x & 0b101 == 0b001).unwrap()
        ));
        assert!(!is_subcube(&parity(2).unwrap()));
        assert!(!is_subcube(&majority(3).unwrap()));
    }

    #[test]
    fn sharpness_excess_is_stable_in_l() {
        let m0 = report(&generators::sharpness_example(2, 0).unwrap()).excess;
        assert!(m0 > 0.0);
        for l in 1..=3 {
            let m = report(&generators::sharpness_example(2, l).unwrap()).excess;
            assert!((m - m0).abs() < 1e-9);
        }
    }
}
