//! The shifting operators `S_{S,T}` and the compression pipeline that
//! empties the `x_1 = 0` half of a function of measure at most 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{coord_set_mask, BooleanFunction};

/// A pair of disjoint 1-based coordinate sets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

impl ShiftSpec {
    pub fn new(s: impl Into<Vec<usize>>, t: impl Into<Vec<usize>>) -> Self {
        ShiftSpec {
            s: s.into(),
            t: t.into(),
        }
    }

    /// Table-index masks of `S` and `T`, after validation against `n`.
    pub fn masks(&self, n: usize) -> Result<(u64, u64)> {
        let s = coord_set_mask(&self.s, n)?;
        let t = coord_set_mask(&self.t, n)?;
        if s & t != 0 {
            return Err(Error::InvalidCoordinateSet(format!(
                "S = {:?} and T = {:?} overlap",
                self.s, self.t
            )));
        }
        Ok((s, t))
    }
}

impl std::fmt::Display for ShiftSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "S{{{}}}T{{{}}}", join(&self.s), join(&self.t))
    }
}

/// Table of the points with `x_S = 1` and `x_T = 0` (vacuous for empty sets).
fn region(n: usize, ones: u64, zeros: u64) -> Result<BooleanFunction> {
    let mut r = BooleanFunction::ones(n)?;
    for k in 0..n {
        if ones >> k & 1 == 1 {
            r = r.and(&BooleanFunction::coordinate(n, k + 1)?)?;
        }
        if zeros >> k & 1 == 1 {
            r = r.and(&BooleanFunction::coordinate(n, k + 1)?.complement())?;
        }
    }
    Ok(r)
}

/// `S_{S,T}(f)`:
/// * `f(x) AND f(x ^ 1_{S∪T})` where `x_S = 1, x_T = 0`;
/// * `f(x) OR f(x ^ 1_{S∪T})` where `x_T = 1, x_S = 0`;
/// * `f(x)` elsewhere.
///
/// The first case wins where both apply (only when `S = T = ∅`, and then
/// both cases equal `f`).
pub fn shift(f: &BooleanFunction, spec: &ShiftSpec) -> Result<BooleanFunction> {
    let (s, t) = spec.masks(f.n())?;
    let partner = f.xor_index(s | t);
    let down = region(f.n(), s, t)?;
    let up = region(f.n(), t, s)?.and(&down.complement())?;
    let rest = down.or(&up)?.complement();
    down.and(&f.and(&partner)?)?
        .or(&up.and(&f.or(&partner)?)?)?
        .or(&rest.and(f)?)
}

/// One stage of the compression pipeline.
#[derive(Debug, Clone)]
pub struct Stage {
    /// Shifts applied to the previous stage, in application order.
    pub shifts: Vec<ShiftSpec>,
    pub function: BooleanFunction,
}

/// Subsets of `{2..n}` of size `k`, in lexicographic order.
fn subsets_of_tail(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..=n {
            if n + 1 - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(2, n, k, &mut Vec::new(), &mut out);
    out
}

/// The compression pipeline `f^0, f^1, ..., f^n`.
///
/// * `f^0 = S_{∅{1}} ∘ S_{∅{2}} ∘ ... ∘ S_{∅{n}}(f)`: up-shifts, `S_{∅{n}}` first.
/// * `f^k` for `1 <= k < n` applies `S_{A,{1}}` to `f^{k-1}` for every
///   `A ⊆ {2..n}` with `|A| = k` (for `k = 1`: `S_{{2}{1}}` first, up to `S_{{n}{1}}`).
/// * `f^n = S_{{n..2}{1}}(f^{n-1})`.
///
/// Requires `mu(f) <= 1/2`.
pub fn compress_pipeline(f: &BooleanFunction) -> Result<Vec<Stage>> {
    let n = f.n();
    if 2 * f.count_ones() > f.table_len() {
        return Err(Error::MeasureTooLarge {
            measure: f.measure().to_f64(),
        });
    }
    let mut stages = Vec::with_capacity(n + 1);
    let apply = |g: &BooleanFunction, shifts: Vec<ShiftSpec>| -> Result<Stage> {
        let mut cur = g.clone();
        for s in &shifts {
            cur = shift(&cur, s)?;
        }
        Ok(Stage {
            shifts,
            function: cur,
        })
    };
    let ups: Vec<ShiftSpec> = (1..=n)
        .rev()
        .map(|j| ShiftSpec::new(vec![], vec![j]))
        .collect();
    stages.push(apply(f, ups)?);
    for k in 1..n {
        let shifts = subsets_of_tail(n, k)
            .into_iter()
            .map(|a| ShiftSpec::new(a, vec![1]))
            .collect();
        let prev = &stages[k - 1].function;
        stages.push(apply(prev, shifts)?);
    }
    let last = ShiftSpec::new((2..=n).rev().collect::<Vec<_>>(), vec![1]);
    let prev = &stages[n - 1].function;
    stages.push(apply(prev, vec![last])?);
    Ok(stages)
}
