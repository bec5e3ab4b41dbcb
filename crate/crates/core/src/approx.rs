//! Certified recursive DNF approximation, plus the exhaustive single-term
//! and small-DNF oracles it is compared against.
//!
//! Budgets are tracked as integer point counts at the scale of the root
//! table, so every node's decision is checked with exact arithmetic: a node
//! on a restriction of dimension `m` has one table point per root point, and
//! its disagreement count is directly a root-scale count.

use serde::{Deserialize, Serialize};

use crate::dnf::{dnf_error, Dnf, Term};
use crate::dyadic::{floor_mul, Dyadic};
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::influence::{excess, excess_times_measure, influences, max_coordinate, total_influence};

/// How a split node divides its budget between the two restrictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    /// Child allowances proportional to `M_b * mu_b`, so that
    /// `M_0 / eps_0 = M_1 / eps_1`.
    #[default]
    ProportionalToMMu,
    ProportionalToMu,
    Equal,
}

impl std::str::FromStr for SplitRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional-to-m-mu" | "m-mu" => Ok(SplitRule::ProportionalToMMu),
            "proportional-to-mu" | "mu" => Ok(SplitRule::ProportionalToMu),
            "equal" => Ok(SplitRule::Equal),
            other => Err(Error::InvalidParameter(format!(
                "unknown split rule `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetPolicy {
    pub split_rule: SplitRule,
    /// A restriction with `mu_b <= rho * mu` is replaced by constant 0 when
    /// the budget allows it.
    pub small_side_factor: f64,
    /// Nodes of dimension at most this try the exhaustive two-term oracle
    /// before splitting.
    pub oracle_cap: usize,
    /// Nodes of dimension at most this use the exact best sub-cube; above
    /// it a greedy restriction path is used.
    pub subcube_cap: usize,
}

impl Default for BudgetPolicy {
    fn default() -> Self {
        BudgetPolicy {
            split_rule: SplitRule::ProportionalToMMu,
            small_side_factor: 1.0 / 16.0,
            oracle_cap: 4,
            subcube_cap: DEFAULT_SUBCUBE_CAP,
        }
    }
}

impl BudgetPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.small_side_factor > 0.0 && self.small_side_factor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "small_side_factor must lie in (0,1), got {}",
                self.small_side_factor
            )));
        }
        if self.oracle_cap > ORACLE_HARD_MAX_N {
            return Err(Error::InvalidParameter(format!(
                "oracle_cap must be at most {ORACLE_HARD_MAX_N}"
            )));
        }
        if self.subcube_cap > SUBCUBE_HARD_MAX_N {
            return Err(Error::InvalidParameter(format!(
                "subcube_cap must be at most {SUBCUBE_HARD_MAX_N}"
            )));
        }
        Ok(())
    }
}

pub const DEFAULT_SUBCUBE_CAP: usize = 12;
pub const SUBCUBE_HARD_MAX_N: usize = 16;
pub const ORACLE_HARD_MAX_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    ConstantZero,
    SubcubeBase,
    OracleBase,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub coord: usize,
    pub value: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitDecision {
    /// Split coordinate, in the root function's numbering.
    pub coord: usize,
    pub influence: Dyadic,
    pub mu0: Dyadic,
    pub mu1: Dyadic,
    #[serde(rename = "M0", with = "crate::real")]
    pub excess0: f64,
    #[serde(rename = "M1", with = "crate::real")]
    pub excess1: f64,
    pub planned_budget0: Dyadic,
    pub planned_budget1: Dyadic,
    pub granted_budget0: Dyadic,
    pub granted_budget1: Dyadic,
    /// Side approximated by constant 0 without recursing, if any.
    pub zeroed_side: Option<u8>,
}

/// One recursion node. Budgets and errors are root-scale probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceNode {
    pub path: Vec<Literal>,
    pub n: usize,
    pub mu: Dyadic,
    #[serde(rename = "M", with = "crate::real")]
    pub excess: f64,
    pub budget: Dyadic,
    pub branch: Branch,
    pub split: Option<SplitDecision>,
    pub error: Dyadic,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxResult {
    pub dnf: Dnf,
    pub error: Dyadic,
    /// Granted allowance `floor(eps * mu * 2^n) / 2^n <= eps * mu`.
    pub budget: Dyadic,
    #[serde(with = "crate::real")]
    pub eps: f64,
    pub mu: Dyadic,
    pub size: usize,
    pub width: usize,
    pub policy: BudgetPolicy,
    /// Pre-order (1-side before 0-side).
    pub trace: Vec<TraceNode>,
}

impl ApproxResult {
    pub fn certified(&self) -> bool {
        self.error <= self.budget
    }
}

/// Approximates `f` by a DNF `D` with `Pr[f != D] <= eps * mu(f)`.
pub fn approximate(f: &BooleanFunction, eps: f64, policy: &BudgetPolicy) -> Result<ApproxResult> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    policy.validate()?;
    let n = f.n();
    let budget_count = floor_mul(eps, f.count_ones());
    let mut ctx = Ctx {
        policy,
        root_n: n,
        trace: Vec::new(),
    };
    let coords: Vec<usize> = (1..=n).collect();
    let (terms, err_count) = ctx.node(f.clone(), &coords, &mut Vec::new(), budget_count)?;
    let dnf = Dnf::new(n, terms)?;
    let error = dnf_error(f, &dnf)?;
    assert_eq!(
        error,
        Dyadic::new(err_count, n as u32),
        "recursion error accounting disagrees with the exact error"
    );
    let budget = Dyadic::new(budget_count, n as u32);
    assert!(error <= budget, "certification failed: {error} > {budget}");
    Ok(ApproxResult {
        size: dnf.size(),
        width: dnf.width(),
        dnf,
        error,
        budget,
        eps,
        mu: f.measure(),
        policy: *policy,
        trace: ctx.trace,
    })
}

struct Ctx<'a> {
    policy: &'a BudgetPolicy,
    root_n: usize,
    trace: Vec<TraceNode>,
}

impl Ctx<'_> {
    fn root_scale(&self, count: u64) -> Dyadic {
        Dyadic::new(count, self.root_n as u32)
    }

    /// Returns terms over root coordinates and the disagreement count.
    fn node(
        &mut self,
        g: BooleanFunction,
        coords: &[usize],
        path: &mut Vec<Literal>,
        budget: u64,
    ) -> Result<(Vec<Term>, u64)> {
        let slot = self.trace.len();
        let ones = g.count_ones();
        let total = total_influence(&g);
        let mu = g.measure();
        self.trace.push(TraceNode {
            path: path.clone(),
            n: g.n(),
            mu,
            excess: excess(total, mu),
            budget: self.root_scale(budget),
            branch: Branch::ConstantZero,
            split: None,
            error: Dyadic::ZERO,
            size: 0,
        });
        let finish = |ctx: &mut Self, branch, split, terms: Vec<Term>, err: u64| {
            let node = &mut ctx.trace[slot];
            node.branch = branch;
            node.split = split;
            node.error = ctx_scale(ctx.root_n, err);
            node.size = terms.len();
            Ok((terms, err))
        };

        if ones <= budget {
            return finish(self, Branch::ConstantZero, None, vec![], ones);
        }

        let fit = if g.n() <= self.policy.subcube_cap {
            best_subcube_unchecked(&g)
        } else {
            greedy_subcube(&g)
        };
        if fit.error_count <= budget {
            let terms = match fit.term {
                Some(t) => vec![t.relabel(coords)?],
                None => vec![],
            };
            return finish(self, Branch::SubcubeBase, None, terms, fit.error_count);
        }

        if g.n() <= self.policy.oracle_cap {
            let (dnf, err) = oracle_search(&g, 2);
            if err <= budget {
                let terms = dnf
                    .terms()
                    .iter()
                    .map(|t| t.relabel(coords))
                    .collect::<Result<Vec<_>>>()?;
                return finish(self, Branch::OracleBase, None, terms, err);
            }
        }

        // Every function of dimension 1 is a sub-cube or constant 0, so a
        // split always has n >= 2 here.
        debug_assert!(g.n() >= 2);
        let infl = influences(&g);
        let local = max_coordinate(&infl);
        let coord = coords[local - 1];
        let g1 = g.restrict_unchecked(local - 1, true);
        let g0 = g.restrict_unchecked(local - 1, false);
        let child_coords: Vec<usize> = coords
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != local - 1)
            .map(|(_, &c)| c)
            .collect();
        let (c1, c0) = (g1.count_ones(), g0.count_ones());
        let (mu1, mu0) = (g1.measure(), g0.measure());
        let (t1, t0) = (total_influence(&g1), total_influence(&g0));
        let mut decision = SplitDecision {
            coord,
            influence: infl[local - 1],
            mu0,
            mu1,
            excess0: excess(t0, mu0),
            excess1: excess(t1, mu1),
            planned_budget0: Dyadic::ZERO,
            planned_budget1: Dyadic::ZERO,
            granted_budget0: Dyadic::ZERO,
            granted_budget1: Dyadic::ZERO,
            zeroed_side: None,
        };

        let (small_side, small_count) = if c0 <= c1 { (0u8, c0) } else { (1u8, c1) };
        let small_is_small =
            (2 * small_count) as f64 <= self.policy.small_side_factor * ones as f64;
        if small_is_small && small_count <= budget {
            let large_side = 1 - small_side;
            let large_budget = budget - small_count;
            let granted = self.root_scale(large_budget);
            let large_g = if large_side == 1 {
                decision.planned_budget1 = granted;
                decision.granted_budget1 = granted;
                g1
            } else {
                decision.planned_budget0 = granted;
                decision.granted_budget0 = granted;
                g0
            };
            decision.zeroed_side = Some(small_side);
            path.push(Literal {
                coord,
                value: large_side,
            });
            let (sub, err) = self.node(large_g, &child_coords, path, large_budget)?;
            path.pop();
            let terms = sub
                .iter()
                .map(|t| t.with_literal(coord, large_side == 1))
                .collect::<Result<Vec<_>>>()?;
            return finish(
                self,
                Branch::Split,
                Some(decision),
                terms,
                err + small_count,
            );
        }

        let (w1, w0) = match self.policy.split_rule {
            SplitRule::ProportionalToMMu => {
                let w1 = excess_times_measure(t1, mu1).max(0.0);
                let w0 = excess_times_measure(t0, mu0).max(0.0);
                if w1 + w0 > 1e-15 {
                    (w1, w0)
                } else {
                    (c1 as f64, c0 as f64)
                }
            }
            SplitRule::ProportionalToMu => (c1 as f64, c0 as f64),
            SplitRule::Equal => (1.0, 1.0),
        };
        let planned1 = ((budget as f64 * w1 / (w1 + w0)).floor() as u64).min(budget);
        let planned0 = budget - planned1;
        decision.planned_budget1 = self.root_scale(planned1);
        decision.planned_budget0 = self.root_scale(planned0);
        decision.granted_budget1 = self.root_scale(planned1);

        path.push(Literal { coord, value: 1 });
        let (sub1, err1) = self.node(g1, &child_coords, path, planned1)?;
        path.pop();
        // unused allowance of the 1-side carries over to the 0-side
        let granted0 = budget - err1;
        decision.granted_budget0 = self.root_scale(granted0);
        path.push(Literal { coord, value: 0 });
        let (sub0, err0) = self.node(g0, &child_coords, path, granted0)?;
        path.pop();

        let mut terms = Vec::with_capacity(sub1.len() + sub0.len());
        for t in &sub1 {
            terms.push(t.with_literal(coord, true)?);
        }
        for t in &sub0 {
            terms.push(t.with_literal(coord, false)?);
        }
        finish(self, Branch::Split, Some(decision), terms, err1 + err0)
    }
}

fn ctx_scale(root_n: usize, count: u64) -> Dyadic {
    Dyadic::new(count, root_n as u32)
}

/// Best single-term approximation. `term == None` is constant 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcubeFit {
    pub term: Option<Term>,
    pub error: Dyadic,
    #[serde(skip)]
    error_count: u64,
}

/// Enumerates every term (and constant 0) and returns a minimizer of
/// `Pr[f != term]`. Ties go to constant 0, then to the term whose
/// per-coordinate digit vector (0 = negated, 1 = positive, 2 = absent,
/// coordinate 1 first) is lexicographically least.
pub fn best_subcube(f: &BooleanFunction) -> Result<SubcubeFit> {
    best_subcube_with_cap(f, DEFAULT_SUBCUBE_CAP)
}

pub fn best_subcube_with_cap(f: &BooleanFunction, cap: usize) -> Result<SubcubeFit> {
    if f.n() > cap.min(SUBCUBE_HARD_MAX_N) {
        return Err(Error::CapExceeded {
            n: f.n(),
            cap: cap.min(SUBCUBE_HARD_MAX_N),
        });
    }
    Ok(best_subcube_unchecked(f))
}

fn best_subcube_unchecked(f: &BooleanFunction) -> SubcubeFit {
    let n = f.n();
    let pow3: Vec<usize> = (0..=n).map(|k| 3usize.pow(k as u32)).collect();
    let mut counts = vec![0u32; pow3[n]];
    for x in 0..f.table_len() {
        if f.get(x) {
            let t: usize = (0..n).map(|k| ((x >> k) & 1) as usize * pow3[k]).sum();
            counts[t] = 1;
        }
    }
    // digit 2 at position k: sum of the digit-0 and digit-1 entries
    for k in 0..n {
        let p = pow3[k];
        for t in 0..pow3[n] {
            if (t / p) % 3 == 2 {
                counts[t] = counts[t - 2 * p] + counts[t - p];
            }
        }
    }
    let ones = f.count_ones();
    let digits = |mut t: usize| -> Vec<u8> {
        (0..n)
            .map(|_| {
                let d = (t % 3) as u8;
                t /= 3;
                d
            })
            .collect()
    };
    let mut free = vec![0u8; pow3[n]];
    for t in 1..pow3[n] {
        free[t] = free[t / 3] + (t % 3 == 2) as u8;
    }
    let mut best_err = ones;
    let mut best: Option<usize> = None;
    for t in 0..pow3[n] {
        let size = 1u64 << free[t];
        let err = ones + size - 2 * counts[t] as u64;
        let better = match best {
            _ if err < best_err => true,
            // coordinate 1 is the least significant digit here, so compare
            // digit vectors from coordinate 1 explicitly
            Some(b) if err == best_err => digits(t) < digits(b),
            _ => false,
        };
        if better {
            best_err = err;
            best = Some(t);
        }
    }
    let term = best.map(|t| {
        let d = digits(t);
        let pos = (0..n).filter(|&k| d[k] == 1).map(|k| k + 1).collect();
        let neg = (0..n).filter(|&k| d[k] == 0).map(|k| k + 1).collect();
        Term::new(pos, neg).expect("disjoint by construction")
    });
    SubcubeFit {
        term,
        error: Dyadic::new(best_err, n as u32),
        error_count: best_err,
    }
}

/// Greedy restriction path: starting from the whole cube, repeatedly add
/// the literal that most reduces the error; compared against constant 0.
fn greedy_subcube(f: &BooleanFunction) -> SubcubeFit {
    let ones = f.count_ones();
    let n = f.n();
    let mut g = f.clone();
    let mut local: Vec<usize> = (1..=n).collect();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    let mut cur_err = (1u64 << n) - ones;
    loop {
        let size = g.table_len();
        let inside = g.count_ones();
        let mut best: Option<(u64, usize, bool)> = None;
        if g.n() == 0 || local.is_empty() {
            break;
        }
        for k in 0..g.n() {
            let hi = g
                .and(&BooleanFunction::coordinate(g.n(), k + 1).expect("in range"))
                .expect("same n")
                .count_ones();
            for (b, c) in [(true, hi), (false, inside - hi)] {
                // outside ones become misses; inside zeros are false hits
                let err = (ones - c) + (size / 2 - c);
                if err < cur_err && best.is_none_or(|(e, _, _)| err < e) {
                    best = Some((err, k, b));
                }
            }
        }
        match best {
            Some((err, k, b)) => {
                cur_err = err;
                if b {
                    pos.push(local[k]);
                } else {
                    neg.push(local[k]);
                }
                local.remove(k);
                if g.n() == 1 {
                    break;
                }
                g = g.restrict_unchecked(k, b);
            }
            None => break,
        }
    }
    let (term, err) = if ones <= cur_err {
        (None, ones)
    } else {
        (
            Some(Term::new(pos, neg).expect("disjoint by construction")),
            cur_err,
        )
    };
    SubcubeFit {
        term,
        error: Dyadic::new(err, n as u32),
        error_count: err,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCaps {
    pub max_n: usize,
    pub max_size: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_n: 4,
            max_size: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub dnf: Dnf,
    pub error: Dyadic,
    pub size_cap: usize,
}

/// Exhaustive minimum-error DNF with at most `s` terms.
pub fn best_dnf_oracle(f: &BooleanFunction, s: usize) -> Result<OracleResult> {
    best_dnf_oracle_with_caps(f, s, OracleCaps::default())
}

pub fn best_dnf_oracle_with_caps(
    f: &BooleanFunction,
    s: usize,
    caps: OracleCaps,
) -> Result<OracleResult> {
    if f.n() > caps.max_n.min(ORACLE_HARD_MAX_N) {
        return Err(Error::OracleCap(format!(
            "n = {} exceeds {}",
            f.n(),
            caps.max_n.min(ORACLE_HARD_MAX_N)
        )));
    }
    if s > caps.max_size {
        return Err(Error::OracleCap(format!(
            "size {s} exceeds {}",
            caps.max_size
        )));
    }
    let (dnf, err) = oracle_search(f, s);
    Ok(OracleResult {
        dnf,
        error: Dyadic::new(err, f.n() as u32),
        size_cap: s,
    })
}

/// All terms on `n <= 6` coordinates with their truth-table words, in
/// lexicographic digit-vector order.
fn all_terms(n: usize) -> Vec<(Term, u64)> {
    let total = 3usize.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        // coordinate 1 is the most significant ternary digit
        let mut d = vec![0u8; n];
        let mut t = idx;
        for k in (0..n).rev() {
            d[k] = (t % 3) as u8;
            t /= 3;
        }
        let pos: Vec<usize> = (0..n).filter(|&k| d[k] == 1).map(|k| k + 1).collect();
        let neg: Vec<usize> = (0..n).filter(|&k| d[k] == 0).map(|k| k + 1).collect();
        let term = Term::new(pos, neg).expect("disjoint");
        let (p, q) = term.masks();
        let mut word = 0u64;
        for x in 0..(1u64 << n) {
            if x & p == p && x & q == 0 {
                word |= 1 << x;
            }
        }
        out.push((term, word));
    }
    out
}

/// Searches sizes `0..=s` in order; within a size, term tuples in
/// lexicographic order. Returns the first minimizer.
fn oracle_search(f: &BooleanFunction, s: usize) -> (Dnf, u64) {
    let n = f.n();
    assert!(n <= ORACLE_HARD_MAX_N);
    let target = f.words()[0];
    let terms = all_terms(n);
    let mut best_err = target.count_ones() as u64;
    let mut best: Vec<usize> = vec![];
    let mut stack: Vec<usize> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        terms: &[(Term, u64)],
        target: u64,
        start: usize,
        left: usize,
        acc: u64,
        stack: &mut Vec<usize>,
        best_err: &mut u64,
        best: &mut Vec<usize>,
    ) {
        if left == 0 {
            let err = (acc ^ target).count_ones() as u64;
            if err < *best_err {
                *best_err = err;
                *best = stack.clone();
            }
            return;
        }
        for i in start..terms.len() {
            stack.push(i);
            rec(
                terms,
                target,
                i + 1,
                left - 1,
                acc | terms[i].1,
                stack,
                best_err,
                best,
            );
            stack.pop();
        }
    }
    for size in 1..=s.min(terms.len()) {
        rec(
            &terms,
            target,
            0,
            size,
            0,
            &mut stack,
            &mut best_err,
            &mut best,
        );
    }
    let dnf = Dnf::new(n, best.iter().map(|&i| terms[i].0.clone()).collect()).expect("in range");
    (dnf, best_err)
}
