//! DNF formulas: terms, exact evaluation and error, width truncation.
//!
//! Text format: terms separated by `|`, literals by `&`, negation `!`,
//! 1-based coordinates, e.g. `1&!2|2&3`. The always-true empty term is
//! written `true` and the empty DNF (constant 0) is `false`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::function::BooleanFunction;

/// An AND of literals: coordinates in `pos` must be 1, those in `neg` 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pos: Vec<usize>,
    neg: Vec<usize>,
}

impl Term {
    pub fn new(mut pos: Vec<usize>, mut neg: Vec<usize>) -> Result<Self> {
        pos.sort_unstable();
        neg.sort_unstable();
        let dup = |v: &[usize]| v.windows(2).any(|w| w[0] == w[1]);
        if dup(&pos) || dup(&neg) {
            return Err(Error::InvalidCoordinateSet("repeated literal".into()));
        }
        if pos.iter().any(|c| neg.binary_search(c).is_ok()) {
            return Err(Error::InvalidCoordinateSet(
                "a coordinate appears both positively and negatively".into(),
            ));
        }
        if pos.iter().chain(&neg).any(|&c| c == 0) {
            return Err(Error::InvalidCoordinateSet(
                "coordinates are 1-based".into(),
            ));
        }
        Ok(Term { pos, neg })
    }

    /// The always-true term (the whole cube).
    pub fn empty() -> Self {
        Term {
            pos: vec![],
            neg: vec![],
        }
    }

    /// Term from table-index masks of fixed-one and fixed-zero coordinates.
    pub fn from_masks(ones: u64, zeros: u64) -> Self {
        let coords = |m: u64| (0..64).filter(|k| m >> k & 1 == 1).map(|k| k + 1).collect();
        Term {
            pos: coords(ones),
            neg: coords(zeros),
        }
    }

    pub fn pos(&self) -> &[usize] {
        &self.pos
    }

    pub fn neg(&self) -> &[usize] {
        &self.neg
    }

    pub fn width(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    /// Largest coordinate mentioned, 0 for the empty term.
    pub fn max_coord(&self) -> usize {
        self.pos.iter().chain(&self.neg).copied().max().unwrap_or(0)
    }

    /// Table-index masks `(pos, neg)`; coordinates must be `<= 64`.
    pub fn masks(&self) -> (u64, u64) {
        let m = |v: &[usize]| v.iter().fold(0u64, |acc, &c| acc | 1 << (c - 1));
        (m(&self.pos), m(&self.neg))
    }

    pub fn eval_index(&self, x: u64) -> bool {
        let (p, q) = self.masks();
        x & p == p && x & q == 0
    }

    /// Evaluation on a point stored as little-endian coordinate words.
    pub fn eval_words(&self, x: &[u64]) -> bool {
        let bit = |c: usize| (x[(c - 1) / 64] >> ((c - 1) % 64)) & 1 == 1;
        self.pos.iter().all(|&c| bit(c)) && self.neg.iter().all(|&c| !bit(c))
    }

    /// Adds the literal `x_coord` (if `value`) or `!x_coord`.
    pub fn with_literal(&self, coord: usize, value: bool) -> Result<Self> {
        let (mut pos, mut neg) = (self.pos.clone(), self.neg.clone());
        if value {
            pos.push(coord);
        } else {
            neg.push(coord);
        }
        Term::new(pos, neg)
    }

    /// Renames coordinates through `map` (`map[c-1]` is the new name of `c`).
    pub fn relabel(&self, map: &[usize]) -> Result<Self> {
        Term::new(
            self.pos.iter().map(|&c| map[c - 1]).collect(),
            self.neg.iter().map(|&c| map[c - 1]).collect(),
        )
    }

    /// Sub-cube indicator on `{0,1}^n`.
    pub fn to_function(&self, n: usize) -> Result<BooleanFunction> {
        self.check_dim(n)?;
        let mut f = BooleanFunction::ones(n)?;
        for &c in &self.pos {
            f = f.and(&BooleanFunction::coordinate(n, c)?)?;
        }
        for &c in &self.neg {
            f = f.and(&BooleanFunction::coordinate(n, c)?.complement())?;
        }
        Ok(f)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.max_coord() > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.max_coord(),
            });
        }
        Ok(())
    }

    /// True if every point of `self` satisfies `other`.
    pub fn implies(&self, other: &Term) -> bool {
        other.pos.iter().all(|c| self.pos.binary_search(c).is_ok())
            && other.neg.iter().all(|c| self.neg.binary_search(c).is_ok())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width() == 0 {
            return write!(f, "true");
        }
        let mut lits: Vec<(usize, bool)> = self
            .pos
            .iter()
            .map(|&c| (c, true))
            .chain(self.neg.iter().map(|&c| (c, false)))
            .collect();
        lits.sort_unstable();
        let parts: Vec<String> = lits
            .into_iter()
            .map(|(c, v)| if v { c.to_string() } else { format!("!{c}") })
            .collect();
        write!(f, "{}", parts.join("&"))
    }
}

/// An ordered OR of terms over `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dnf {
    n: usize,
    terms: Vec<Term>,
}

impl Dnf {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            t.check_dim(n)?;
        }
        Ok(Dnf { n, terms })
    }

    /// The empty DNF (constant 0).
    pub fn empty(n: usize) -> Self {
        Dnf { n, terms: vec![] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of terms.
    pub fn size(&self) -> usize {
        self.terms.len()
    }

    /// Maximal term width; 0 for the empty DNF.
    pub fn width(&self) -> usize {
        self.terms.iter().map(Term::width).max().unwrap_or(0)
    }

    pub fn push(&mut self, term: Term) -> Result<()> {
        term.check_dim(self.n)?;
        self.terms.push(term);
        Ok(())
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let idx = crate::function::point_index(x);
        Ok(self.terms.iter().any(|t| t.eval_index(idx)))
    }

    pub fn eval_words(&self, x: &[u64]) -> bool {
        self.terms.iter().any(|t| t.eval_words(x))
    }

    pub fn to_function(&self) -> Result<BooleanFunction> {
        let mut f = BooleanFunction::zeros(self.n)?;
        for t in &self.terms {
            f = f.or(&t.to_function(self.n)?)?;
        }
        Ok(f)
    }

    /// Drops every term with more than `w` literals.
    pub fn truncate(&self, w: usize) -> Dnf {
        Dnf {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|t| t.width() <= w)
                .cloned()
                .collect(),
        }
    }

    /// Removes duplicate terms and terms implied by another term. Never
    /// applied implicitly.
    pub fn normalize(&self) -> Dnf {
        let mut kept: Vec<Term> = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            let absorbed = self
                .terms
                .iter()
                .enumerate()
                .any(|(j, u)| j != i && t.implies(u) && (t != u || j < i));
            if !absorbed {
                kept.push(t.clone());
            }
        }
        Dnf {
            n: self.n,
            terms: kept,
        }
    }

    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |reason: String| Error::MalformedDnf {
            text: text.to_string(),
            reason,
        };
        if text == "false" || text.is_empty() {
            return Ok(Dnf::empty(n));
        }
        let mut terms = Vec::new();
        for raw in text.split('|') {
            let raw = raw.trim();
            if raw == "true" {
                terms.push(Term::empty());
                continue;
            }
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for lit in raw.split('&') {
                let lit = lit.trim();
                let (negated, num) = match lit.strip_prefix('!') {
                    Some(r) => (true, r.trim()),
                    None => (false, lit),
                };
                let c: usize = num
                    .parse()
                    .map_err(|_| bad(format!("bad literal `{lit}`")))?;
                if c == 0 || c > n {
                    return Err(bad(format!("coordinate {c} not in 1..={n}")));
                }
                if negated {
                    neg.push(c);
                } else {
                    pos.push(c);
                }
            }
            terms.push(Term::new(pos, neg).map_err(|e| bad(e.to_string()))?);
        }
        Dnf::new(n, terms)
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "false");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// `Pr_x[f(x) != D(x)]`, exactly.
pub fn dnf_error(f: &BooleanFunction, dnf: &Dnf) -> Result<Dyadic> {
    if f.n() != dnf.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            actual: dnf.n(),
        });
    }
    Ok(Dyadic::new(f.distance(&dnf.to_function()?)?, f.n() as u32))
}

/// The truncation together with its exact disagreement and the
/// `size * 2^-w` allowance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Truncation {
    pub dnf: Dnf,
    pub disagreement: Dyadic,
    pub allowance: Dyadic,
}

impl Truncation {
    pub fn holds(&self) -> bool {
        self.disagreement <= self.allowance
    }
}

pub fn truncate_with_bound(dnf: &Dnf, w: usize) -> Result<Truncation> {
    let truncated = dnf.truncate(w);
    let disagreement = Dyadic::new(
        dnf.to_function()?.distance(&truncated.to_function()?)?,
        dnf.n() as u32,
    );
    let allowance = Dyadic::new(dnf.size() as u64, w as u32);
    Ok(Truncation {
        dnf: truncated,
        disagreement,
        allowance,
    })
}
