//! Declarative function descriptors.
//!
//! Text form is `kind:key=value,...` (for example `tribes:w=2,s=4`), or an
//! inline truth table `n=<k>:<hex>`. The JSON form is
//! `{"kind": "tribes", "params": {"w": 2, "s": 4}}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{exact_cap, BooleanFunction};
use crate::generators as gen;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum FunctionSpec {
    InlineHex {
        table: String,
    },
    Constant {
        n: usize,
        value: u8,
    },
    Subcube {
        n: usize,
        k: usize,
    },
    LexSegment {
        n: usize,
        m: u64,
    },
    Tribes {
        w: usize,
        s: usize,
    },
    DualTribes {
        w: usize,
        s: usize,
    },
    Sharpness {
        w: usize,
        l: usize,
    },
    Parity {
        n: usize,
    },
    Majority {
        n: usize,
    },
    Random {
        n: usize,
        seed: u64,
        #[serde(default = "one")]
        p_num: u64,
        #[serde(default = "two")]
        p_den: u64,
        #[serde(default)]
        monotone: bool,
    },
}

fn one() -> u64 {
    1
}

fn two() -> u64 {
    2
}

/// Largest `n` the point evaluators accept.
pub const MAX_SAMPLED_N: usize = 1 << 16;

impl FunctionSpec {
    /// Dimension of the described function.
    pub fn n(&self) -> Result<usize> {
        Ok(match self {
            FunctionSpec::InlineHex { table } => {
                let bad = || Error::MalformedSpec {
                    spec: table.clone(),
                    reason: "missing `n=<k>:` prefix".into(),
                };
                table
                    .strip_prefix("n=")
                    .and_then(|r| r.split_once(':'))
                    .and_then(|(n, _)| n.parse().ok())
                    .ok_or_else(bad)?
            }
            FunctionSpec::Constant { n, .. }
            | FunctionSpec::Subcube { n, .. }
            | FunctionSpec::LexSegment { n, .. }
            | FunctionSpec::Parity { n }
            | FunctionSpec::Majority { n }
            | FunctionSpec::Random { n, .. } => *n,
            FunctionSpec::Tribes { w, s } | FunctionSpec::DualTribes { w, s } => w
                .checked_mul(*s)
                .ok_or_else(|| Error::InvalidParameter("w*s overflows".into()))?,
            FunctionSpec::Sharpness { w, l } => gen::sharpness_dimension(*w, *l)?,
        })
    }

    /// Checks parameters against the kind without building anything.
    pub fn validate(&self) -> Result<()> {
        let n = self.n()?;
        let bad = |reason: String| Err(Error::InvalidParameter(reason));
        if n == 0 {
            return bad("n must be at least 1".into());
        }
        match self {
            FunctionSpec::InlineHex { table } => {
                BooleanFunction::from_hex(table)?;
            }
            FunctionSpec::Constant { value, .. } if *value > 1 => {
                return bad(format!("constant value {value} is not a bit"))
            }
            FunctionSpec::Subcube { n, k } if k > n => {
                return bad(format!("co-dimension {k} exceeds n = {n}"))
            }
            FunctionSpec::LexSegment { n, m } if *n >= 64 || *m > 1u64 << n => {
                return bad(format!("lex segment m = {m} out of range for n = {n}"))
            }
            FunctionSpec::Tribes { w, s } | FunctionSpec::DualTribes { w, s }
                if *w == 0 || *s == 0 =>
            {
                return bad("w and s must be positive".into())
            }
            FunctionSpec::Majority { n } if n % 2 == 0 => return bad("majority needs odd n".into()),
            FunctionSpec::Random {
                n,
                p_num,
                p_den,
                monotone,
                ..
            } => {
                if *p_den == 0 || p_num > p_den {
                    return bad("bias must satisfy 0 <= p_num <= p_den, p_den > 0".into());
                }
                if *monotone && *n > 64 {
                    return bad("random monotone functions support n <= 64".into());
                }
            }
            _ => {}
        }
        if n > MAX_SAMPLED_N {
            return bad(format!("n = {n} exceeds {MAX_SAMPLED_N}"));
        }
        Ok(())
    }

    /// Builds the exact truth table; fails with `CapExceeded` beyond the cap.
    pub fn materialize(&self) -> Result<BooleanFunction> {
        self.validate()?;
        let n = self.n()?;
        let cap = exact_cap();
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        match *self {
            FunctionSpec::InlineHex { ref table } => BooleanFunction::from_hex(table),
            FunctionSpec::Constant { n, value } => gen::constant(n, value == 1),
            FunctionSpec::Subcube { n, k } => gen::subcube(n, k),
            FunctionSpec::LexSegment { n, m } => gen::lex_segment(n, m),
            FunctionSpec::Tribes { w, s } => gen::tribes(w, s),
            FunctionSpec::DualTribes { w, s } => gen::dual_tribes(w, s),
            FunctionSpec::Sharpness { w, l } => gen::sharpness_example(w, l),
            FunctionSpec::Parity { n } => gen::parity(n),
            FunctionSpec::Majority { n } => gen::majority(n),
            FunctionSpec::Random {
                n,
                seed,
                monotone: true,
                ..
            } => gen::random_monotone(n, seed),
            FunctionSpec::Random {
                n,
                seed,
                p_num,
                p_den,
                ..
            } => gen::random_biased(n, seed, p_num, p_den),
        }
    }

    /// A table-free point evaluator, used by the sampling estimators.
    pub fn evaluator(&self) -> Result<PointFunction> {
        self.validate()?;
        let n = self.n()?;
        let kind = match *self {
            FunctionSpec::InlineHex { ref table } => {
                EvalKind::Table(BooleanFunction::from_hex(table)?)
            }
            FunctionSpec::Constant { value, .. } => EvalKind::Constant(value == 1),
            FunctionSpec::Subcube { k, .. } => EvalKind::Blocks {
                width: k.max(1),
                blocks: (k > 0) as usize,
                tail: 0,
                dual: false,
                count: k,
            },
            FunctionSpec::LexSegment { n, m } => EvalKind::Lex {
                threshold: (1u64 << n) - m,
            },
            FunctionSpec::Tribes { w, s } => EvalKind::Blocks {
                width: w,
                blocks: s,
                tail: 0,
                dual: false,
                count: w,
            },
            FunctionSpec::DualTribes { w, s } => EvalKind::Blocks {
                width: w,
                blocks: s,
                tail: 0,
                dual: true,
                count: w,
            },
            FunctionSpec::Sharpness { w, l } => EvalKind::Blocks {
                width: w,
                blocks: 1 << w,
                tail: l,
                dual: true,
                count: w,
            },
            FunctionSpec::Parity { .. } => EvalKind::Parity,
            FunctionSpec::Majority { .. } => EvalKind::Majority,
            FunctionSpec::Random {
                n,
                seed,
                monotone: true,
                ..
            } => EvalKind::Monotone(gen::random_monotone_terms(n, seed)),
            FunctionSpec::Random {
                seed, p_num, p_den, ..
            } => EvalKind::Random { seed, p_num, p_den },
        };
        Ok(PointFunction { n, kind })
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

/// Point evaluator over `{0,1}^n` for arbitrary (not table-bounded) `n`.
/// Points are little-endian words: coordinate `i` is bit `(i-1) % 64` of
/// word `(i-1) / 64`.
#[derive(Debug, Clone)]
pub struct PointFunction {
    n: usize,
    kind: EvalKind,
}

#[derive(Debug, Clone)]
enum EvalKind {
    Table(BooleanFunction),
    Constant(bool),
    /// `blocks` consecutive blocks of `count` coordinates spaced `width`
    /// apart (AND within / OR across, or the dual), then `tail` forced ones.
    Blocks {
        width: usize,
        blocks: usize,
        tail: usize,
        dual: bool,
        count: usize,
    },
    Lex {
        threshold: u64,
    },
    Parity,
    Majority,
    Monotone(Vec<Vec<usize>>),
    Random {
        seed: u64,
        p_num: u64,
        p_den: u64,
    },
}

#[inline]
fn bit(x: &[u64], i: usize) -> bool {
    (x[i / 64] >> (i % 64)) & 1 == 1
}

impl PointFunction {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words_per_point(&self) -> usize {
        self.n.div_ceil(64)
    }

    pub fn eval(&self, x: &[u64]) -> bool {
        match &self.kind {
            EvalKind::Table(f) => f.get(x[0]),
            EvalKind::Constant(v) => *v,
            EvalKind::Blocks {
                width,
                blocks,
                tail,
                dual,
                count,
            } => {
                let body = width * blocks;
                if !(body..body + tail).all(|i| bit(x, i)) {
                    return false;
                }
                let block = |b: usize| b * width..b * width + count;
                if *dual {
                    (0..*blocks).all(|b| block(b).any(|i| bit(x, i)))
                } else if *blocks == 0 {
                    true
                } else {
                    (0..*blocks).any(|b| block(b).all(|i| bit(x, i)))
                }
            }
            EvalKind::Lex { threshold } => {
                let mut rank = 0u64;
                for i in 0..self.n {
                    rank = (rank << 1) | bit(x, i) as u64;
                }
                rank >= *threshold
            }
            EvalKind::Parity => x.iter().map(|w| w.count_ones()).sum::<u32>() % 2 == 1,
            EvalKind::Majority => {
                x.iter().map(|w| w.count_ones() as usize).sum::<usize>() > self.n / 2
            }
            EvalKind::Monotone(terms) => terms.iter().any(|t| t.iter().all(|&c| bit(x, c - 1))),
            EvalKind::Random { seed, p_num, p_den } => gen::random_bit(*seed, x, *p_num, *p_den),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |reason: String| Error::MalformedSpec {
            spec: text.to_string(),
            reason,
        };
        if text.starts_with("n=") {
            let spec = FunctionSpec::InlineHex {
                table: text.to_string(),
            };
            spec.validate()?;
            return Ok(spec);
        }
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut pairs: Vec<(String, u64)> = Vec::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{item}`")))?;
            let v: u64 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("value of `{k}` is not a non-negative integer")))?;
            if pairs.iter().any(|(key, _)| key == k.trim()) {
                return Err(bad(format!("duplicate key `{k}`")));
            }
            pairs.push((k.trim().to_string(), v));
        }
        let mut take = |key: &str, default: Option<u64>| -> Result<u64> {
            match pairs.iter().position(|(k, _)| k == key) {
                Some(i) => Ok(pairs.remove(i).1),
                None => default.ok_or_else(|| bad(format!("missing parameter `{key}`"))),
            }
        };
        let spec = match kind {
            "constant" | "const" => FunctionSpec::Constant {
                n: take("n", None)? as usize,
                value: take("value", Some(0))?.min(u8::MAX as u64) as u8,
            },
            "subcube" => FunctionSpec::Subcube {
                k: take("k", None)? as usize,
                n: take("n", None)? as usize,
            },
            "lex-segment" | "lex" => FunctionSpec::LexSegment {
                n: take("n", None)? as usize,
                m: take("m", None)?,
            },
            "tribes" => FunctionSpec::Tribes {
                w: take("w", None)? as usize,
                s: take("s", None)? as usize,
            },
            "dual-tribes" => FunctionSpec::DualTribes {
                w: take("w", None)? as usize,
                s: take("s", None)? as usize,
            },
            "sharpness" => FunctionSpec::Sharpness {
                w: take("w", None)? as usize,
                l: take("l", Some(0))? as usize,
            },
            "parity" => FunctionSpec::Parity {
                n: take("n", None)? as usize,
            },
            "majority" => FunctionSpec::Majority {
                n: take("n", None)? as usize,
            },
            "random" => FunctionSpec::Random {
                n: take("n", None)? as usize,
                seed: take("seed", Some(0))?,
                p_num: take("p_num", Some(1))?,
                p_den: take("p_den", Some(2))?,
                monotone: take("monotone", Some(0))? != 0,
            },
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        if let Some((k, _)) = pairs.first() {
            return Err(bad(format!("unknown parameter `{k}` for kind `{kind}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::InlineHex { table } => write!(f, "{table}"),
            FunctionSpec::Constant { n, value } => write!(f, "constant:n={n},value={value}"),
            FunctionSpec::Subcube { n, k } => write!(f, "subcube:k={k},n={n}"),
            FunctionSpec::LexSegment { n, m } => write!(f, "lex-segment:n={n},m={m}"),
            FunctionSpec::Tribes { w, s } => write!(f, "tribes:w={w},s={s}"),
            FunctionSpec::DualTribes { w, s } => write!(f, "dual-tribes:w={w},s={s}"),
            FunctionSpec::Sharpness { w, l } => write!(f, "sharpness:w={w},l={l}"),
            FunctionSpec::Parity { n } => write!(f, "parity:n={n}"),
            FunctionSpec::Majority { n } => write!(f, "majority:n={n}"),
            FunctionSpec::Random {
                n,
                seed,
                p_num,
                p_den,
                monotone,
            } => {
                write!(f, "random:n={n},seed={seed}")?;
                if (*p_num, *p_den) != (1, 2) {
                    write!(f, ",p_num={p_num},p_den={p_den}")?;
                }
                if *monotone {
                    write!(f, ",monotone=1")?;
                }
                Ok(())
            }
        }
    }
}

impl From<&BooleanFunction> for FunctionSpec {
    fn from(f: &BooleanFunction) -> Self {
        FunctionSpec::InlineHex { table: f.to_hex() }
    }
}
