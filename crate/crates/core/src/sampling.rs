//! Monte-Carlo estimates for functions too large for an exact table.
//!
//! Each estimate is a mean of `[0,1]`-valued samples with a two-sided
//! Hoeffding radius `sqrt(ln(2/(1-confidence)) / (2 * samples))` (scaled by
//! `n` for total influence). Samples are drawn in fixed-size batches with
//! per-batch seeds, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dnf::Dnf;
use crate::error::{Error, Result};
use crate::function::check_coord;
use crate::spec::{FunctionSpec, PointFunction};

pub const DEFAULT_CONFIDENCE: f64 = 0.999;
const BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(with = "crate::real")]
    pub value: f64,
    #[serde(with = "crate::real")]
    pub half_width: f64,
    pub samples: u64,
    #[serde(with = "crate::real")]
    pub confidence: f64,
    pub seed: u64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.half_width
    }
}

/// Hoeffding radius for the mean of `samples` values in `[0,1]`.
pub fn hoeffding_half_width(samples: u64, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub samples: u64,
    pub seed: u64,
    #[serde(with = "crate::real")]
    pub confidence: f64,
}

impl SampleConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        SampleConfig {
            samples,
            seed,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be positive".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(
                "confidence must lie in (0,1)".into(),
            ));
        }
        Ok(())
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, buf: &mut [u64]) {
    for (i, w) in buf.iter_mut().enumerate() {
        let bits = (n - 64 * i).min(64);
        *w = if bits == 64 {
            rng.random()
        } else {
            rng.random::<u64>() & ((1u64 << bits) - 1)
        };
    }
}

/// Sums `trial` over `samples` draws; `trial` gets a fresh uniform point.
fn run<F>(f: &PointFunction, cfg: &SampleConfig, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng, &mut [u64]) -> bool + Sync,
{
    let batches = cfg.samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(cfg.seed, b);
            let mut buf = vec![0u64; f.words_per_point()];
            let count = BATCH.min(cfg.samples - b * BATCH);
            let mut hits = 0u64;
            for _ in 0..count {
                random_point(&mut rng, f.n(), &mut buf);
                hits += trial(&mut rng, &mut buf) as u64;
            }
            hits
        })
        .sum()
}

fn finish(hits: u64, cfg: &SampleConfig, scale: f64) -> Estimate {
    Estimate {
        value: scale * hits as f64 / cfg.samples as f64,
        half_width: scale * hoeffding_half_width(cfg.samples, cfg.confidence),
        samples: cfg.samples,
        confidence: cfg.confidence,
        seed: cfg.seed,
    }
}

#[inline]
fn flip(x: &mut [u64], k: usize) {
    x[k / 64] ^= 1 << (k % 64);
}

pub fn estimate_measure(spec: &FunctionSpec, cfg: &SampleConfig) -> Result<Estimate> {
    cfg.validate()?;
    let f = spec.evaluator()?;
    let hits = run(&f, cfg, |_, x| f.eval(x));
    Ok(finish(hits, cfg, 1.0))
}

/// Estimates `I_k` (1-based `k`).
pub fn estimate_influence(spec: &FunctionSpec, k: usize, cfg: &SampleConfig) -> Result<Estimate> {
    cfg.validate()?;
    let f = spec.evaluator()?;
    check_coord(k, f.n())?;
    let hits = run(&f, cfg, |_, x| {
        let a = f.eval(x);
        flip(x, k - 1);
        a != f.eval(x)
    });
    Ok(finish(hits, cfg, 1.0))
}

/// `n * Pr[f(x) != f(x ^ e_k)]` over uniform `(x, k)`.
pub fn estimate_total_influence(spec: &FunctionSpec, cfg: &SampleConfig) -> Result<Estimate> {
    cfg.validate()?;
    let f = spec.evaluator()?;
    let n = f.n();
    let hits = run(&f, cfg, |rng, x| {
        let k = rng.random_range(0..n);
        let a = f.eval(x);
        flip(x, k);
        a != f.eval(x)
    });
    Ok(finish(hits, cfg, n as f64))
}

/// `Pr[f(x) != D(x)]`.
pub fn estimate_dnf_error(spec: &FunctionSpec, dnf: &Dnf, cfg: &SampleConfig) -> Result<Estimate> {
    cfg.validate()?;
    let f = spec.evaluator()?;
    if dnf.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            actual: dnf.n(),
        });
    }
    let hits = run(&f, cfg, |_, x| f.eval(x) != dnf.eval_words(x));
    Ok(finish(hits, cfg, 1.0))
}
