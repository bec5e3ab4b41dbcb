//! Bound-verification sweeps over families of functions.
//!
//! A sweep materializes every function of a family, runs the requested
//! checks, and produces one CSV row per function plus a JSON summary with
//! extremal ratios, witnesses and empirical constant estimates. Rows are
//! ordered by function index regardless of scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{approximate, BudgetPolicy};
use crate::dnf::{dnf_error, truncate_with_bound};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::generators::splitmix64;
use crate::influence::{
    self, decomposition_check, excess_times_measure, influences, report, split_gain,
    total_influence, InfluenceReport, IsoComparison,
};
use crate::real::format_real;
use crate::shifting::compress_pipeline;
use crate::spec::FunctionSpec;

pub const SCHEMA_VERSION: u32 = 1;
pub const EXHAUSTIVE_MAX_N: usize = 4;
pub const KKL_TOLERANCE: f64 = 1e-9;
pub const SMALL_SIDE_TOLERANCE: f64 = 1e-9;
const MAX_FAILURES: usize = 100;
const INLINE_TABLE_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Iso,
    Kkl,
    Infind,
    Compression,
    SmallSide,
    Truncation,
    ApproxCert,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Iso,
        Check::Kkl,
        Check::Infind,
        Check::Compression,
        Check::SmallSide,
        Check::Truncation,
        Check::ApproxCert,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Iso => "iso",
            Check::Kkl => "kkl",
            Check::Infind => "infind",
            Check::Compression => "compression",
            Check::SmallSide => "small-side",
            Check::Truncation => "truncation",
            Check::ApproxCert => "approx-cert",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = match s.trim() {
            "lemma6" => "compression",
            "lemma12" => "small-side",
            "lemma14" => "truncation",
            other => other,
        };
        Check::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check `{s}`")))
    }
}

pub fn parse_checks(text: &str) -> Result<Vec<Check>> {
    let mut v: Vec<Check> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    v.sort();
    v.dedup();
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Every function on `{0,1}^n`.
    ExhaustiveN,
    /// `count` seeded random functions.
    Random,
    /// An explicit list of function specs.
    GeneratorGrid,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive-n" | "exhaustive" => Ok(Family::ExhaustiveN),
            "random" => Ok(Family::Random),
            "generator-grid" | "grid" => Ok(Family::GeneratorGrid),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: Family,
    /// Dimension (exhaustive), or largest dimension (random).
    pub n: usize,
    /// Smallest dimension for the random family; defaults to `n`.
    pub n_min: Option<usize>,
    pub count: u64,
    pub seed: u64,
    /// Random family only: draw each function with density `2^-j` for a
    /// seeded `j` instead of 1/2.
    pub biased: bool,
    pub grid: Vec<String>,
    pub checks: Vec<Check>,
    pub eps: Vec<f64>,
    pub policy: BudgetPolicy,
    /// Worker threads; 0 uses the global pool.
    pub parallelism: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            family: Family::ExhaustiveN,
            n: 3,
            n_min: None,
            count: 1000,
            seed: 0,
            biased: false,
            grid: vec![],
            checks: vec![Check::Iso, Check::Kkl, Check::Infind],
            eps: vec![0.05, 0.1, 0.2, 0.5],
            policy: BudgetPolicy::default(),
            parallelism: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::ExhaustiveN if self.n == 0 || self.n > EXHAUSTIVE_MAX_N => {
                return Err(Error::InvalidParameter(format!(
                    "exhaustive sweeps support 1 <= n <= {EXHAUSTIVE_MAX_N}"
                )))
            }
            Family::Random if self.n == 0 || self.n_min.is_some_and(|m| m == 0 || m > self.n) => {
                return Err(Error::InvalidParameter(
                    "random sweeps need 1 <= n_min <= n".into(),
                ))
            }
            Family::GeneratorGrid if self.grid.is_empty() => {
                return Err(Error::InvalidParameter("generator grid is empty".into()))
            }
            _ => {}
        }
        if self.checks.contains(&Check::ApproxCert) && self.eps.is_empty() {
            return Err(Error::InvalidParameter(
                "approx-cert needs at least one eps".into(),
            ));
        }
        if self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidParameter(
                "eps values must be positive".into(),
            ));
        }
        self.policy.validate()
    }

    pub fn item_count(&self) -> u64 {
        match self.family {
            Family::ExhaustiveN => 1u64 << (1u64 << self.n),
            Family::Random => self.count,
            Family::GeneratorGrid => self.grid.len() as u64,
        }
    }

    /// Function number `index` with its reproducer spec.
    pub fn item(&self, index: u64) -> Result<(FunctionSpec, BooleanFunction)> {
        let spec = match self.family {
            Family::ExhaustiveN => {
                let f = BooleanFunction::from_words(self.n, vec![index])?;
                FunctionSpec::from(&f)
            }
            Family::Random => {
                let s = splitmix64(self.seed ^ splitmix64(index));
                let lo = self.n_min.unwrap_or(self.n);
                let n = lo + (s % (self.n - lo + 1) as u64) as usize;
                let (p_num, p_den) = if self.biased {
                    (1, 1u64 << (1 + (s >> 32) % (n as u64 / 2).max(1)))
                } else {
                    (1, 2)
                };
                FunctionSpec::Random {
                    n,
                    seed: s,
                    p_num,
                    p_den,
                    monotone: false,
                }
            }
            Family::GeneratorGrid => FunctionSpec::parse(&self.grid[index as usize])?,
        };
        let f = spec.materialize()?;
        Ok((spec, f))
    }
}

fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

/// One CSV row. Check columns are `pass`, `fail`, or empty when the check
/// was not requested or does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub schema_version: u32,
    pub index: u64,
    pub spec: String,
    pub table: String,
    pub n: usize,
    pub mu: String,
    pub total_influence: String,
    #[serde(rename = "M")]
    pub excess: String,
    pub iso: Option<String>,
    pub iso_equal: Option<bool>,
    pub is_subcube: Option<bool>,
    pub kkl: Option<String>,
    pub kkl_bound: Option<String>,
    pub max_influence: String,
    pub infind: Option<String>,
    pub compression: Option<String>,
    pub small_side: Option<String>,
    pub split_gain: Option<String>,
    pub small_side_bound: Option<String>,
    pub medium_ratio: Option<String>,
    pub truncation: Option<String>,
    pub approx_cert: Option<String>,
    pub approx_sizes: Option<String>,
}

impl FunctionRecord {
    pub fn verdicts(&self) -> Vec<(Check, &str)> {
        let cols = [
            (Check::Iso, &self.iso),
            (Check::Kkl, &self.kkl),
            (Check::Infind, &self.infind),
            (Check::Compression, &self.compression),
            (Check::SmallSide, &self.small_side),
            (Check::Truncation, &self.truncation),
            (Check::ApproxCert, &self.approx_cert),
        ];
        cols.into_iter()
            .filter_map(|(c, v)| v.as_deref().map(|v| (c, v)))
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| *v == "pass")
    }

    /// The reproducer: the inline table when available, else the spec.
    pub fn reproducer(&self) -> &str {
        if self.table.is_empty() {
            &self.spec
        } else {
            &self.table
        }
    }
}

/// Numeric by-products of the checks, used for the summary.
#[derive(Debug, Clone, Default)]
struct Metrics {
    iso_equal_nonconstant: bool,
    kkl_ratio: Option<f64>,
    small_side_slack: Option<f64>,
    medium_ratio: Option<f64>,
    /// `(M / delta, log2(max I / mu), C_1 needed)`.
    max_influence: Option<(f64, f64, f64)>,
    /// Per eps: `Some(mu_small / mu)` if the small-side accounting fails.
    accounting_failures: Vec<Option<f64>>,
    approx_sizes: Vec<usize>,
    failures: Vec<(Check, String)>,
}

fn check_function(
    cfg: &SweepConfig,
    index: u64,
    spec: &FunctionSpec,
    f: &BooleanFunction,
) -> Result<(FunctionRecord, Metrics)> {
    let rep = report(f);
    let mut m = Metrics::default();
    let mut rec = FunctionRecord {
        schema_version: SCHEMA_VERSION,
        index,
        spec: spec.to_string(),
        table: if f.n() <= INLINE_TABLE_MAX_N {
            f.to_hex()
        } else {
            String::new()
        },
        n: f.n(),
        mu: rep.mu.to_string(),
        total_influence: rep.total.to_string(),
        excess: format_real(rep.excess),
        iso: None,
        iso_equal: None,
        is_subcube: None,
        kkl: None,
        kkl_bound: None,
        max_influence: rep.max_influence.to_string(),
        infind: None,
        compression: None,
        small_side: None,
        split_gain: None,
        small_side_bound: None,
        medium_ratio: None,
        truncation: None,
        approx_cert: None,
        approx_sizes: None,
    };
    for &check in &cfg.checks {
        let outcome: Option<(bool, String)> = match check {
            Check::Iso => Some(iso_check(&rep, &mut rec, &mut m)),
            Check::Kkl => rep.kkl_bound.map(|b| {
                rec.kkl_bound = Some(format_real(b));
                m.kkl_ratio = Some(rep.max_influence.to_f64() / b);
                (
                    rep.kkl_holds(KKL_TOLERANCE),
                    format!("max I_k = {} vs bound {b}", rep.max_influence),
                )
            }),
            Check::Infind => (f.n() >= 2).then(|| infind_check(f)).transpose()?,
            Check::Compression => (2 * f.count_ones() <= f.table_len())
                .then(|| compression_check(f, &rep))
                .transpose()?,
            Check::SmallSide => small_side_check(f, &rep, &mut rec, &mut m)?,
            Check::Truncation => Some(truncation_check(f, cfg)?),
            Check::ApproxCert => Some(approx_check(f, cfg, &mut rec, &mut m)?),
        };
        if let Some((ok, detail)) = outcome {
            let col = Some(verdict(ok));
            match check {
                Check::Iso => rec.iso = col,
                Check::Kkl => rec.kkl = col,
                Check::Infind => rec.infind = col,
                Check::Compression => rec.compression = col,
                Check::SmallSide => rec.small_side = col,
                Check::Truncation => rec.truncation = col,
                Check::ApproxCert => rec.approx_cert = col,
            }
            if !ok {
                m.failures.push((check, detail));
            }
        }
    }
    constant_estimates(f, &rep, cfg, &mut m)?;
    Ok((rec, m))
}

fn iso_check(rep: &InfluenceReport, rec: &mut FunctionRecord, m: &mut Metrics) -> (bool, String) {
    let equal = rep.iso == IsoComparison::Equal;
    let comp_ok = rep.mu.is_zero()
        || rep.total.to_f64() >= rep.iso_bound_complement - influence::ISO_TOLERANCE;
    // equality exactly on sub-cubes; constant 0 is the degenerate equality case
    let eq_ok = rep.mu.is_zero() || equal == rep.is_subcube;
    rec.iso_equal = Some(equal);
    rec.is_subcube = Some(rep.is_subcube);
    m.iso_equal_nonconstant = equal && !rep.degenerate;
    let ok = rep.iso != IsoComparison::Violated && comp_ok && eq_ok;
    (
        ok,
        format!(
            "I = {}, bound = {}, equal = {equal}, subcube = {}",
            rep.total, rep.iso_bound, rep.is_subcube
        ),
    )
}

fn infind_check(f: &BooleanFunction) -> Result<(bool, String)> {
    for i in 1..=f.n() {
        let (lhs, rhs) = decomposition_check(f, i)?;
        if lhs != rhs {
            return Ok((false, format!("coordinate {i}: {lhs} != {rhs}")));
        }
    }
    Ok((true, String::new()))
}

fn compression_check(f: &BooleanFunction, rep: &InfluenceReport) -> Result<(bool, String)> {
    let stages = compress_pipeline(f)?;
    let mu = f.measure();
    for (k, st) in stages.iter().enumerate() {
        if st.function.measure() != mu {
            return Ok((false, format!("stage {k} changed the measure")));
        }
    }
    let last = &stages.last().expect("n+1 stages").function;
    let after = influences(last);
    for i in 2..=f.n() {
        if after[i - 1] > rep.per_coord[i - 1] {
            return Ok((
                false,
                format!(
                    "I_{i} grew from {} to {}",
                    rep.per_coord[i - 1],
                    after[i - 1]
                ),
            ));
        }
    }
    let total_after: Dyadic = after.iter().copied().sum();
    if total_after > rep.total {
        return Ok((
            false,
            format!("total influence grew from {} to {total_after}", rep.total),
        ));
    }
    if f.n() >= 2 && !last.restrict(1, false)?.is_zero() || f.n() == 1 && last.get(0) {
        return Ok((false, "final stage is not zero on the x_1 = 0 half".into()));
    }
    Ok((true, String::new()))
}

fn small_side_check(
    f: &BooleanFunction,
    rep: &InfluenceReport,
    rec: &mut FunctionRecord,
    m: &mut Metrics,
) -> Result<Option<(bool, String)>> {
    if f.n() < 2 {
        return Ok(None);
    }
    let g = split_gain(f, rep.max_coord)?;
    let nonconstant = |mu: Dyadic| !mu.is_zero() && mu != Dyadic::ONE;
    if !(nonconstant(g.mu0) && nonconstant(g.mu1)) {
        return Ok(None);
    }
    rec.split_gain = Some(format_real(g.gain));
    rec.small_side_bound = Some(format_real(g.small_side_bound));
    rec.medium_ratio = g.medium_ratio.map(format_real);
    m.small_side_slack = Some(g.gain - g.small_side_bound);
    m.medium_ratio = g.medium_ratio;
    Ok(Some((
        g.small_side_holds(SMALL_SIDE_TOLERANCE),
        format!(
            "gain {} < bound {} at coordinate {}",
            g.gain, g.small_side_bound, g.coord
        ),
    )))
}

fn truncation_check(f: &BooleanFunction, cfg: &SweepConfig) -> Result<(bool, String)> {
    let eps = cfg.eps.first().copied().unwrap_or(0.1);
    let dnf = approximate(f, eps, &cfg.policy)?.dnf;
    for w in 0..=dnf.width() {
        let t = truncate_with_bound(&dnf, w)?;
        if !t.holds() {
            return Ok((
                false,
                format!("w = {w}: disagreement {} > {}", t.disagreement, t.allowance),
            ));
        }
    }
    Ok((true, String::new()))
}

fn approx_check(
    f: &BooleanFunction,
    cfg: &SweepConfig,
    rec: &mut FunctionRecord,
    m: &mut Metrics,
) -> Result<(bool, String)> {
    let mut sizes = Vec::new();
    for &eps in &cfg.eps {
        let r = approximate(f, eps, &cfg.policy)?;
        let exact = dnf_error(f, &r.dnf)?;
        sizes.push(r.size);
        let allowed = r.mu.to_f64() * eps;
        if exact != r.error
            || !r.certified()
            || exact.cmp_f64(eps * r.mu.to_f64()).is_gt() && exact.to_f64() > allowed
        {
            return Ok((
                false,
                format!("eps = {eps}: error {exact} exceeds {}", r.budget),
            ));
        }
    }
    rec.approx_sizes = Some(
        sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    );
    m.approx_sizes = sizes;
    Ok((true, String::new()))
}

/// Empirical quantities attached to the existential constants: the `C_1`
/// needed for the max-influence lower bound with `delta = 1 - mu`, and for
/// each eps whether the small-side accounting `eps M_1 mu_1 / 2 + mu_0 / 2
/// <= eps M mu` closes at the max-influence split.
fn constant_estimates(
    f: &BooleanFunction,
    rep: &InfluenceReport,
    cfg: &SweepConfig,
    m: &mut Metrics,
) -> Result<()> {
    if rep.degenerate {
        return Ok(());
    }
    let mu = rep.mu.to_f64();
    let delta = 1.0 - mu;
    let log_ratio = (rep.max_influence.to_f64() / mu).log2();
    if rep.excess > 1e-12 {
        let x = rep.excess / delta;
        m.max_influence = Some((x, log_ratio, -log_ratio / x));
    }
    if f.n() < 2 {
        return Ok(());
    }
    let i = rep.max_coord;
    let f1 = f.restrict(i, true)?;
    let f0 = f.restrict(i, false)?;
    let (mu1, mu0) = (f1.measure(), f0.measure());
    let (small, large, large_f) = if mu0 <= mu1 {
        (mu0, mu1, &f1)
    } else {
        (mu1, mu0, &f0)
    };
    let m_mu = excess_times_measure(rep.total, rep.mu);
    let large_m_mu = excess_times_measure(total_influence(large_f), large);
    for &eps in &cfg.eps {
        let lhs = 0.5 * eps * large_m_mu + 0.5 * small.to_f64();
        let fails = lhs > eps * m_mu + 1e-12;
        m.accounting_failures
            .push(fails.then(|| small.to_f64() / mu));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub checked: u64,
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub index: u64,
    pub check: Check,
    /// Reproducer: inline table, or the generator spec.
    pub spec: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    #[serde(with = "crate::real")]
    pub value: f64,
    pub index: u64,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(with = "crate::real")]
    pub m_over_delta_max: f64,
    #[serde(with = "crate::real")]
    pub min_log2_max_influence_over_mu: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSideThreshold {
    #[serde(with = "crate::real")]
    pub eps: f64,
    /// Accounting closes for every function with `mu_small / mu` below
    /// this; `None` if it never failed.
    #[serde(with = "crate::real::option")]
    pub threshold: Option<f64>,
    /// `-eps * log2(threshold)`, the matching constant in `2^(-C/eps)`.
    #[serde(with = "crate::real::option")]
    pub constant: Option<f64>,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSizeStats {
    #[serde(with = "crate::real")]
    pub eps: f64,
    pub max_size: usize,
    #[serde(with = "crate::real")]
    pub mean_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub functions: u64,
    pub all_passed: bool,
    pub checks: BTreeMap<String, CheckTally>,
    pub failures: Vec<FailureRecord>,
    /// Non-constant functions with exact isoperimetric equality.
    pub iso_equality_count: u64,
    pub kkl_min_ratio: Option<Extremum>,
    pub small_side_min_slack: Option<Extremum>,
    /// Smallest `gain / min(I_i, mu_0, mu_1)` observed (estimate of `c`).
    pub medium_split_min_ratio: Option<Extremum>,
    /// Largest `C_1` needed for `max I_k >= 2^(-C_1 M / delta) mu`.
    pub max_influence_c1_estimate: Option<Extremum>,
    pub max_influence_curve: Vec<CurvePoint>,
    pub small_side_thresholds: Vec<SmallSideThreshold>,
    pub approx_sizes: Vec<ApproxSizeStats>,
}

pub struct SweepOutput {
    pub records: Vec<FunctionRecord>,
    pub summary: SweepSummary,
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let work = || -> Result<Vec<(FunctionRecord, Metrics)>> {
        (0..cfg.item_count())
            .into_par_iter()
            .map(|i| {
                let (spec, f) = cfg.item(i)?;
                check_function(cfg, i, &spec, &f)
            })
            .collect()
    };
    let rows = if cfg.parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };
    let summary = summarize(cfg, &rows);
    Ok(SweepOutput {
        records: rows.into_iter().map(|(r, _)| r).collect(),
        summary,
    })
}

fn keep_min(slot: &mut Option<Extremum>, value: Option<f64>, rec: &FunctionRecord) {
    if let Some(v) = value {
        if slot.as_ref().is_none_or(|e| v < e.value) {
            *slot = Some(Extremum {
                value: v,
                index: rec.index,
                witness: rec.reproducer().to_string(),
            });
        }
    }
}

fn summarize(cfg: &SweepConfig, rows: &[(FunctionRecord, Metrics)]) -> SweepSummary {
    let mut checks: BTreeMap<String, CheckTally> = cfg
        .checks
        .iter()
        .map(|c| {
            (
                c.to_string(),
                CheckTally {
                    checked: 0,
                    passed: 0,
                    failed: 0,
                },
            )
        })
        .collect();
    let mut failures = Vec::new();
    let mut kkl = None;
    let mut slack = None;
    let mut l11 = None;
    let mut c1: Option<Extremum> = None;
    let mut curve: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
    let mut thresholds: Vec<(Option<f64>, u64)> = vec![(None, 0); cfg.eps.len()];
    let mut sizes: Vec<(usize, u64, u64)> = vec![(0, 0, 0); cfg.eps.len()];
    let mut iso_equal = 0;
    for (rec, m) in rows {
        for (check, v) in rec.verdicts() {
            let t = checks.get_mut(check.name()).expect("requested check");
            t.checked += 1;
            if v == "pass" {
                t.passed += 1;
            } else {
                t.failed += 1;
            }
        }
        for (check, detail) in &m.failures {
            if failures.len() < MAX_FAILURES {
                failures.push(FailureRecord {
                    index: rec.index,
                    check: *check,
                    spec: rec.reproducer().to_string(),
                    detail: detail.clone(),
                });
            }
        }
        iso_equal += m.iso_equal_nonconstant as u64;
        keep_min(&mut kkl, m.kkl_ratio, rec);
        keep_min(&mut slack, m.small_side_slack, rec);
        keep_min(&mut l11, m.medium_ratio, rec);
        if let Some((x, log_ratio, needed)) = m.max_influence {
            // negated so that keep_min tracks the maximum
            keep_min(&mut c1, Some(-needed), rec);
            let bucket = (x * 2.0).ceil() as i64;
            let e = curve.entry(bucket).or_insert((f64::INFINITY, 0));
            e.0 = e.0.min(log_ratio);
            e.1 += 1;
        }
        for (k, fail) in m.accounting_failures.iter().enumerate() {
            if let Some(r) = fail {
                let t = &mut thresholds[k];
                t.0 = Some(t.0.map_or(*r, |v: f64| v.min(*r)));
                t.1 += 1;
            }
        }
        for (k, &s) in m.approx_sizes.iter().enumerate() {
            let e = &mut sizes[k];
            e.0 = e.0.max(s);
            e.1 += s as u64;
            e.2 += 1;
        }
    }
    if let Some(e) = c1.as_mut() {
        e.value = -e.value;
    }
    let total_failed: u64 = checks.values().map(|t| t.failed).sum();
    SweepSummary {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        functions: rows.len() as u64,
        all_passed: total_failed == 0,
        checks,
        failures,
        iso_equality_count: iso_equal,
        kkl_min_ratio: kkl,
        small_side_min_slack: slack,
        medium_split_min_ratio: l11,
        max_influence_c1_estimate: c1,
        max_influence_curve: curve
            .into_iter()
            .map(|(b, (v, c))| CurvePoint {
                m_over_delta_max: b as f64 / 2.0,
                min_log2_max_influence_over_mu: v,
                count: c,
            })
            .collect(),
        small_side_thresholds: cfg
            .eps
            .iter()
            .zip(thresholds)
            .map(|(&eps, (t, failures))| SmallSideThreshold {
                eps,
                threshold: t,
                constant: t.map(|t| -eps * t.log2()),
                failures,
            })
            .collect(),
        approx_sizes: if cfg.checks.contains(&Check::ApproxCert) {
            cfg.eps
                .iter()
                .zip(sizes)
                .map(|(&eps, (max, sum, cnt))| ApproxSizeStats {
                    eps,
                    max_size: max,
                    mean_size: if cnt == 0 {
                        0.0
                    } else {
                        sum as f64 / cnt as f64
                    },
                })
                .collect()
        } else {
            vec![]
        },
    }
}

pub fn write_csv<W: Write>(records: &[FunctionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<FunctionRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::InvalidParameter(format!("csv: {e}"))))
        .collect()
}
