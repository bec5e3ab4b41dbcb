//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line to
//! stderr.

mod common;

use std::time::Duration;

use common::*;
use cubelab::approx::{approximate, best_dnf_oracle, BudgetPolicy};
use cubelab::dnf::{truncate_with_bound, Dnf, Term};
use cubelab::generators::{dual_tribes, majority, sharpness_example};
use cubelab::influence::{decomposition_check, influences, report, split_gain, IsoComparison};
use cubelab::sampling::{estimate_measure, SampleConfig};
use cubelab::sweep::{self, Check, Family, SweepConfig, SweepSummary};
use cubelab::{compress_pipeline, BooleanFunction, FunctionSpec};
use rand::Rng;
use rayon::prelude::*;

const EPS: [f64; 4] = [0.05, 0.1, 0.2, 0.5];

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn n4(table: u64) -> BooleanFunction {
    BooleanFunction::from_words(4, vec![table]).unwrap()
}

/// Sub-cube indicator test by scanning all `3^n` terms.
fn is_subcube_by_scan(f: &BooleanFunction) -> bool {
    let n = f.n();
    (0..3u64.pow(n as u32)).any(|mut code| {
        let (mut pos, mut neg) = (vec![], vec![]);
        for i in 1..=n {
            match code % 3 {
                0 => neg.push(i),
                1 => pos.push(i),
                _ => {}
            }
            code /= 3;
        }
        (0..f.table_len()).all(|x| f.get(x) == term_holds(&pos, &neg, x))
    })
}

#[test]
fn c01_isoperimetry_n4() {
    let c = Criterion::start(1, "edge isoperimetry, all n=4 functions");
    let rows: Vec<(bool, bool, bool)> = (0..1u64 << 16)
        .into_par_iter()
        .map(|t| {
            let f = n4(t);
            let ones = ones(&f);
            let total = total_count(&f);
            if ones == 0 || ones == 16 {
                // constants: 0 = 0 and 0 = 2 * 1 * log2(1), reported as degenerate
                return (total == 0, false, true);
            }
            // I = total/16, mu = ones/16
            let (holds, equal) = if ones.is_power_of_two() {
                let k = 16u64.trailing_zeros() as u64 - ones.trailing_zeros() as u64;
                (total >= 2 * k * ones, total == 2 * k * ones)
            } else {
                let mu = ones as f64 / 16.0;
                let bound = 2.0 * mu * (1.0 / mu).log2();
                (total as f64 / 16.0 > bound + 1e-12, false)
            };
            let lib = report(&f).iso;
            let agrees = match lib {
                IsoComparison::Equal => equal,
                IsoComparison::Strict => holds && !equal,
                IsoComparison::Violated => !holds,
            };
            (
                holds && agrees && equal == is_subcube_by_scan(&f),
                equal,
                agrees,
            )
        })
        .collect();
    let ok_all = rows.iter().all(|r| r.0);
    let equal = rows.iter().filter(|r| r.1).count();
    c.finish(
        ok_all && equal == 80,
        secs(10),
        &format!(
            "{} functions, {equal} equality cases among non-constant functions (expected 80)",
            rows.len()
        ),
    );
}

fn kkl_bound(total: f64, mu: f64) -> f64 {
    let t = total / (4.0 * mu * (1.0 - mu));
    9.0 / (t * t) * 9f64.powf(-t)
}

#[test]
fn c02_kkl() {
    let c = Criterion::start(2, "KKL lower bound");
    let small_ok = (1..(1u64 << 16) - 1).into_par_iter().all(|t| {
        let f = n4(t);
        let counts = flip_counts(&f);
        let mu = ones(&f) as f64 / 16.0;
        let total = counts.iter().sum::<u64>() as f64 / 16.0;
        let max = *counts.iter().max().unwrap() as f64 / 16.0;
        let b = kkl_bound(total, mu);
        let lib = report(&f).kkl_bound.unwrap();
        max >= b - 1e-9 && (lib - b).abs() <= 1e-12
    });
    let large: Vec<(bool, f64)> = (0..100_000u64)
        .into_par_iter()
        .map(|seed| {
            let mut r = rng(0xc02 ^ seed << 8);
            let f = mixed_table(&mut r, 12);
            let o = ones(&f);
            if o == 0 || o == f.table_len() {
                return (true, f64::INFINITY);
            }
            let inf = influences(&f);
            if seed < 200 {
                let naive = flip_counts(&f);
                assert!(inf.iter().zip(&naive).all(|(a, &b)| *a == dyadic(b, 12)));
            }
            let total: f64 = inf.iter().map(|d| d.to_f64()).sum();
            let max = inf.iter().map(|d| d.to_f64()).fold(0.0, f64::max);
            let b = kkl_bound(total, o as f64 / 4096.0);
            (max >= b - 1e-9, max / b)
        })
        .collect();
    let large_ok = large.iter().all(|r| r.0);
    let min_ratio = large.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let maj = report(&majority(3).unwrap());
    let spot = maj.kkl_bound.unwrap();
    let spot_ok = (spot - 4.0 / 27.0).abs() <= 1e-9 && maj.max_influence.to_f64() == 0.5;
    c.finish(
        small_ok && large_ok && spot_ok,
        secs(60),
        &format!("n=4 exhaustive ok={small_ok}; 1e5 random n=12 ok={large_ok} (min max/bound {min_ratio:.3e}); majority-3 bound {spot:.6}"),
    );
}

#[test]
fn c03_restriction_identity() {
    let c = Criterion::start(3, "influence restriction identity");
    let ok = (0..10_000u64).into_par_iter().all(|seed| {
        let mut r = rng(0xc03 ^ seed << 8);
        let n = r.random_range(2..=12);
        let i = r.random_range(1..=n);
        let f = mixed_table(&mut r, n);
        let t = total_count(&f);
        let t1 = total_count(&restrict(&f, i, true));
        let t0 = total_count(&restrict(&f, i, false));
        let ci = flip_counts(&f)[i - 1];
        // scaled by 2^n: I = t, (I(f1) + I(f0)) / 2 = t1 + t0, I_i = ci
        let (lhs, rhs) = decomposition_check(&f, i).unwrap();
        t == t1 + t0 + ci && lhs == dyadic(t, n) && rhs == lhs
    });
    c.finish(ok, secs(30), "10^4 random (f, i), n <= 12, exact");
}

fn pipeline_ok(f: &BooleanFunction) -> bool {
    let n = f.n();
    let before = flip_counts(f);
    let o = ones(f);
    let stages = compress_pipeline(f).unwrap();
    if stages.len() != n + 1 || stages.iter().any(|s| ones(&s.function) != o) {
        return false;
    }
    let last = &stages[n].function;
    let after = flip_counts(last);
    (1..n).all(|k| after[k] <= before[k])
        && after.iter().sum::<u64>() <= before.iter().sum::<u64>()
        && (0..last.table_len()).all(|x| x & 1 == 1 || !last.get(x))
}

#[test]
fn c04_compression_pipeline() {
    let c = Criterion::start(4, "compression pipeline");
    let exhaustive: Vec<bool> = (0..1u64 << 16)
        .into_par_iter()
        .filter(|&t| t.count_ones() <= 8)
        .map(|t| pipeline_ok(&n4(t)))
        .collect();
    let random_ok = (0..10_000u64).into_par_iter().all(|seed| {
        let mut r = rng(0xc04 ^ seed << 8);
        let n = r.random_range(1..=10);
        let mut f = mixed_table(&mut r, n);
        if 2 * ones(&f) > f.table_len() {
            f = f.complement();
        }
        pipeline_ok(&f)
    });
    let ex_ok = exhaustive.iter().all(|&b| b);
    c.finish(
        ex_ok && random_ok,
        secs(120),
        &format!(
            "{} n=4 functions with mu <= 1/2 ok={ex_ok}; 10^4 random n <= 10 ok={random_ok}",
            exhaustive.len()
        ),
    );
}

#[test]
fn c05_small_side_gain() {
    let c = Criterion::start(5, "split gain vs small-side bound, n=4");
    let rows: Vec<Option<f64>> = (0..1u64 << 16)
        .into_par_iter()
        .map(|t| {
            let f = n4(t);
            let counts = flip_counts(&f);
            let max = *counts.iter().max().unwrap();
            let i = counts.iter().position(|&c| c == max).unwrap() + 1;
            let (f1, f0) = (restrict(&f, i, true), restrict(&f, i, false));
            let (o1, o0) = (ones(&f1), ones(&f0));
            if o1 == 0 || o1 == 8 || o0 == 0 || o0 == 8 {
                return None;
            }
            let gain = 2.0 * m_mu(total_count(&f), ones(&f), 4)
                - m_mu(total_count(&f1), o1, 3)
                - m_mu(total_count(&f0), o0, 3);
            let mu = ones(&f) as f64 / 16.0;
            let s = o1.min(o0) as f64 / 8.0;
            let bound = s * (mu / (2.0 * s)).log2();
            let lib = split_gain(&f, report(&f).max_coord).unwrap();
            assert_eq!(lib.coord, i);
            assert!(
                (lib.gain - gain).abs() <= 1e-12 && (lib.small_side_bound - bound).abs() <= 1e-12,
                "{t:#x}: {} {gain} {} {bound}",
                lib.gain,
                lib.small_side_bound
            );
            Some(gain - bound)
        })
        .collect();
    let slacks: Vec<f64> = rows.into_iter().flatten().collect();
    let min = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    c.finish(
        min >= -1e-9,
        secs(30),
        &format!(
            "{} splits with both sides non-constant, min slack {min:.6}",
            slacks.len()
        ),
    );
}

fn random_term(r: &mut impl Rng, n: usize) -> Term {
    let width = r.random_range(0..=n);
    let mut coords: Vec<usize> = (1..=n).collect();
    for k in 0..width {
        let j = r.random_range(k..n);
        coords.swap(k, j);
    }
    let (mut pos, mut neg) = (vec![], vec![]);
    for &c in &coords[..width] {
        if r.random::<bool>() {
            pos.push(c)
        } else {
            neg.push(c)
        }
    }
    Term::new(pos, neg).unwrap()
}

#[test]
fn c06_width_truncation() {
    let c = Criterion::start(6, "width truncation union bound");
    let ok = (0..1000u64).into_par_iter().all(|seed| {
        let mut r = rng(0xc06 ^ seed << 8);
        let n = r.random_range(1..=10);
        let size = r.random_range(1..=8);
        let d = Dnf::new(n, (0..size).map(|_| random_term(&mut r, n)).collect()).unwrap();
        (0..=n).all(|w| {
            let t = truncate_with_bound(&d, w).unwrap();
            let kept: Vec<&Term> = d.terms().iter().filter(|t| t.width() <= w).collect();
            let count = (0..1u64 << n)
                .filter(|&x| {
                    dnf_holds(&d, x) != kept.iter().any(|t| term_holds(t.pos(), t.neg(), x))
                })
                .count() as u64;
            // count / 2^n <= size * 2^-w
            (count << w) <= (d.size() as u64) << n
                && t.disagreement == dyadic(count, n)
                && t.holds()
        })
    });
    c.finish(ok, secs(30), "10^3 random DNFs, n <= 10, every width");
}

fn random_disjoint_subcubes(r: &mut impl Rng, n: usize, k: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = Vec::new();
    let mut misses = 0;
    while terms.len() < k {
        // early picks can leave no room for the rest
        misses += 1;
        if misses > 200 {
            terms.clear();
            misses = 0;
        }
        let t = random_term(r, n);
        let disjoint = terms.iter().all(|u| {
            t.pos().iter().any(|c| u.neg().contains(c))
                || t.neg().iter().any(|c| u.pos().contains(c))
        });
        if disjoint && t.width() > 0 {
            terms.push(t);
        }
    }
    terms
}

#[test]
fn c07_approximator_certification() {
    let c = Criterion::start(7, "approximator certification corpus");
    let mut corpus: Vec<BooleanFunction> = Vec::new();
    for n in 1..=8usize {
        for mut code in 0..3u64.pow(n as u32) {
            let (mut pos, mut neg) = (vec![], vec![]);
            for i in 1..=n {
                match code % 3 {
                    0 => neg.push(i),
                    1 => pos.push(i),
                    _ => {}
                }
                code /= 3;
            }
            corpus.push(BooleanFunction::from_fn(n, |x| term_holds(&pos, &neg, x)).unwrap());
        }
    }
    let subcubes = corpus.len();
    let mut r = rng(0xc07);
    for _ in 0..300 {
        let n = r.random_range(2..=12);
        let k = r.random_range(2..=4);
        let terms = random_disjoint_subcubes(&mut r, n, k);
        corpus.push(
            BooleanFunction::from_fn(n, |x| terms.iter().any(|t| term_holds(t.pos(), t.neg(), x)))
                .unwrap(),
        );
    }
    for l in 0..=4 {
        corpus.push(sharpness_example(2, l).unwrap());
    }
    for _ in 0..1000 {
        let n = r.random_range(1..=10);
        corpus.push(mixed_table(&mut r, n));
    }
    let policy = BudgetPolicy::default();
    let failures: Vec<String> = corpus
        .par_iter()
        .flat_map_iter(|f| EPS.iter().map(move |&eps| (f, eps)))
        .filter_map(|(f, eps)| {
            let res = approximate(f, eps, &policy).unwrap();
            let count = dnf_error_count(f, &res.dnf);
            let ok = le_eps_times(count, eps, ones(f)) && res.error == dyadic(count, f.n());
            (!ok).then(|| format!("{} eps={eps}", f.to_hex()))
        })
        .collect();
    c.finish(
        failures.is_empty(),
        secs(300),
        &format!(
            "{} functions ({subcubes} sub-cubes) x {} eps, failures: {:?}",
            corpus.len(),
            EPS.len(),
            &failures[..failures.len().min(5)]
        ),
    );
}

/// Minimum disagreement count over DNFs with at most two terms.
fn brute_force_two_terms(f: &BooleanFunction) -> u64 {
    let n = f.n();
    let table: u64 = (0..f.table_len())
        .filter(|&x| f.get(x))
        .map(|x| 1u64 << x)
        .sum();
    let mut terms = vec![0u64];
    for mut code in 0..3u64.pow(n as u32) {
        let (mut pos, mut neg) = (vec![], vec![]);
        for i in 1..=n {
            match code % 3 {
                0 => neg.push(i),
                1 => pos.push(i),
                _ => {}
            }
            code /= 3;
        }
        terms.push(
            (0..f.table_len())
                .filter(|&x| term_holds(&pos, &neg, x))
                .map(|x| 1u64 << x)
                .sum(),
        );
    }
    let mut best = u64::MAX;
    for a in &terms {
        for b in &terms {
            best = best.min(((a | b) ^ table).count_ones() as u64);
        }
    }
    best
}

#[test]
fn c08_oracle_dominance() {
    let c = Criterion::start(8, "two-term oracle dominates small approximations");
    let mut fs: Vec<BooleanFunction> = Vec::new();
    for n in 1..=3usize {
        for t in 0..1u64 << (1 << n) {
            fs.push(BooleanFunction::from_words(n, vec![t]).unwrap());
        }
    }
    let mut r = rng(0xc08);
    fs.extend((0..1000).map(|_| random_table(&mut r, 4)));
    let policy = BudgetPolicy::default();
    let compared: Vec<Option<usize>> = fs
        .par_iter()
        .map(|f| {
            let oracle = best_dnf_oracle(f, 2).unwrap();
            let best = brute_force_two_terms(f);
            if oracle.error != dyadic(best, f.n()) || dnf_error_count(f, &oracle.dnf) != best {
                return None;
            }
            let mut n = 0;
            for eps in EPS {
                let a = approximate(f, eps, &policy).unwrap();
                if a.size <= 2 {
                    if oracle.error > a.error {
                        return None;
                    }
                    n += 1;
                }
            }
            Some(n)
        })
        .collect();
    let ok = compared.iter().all(Option::is_some);
    let runs: usize = compared.iter().flatten().sum();
    c.finish(
        ok,
        secs(120),
        &format!(
            "{} functions, {runs} approximations of size <= 2 compared",
            fs.len()
        ),
    );
}

#[test]
fn c09_sharpness_numerics() {
    let c = Criterion::start(9, "sharpness instance numerics");
    let s22 = sharpness_example(2, 2).unwrap();
    let mu_ok = ones(&s22) == 81 && s22.n() == 10;
    let dt = dual_tribes(2, 4).unwrap();
    let independent =
        BooleanFunction::from_fn(8, |x| (0..4).all(|b| x >> (2 * b) & 3 != 0)).unwrap();
    let total = total_count(&independent);
    // I_k = (3/4)^3 / 2 = 27/128 per coordinate, 27/16 in total
    let dt_ok = dt == independent
        && ones(&dt) == 81
        && total == 27 * 16
        && report(&dt).total == dyadic(total, 8);
    let ms: Vec<f64> = (0..=4)
        .map(|l| {
            let f = sharpness_example(2, l).unwrap();
            let m =
                m_mu(total_count(&f), ones(&f), f.n()) / (ones(&f) as f64 / f.table_len() as f64);
            assert!((report(&f).excess - m).abs() <= 1e-12);
            m
        })
        .collect();
    let m_ok = ms.iter().all(|m| (m - ms[0]).abs() <= 1e-9);
    c.finish(
        mu_ok && dt_ok && m_ok,
        secs(60),
        &format!("mu(sharpness(2,2)) = {}, mu(dual_tribes(2,4)) = {}, I(dual_tribes(2,4)) = {}, M for l=0..4 = {ms:?}", s22.measure(), dt.measure(), dyadic(total, 8)),
    );
}

#[test]
fn c10_sampling_calibration() {
    let c = Criterion::start(10, "Monte-Carlo calibration");
    let spec = FunctionSpec::parse("dual-tribes:w=4,s=16").unwrap();
    let truth = (15.0f64 / 16.0).powi(16);
    let first = estimate_measure(&spec, &SampleConfig::new(1_000_000, 0)).unwrap();
    let hits = (0..100u64)
        .filter(|&seed| {
            estimate_measure(&spec, &SampleConfig::new(1_000_000, seed))
                .unwrap()
                .contains(truth)
        })
        .count();
    let rate = hits as f64 / 100.0;
    c.finish(
        first.contains(truth) && rate >= first.confidence - 0.01,
        secs(120),
        &format!(
            "estimate {:.6} +- {:.6} vs {truth:.6}; hit rate {rate} over 100 seeds",
            first.value, first.half_width
        ),
    );
}

#[test]
fn c11_constant_estimation_sweep() {
    let c = Criterion::start(11, "constant-estimation sweep, n=4");
    let cfg = SweepConfig {
        family: Family::ExhaustiveN,
        n: 4,
        checks: vec![Check::Iso, Check::Kkl, Check::SmallSide],
        ..Default::default()
    };
    let out = sweep::run_sweep(&cfg).unwrap();
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("sweep_n4_summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&out.summary).unwrap()).unwrap();
    let back: SweepSummary =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let s = &back;
    let witnessed =
        |e: &Option<sweep::Extremum>| e.as_ref().is_some_and(|e| e.witness.starts_with("n=4:"));
    let ok = s.functions == 1 << 16
        && witnessed(&s.medium_split_min_ratio)
        && witnessed(&s.max_influence_c1_estimate)
        && !s.max_influence_curve.is_empty()
        && s.iso_equality_count == 80;
    let l11 = s
        .medium_split_min_ratio
        .as_ref()
        .map(|e| (e.value, e.witness.clone()));
    let c1 = s
        .max_influence_c1_estimate
        .as_ref()
        .map(|e| (e.value, e.witness.clone()));
    c.finish(
        ok,
        secs(300),
        &format!(
            "min medium-split ratio {l11:?}; C1 estimate {c1:?}; summary at {}",
            path.display()
        ),
    );
}
