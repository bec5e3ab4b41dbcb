use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cubelab::approx::{best_dnf_oracle_with_caps, best_subcube, OracleCaps};
use cubelab::dnf::truncate_with_bound;
use cubelab::fourier::fourier_influence_check;
use cubelab::sampling::{self, SampleConfig};
use cubelab::sweep::{self, parse_checks, Family, SweepConfig};
use cubelab::{
    approximate, compress_pipeline, report, shift, BudgetPolicy, Dnf, FunctionSpec, ShiftSpec,
    SplitRule,
};
use serde_json::{json, Value};

/// Exact and sampled analysis of Boolean functions on the hypercube.
#[derive(Parser)]
#[command(name = "cubelab", version)]
struct Cli {
    /// Largest n for exact truth tables.
    #[arg(long, global = true, env = "CUBELAB_MAX_N", hide_env_values = true)]
    max_n: Option<usize>,
    /// Compact single-line JSON.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Influences, measure, excess and the isoperimetric/KKL comparisons.
    Analyze {
        #[arg(long = "fn")]
        func: String,
        /// Also cross-check influences against the Walsh-Hadamard transform.
        #[arg(long)]
        fourier: bool,
    },
    /// Apply one shift S_{S,T}, or the whole compression pipeline.
    Shift {
        #[arg(long = "fn")]
        func: String,
        /// Comma-separated coordinates of S.
        #[arg(long = "S", value_delimiter = ',', conflicts_with = "pipeline")]
        s: Vec<usize>,
        /// Comma-separated coordinates of T.
        #[arg(
            long = "T",
            value_delimiter = ',',
            required_unless_present = "pipeline"
        )]
        t: Vec<usize>,
        #[arg(long)]
        pipeline: bool,
        /// Complement the function first (the pipeline needs mu <= 1/2).
        #[arg(long)]
        complement: bool,
    },
    /// Certified DNF approximation with error at most eps * mu(f).
    Approx {
        #[arg(long = "fn")]
        func: String,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        policy: PolicyArgs,
        /// Omit the recursion trace.
        #[arg(long)]
        no_trace: bool,
    },
    /// Best single sub-cube (one-term DNF) approximation.
    Subcube {
        #[arg(long = "fn")]
        func: String,
    },
    /// Exhaustive best DNF with at most `size` terms (small n only).
    Oracle {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, default_value_t = 2)]
        size: usize,
        /// Raise the dimension cap (at most 6).
        #[arg(long, default_value_t = 4)]
        dim_cap: usize,
    },
    /// Width truncation of a DNF and its union-bound allowance.
    Truncate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dnf: String,
        #[arg(long)]
        width: usize,
    },
    /// Monte-Carlo estimates with Hoeffding confidence radii.
    Estimate {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, value_parser = ["measure", "influence", "total", "dnf-error"])]
        quantity: String,
        /// Coordinate for `influence`.
        #[arg(long)]
        k: Option<usize>,
        /// DNF for `dnf-error`.
        #[arg(long)]
        dnf: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = sampling::DEFAULT_CONFIDENCE)]
        confidence: f64,
    },
    /// Run bound checks over a family of functions.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, default_value = "proportional-to-m-mu")]
    split_rule: SplitRule,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    small_side_factor: f64,
    #[arg(long, default_value_t = 4)]
    oracle_cap: usize,
    #[arg(long, default_value_t = cubelab::approx::DEFAULT_SUBCUBE_CAP)]
    subcube_cap: usize,
}

impl PolicyArgs {
    fn policy(&self) -> BudgetPolicy {
        BudgetPolicy {
            split_rule: self.split_rule,
            small_side_factor: self.small_side_factor,
            oracle_cap: self.oracle_cap,
            subcube_cap: self.subcube_cap,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// exhaustive-n, random, or generator-grid.
    #[arg(long, default_value = "exhaustive-n")]
    family: Family,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Smallest dimension for the random family.
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random family: vary the density of each function.
    #[arg(long)]
    biased: bool,
    /// Function spec for the generator grid (repeatable).
    #[arg(long = "spec")]
    grid: Vec<String>,
    /// Comma-separated: iso,kkl,infind,compression,small-side,truncation,approx-cert.
    #[arg(long, default_value = "iso,kkl,infind")]
    checks: String,
    /// Comma-separated eps values for approx-cert.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.5")]
    eps: Vec<f64>,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Per-function CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary JSON output (default: stdout).
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn function(spec: &str) -> Result<(FunctionSpec, cubelab::BooleanFunction)> {
    let spec = FunctionSpec::parse(spec)?;
    let f = spec.materialize()?;
    Ok((spec, f))
}

/// Returns the JSON document and whether every check passed.
fn run(cmd: Cmd) -> Result<(Value, bool)> {
    Ok(match cmd {
        Cmd::Analyze { func, fourier } => {
            let (spec, f) = function(&func)?;
            let rep = report(&f);
            let ok = rep.iso != cubelab::influence::IsoComparison::Violated
                && rep.kkl_holds(sweep::KKL_TOLERANCE);
            let mut v = json!({ "spec": spec.to_string(), "report": rep });
            if fourier {
                let check = fourier_influence_check(&f);
                v["fourier"] = serde_json::to_value(check)?;
            }
            (v, ok)
        }
        Cmd::Shift {
            func,
            s,
            t,
            pipeline,
            complement,
        } => {
            let (spec, mut f) = function(&func)?;
            if complement {
                f = f.complement();
            }
            let stage = |shifts: &[ShiftSpec], g: &cubelab::BooleanFunction| {
                json!({
                    "shifts": shifts.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                    "table": g.to_hex(),
                    "mu": g.measure(),
                    "total_influence": cubelab::influence::total_influence(g),
                })
            };
            let stages: Vec<Value> = if pipeline {
                compress_pipeline(&f)?
                    .iter()
                    .map(|st| stage(&st.shifts, &st.function))
                    .collect()
            } else {
                let sp = ShiftSpec::new(s, t);
                vec![stage(std::slice::from_ref(&sp), &shift(&f, &sp)?)]
            };
            (
                json!({ "spec": spec.to_string(), "input": f.to_hex(), "stages": stages }),
                true,
            )
        }
        Cmd::Approx {
            func,
            eps,
            policy,
            no_trace,
        } => {
            let (spec, f) = function(&func)?;
            let mut r = approximate(&f, eps, &policy.policy())?;
            if no_trace {
                r.trace.clear();
            }
            let ok = r.certified();
            let mut v = serde_json::to_value(&r)?;
            v["spec"] = json!(spec.to_string());
            v["dnf_text"] = json!(r.dnf.to_string());
            v["certified"] = json!(ok);
            (v, ok)
        }
        Cmd::Subcube { func } => {
            let (spec, f) = function(&func)?;
            let fit = best_subcube(&f)?;
            let text = fit
                .term
                .as_ref()
                .map_or("false".to_string(), |t| t.to_string());
            (
                json!({ "spec": spec.to_string(), "term": text, "error": fit.error }),
                true,
            )
        }
        Cmd::Oracle {
            func,
            size,
            dim_cap,
        } => {
            let (spec, f) = function(&func)?;
            let r = best_dnf_oracle_with_caps(
                &f,
                size,
                OracleCaps {
                    max_n: dim_cap,
                    max_size: size.max(OracleCaps::default().max_size),
                },
            )?;
            (
                json!({ "spec": spec.to_string(), "dnf_text": r.dnf.to_string(), "error": r.error, "size_cap": r.size_cap }),
                true,
            )
        }
        Cmd::Truncate { n, dnf, width } => {
            let d = Dnf::parse(n, &dnf)?;
            let t = truncate_with_bound(&d, width)?;
            let ok = t.holds();
            (
                json!({
                    "dnf": d.to_string(),
                    "truncated": t.dnf.to_string(),
                    "disagreement": t.disagreement,
                    "allowance": t.allowance,
                    "holds": ok,
                }),
                ok,
            )
        }
        Cmd::Estimate {
            func,
            quantity,
            k,
            dnf,
            samples,
            seed,
            confidence,
        } => {
            let spec = FunctionSpec::parse(&func)?;
            let cfg = SampleConfig {
                samples,
                seed,
                confidence,
            };
            let est = match quantity.as_str() {
                "measure" => sampling::estimate_measure(&spec, &cfg)?,
                "influence" => {
                    let k = k.context("--k is required for influence")?;
                    sampling::estimate_influence(&spec, k, &cfg)?
                }
                "total" => sampling::estimate_total_influence(&spec, &cfg)?,
                "dnf-error" => {
                    let text = dnf.context("--dnf is required for dnf-error")?;
                    let d = Dnf::parse(spec.n()?, &text)?;
                    sampling::estimate_dnf_error(&spec, &d, &cfg)?
                }
                other => bail!("unknown quantity {other}"),
            };
            (
                json!({ "spec": spec.to_string(), "quantity": quantity, "estimate": est }),
                true,
            )
        }
        Cmd::Sweep(a) => {
            let cfg = SweepConfig {
                family: a.family,
                n: a.n,
                n_min: a.n_min,
                count: a.count,
                seed: a.seed,
                biased: a.biased,
                grid: a.grid,
                checks: parse_checks(&a.checks)?,
                eps: a.eps,
                policy: a.policy.policy(),
                parallelism: a.threads,
            };
            let out = sweep::run_sweep(&cfg)?;
            if let Some(path) = &a.csv {
                let file =
                    File::create(path).with_context(|| format!("creating {}", path.display()))?;
                sweep::write_csv(&out.records, BufWriter::new(file))?;
            }
            let v = serde_json::to_value(&out.summary)?;
            let ok = out.summary.all_passed;
            if let Some(path) = &a.summary {
                std::fs::write(path, serde_json::to_string_pretty(&v)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                (json!({ "summary": path, "all_passed": ok }), ok)
            } else {
                (v, ok)
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.max_n {
        // read once by the library on first use
        std::env::set_var(cubelab::function::MAX_N_ENV, n.to_string());
    }
    match run(cli.cmd) {
        Ok((v, ok)) => {
            let text = if cli.compact {
                v.to_string()
            } else {
                serde_json::to_string_pretty(&v).expect("json")
            };
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
