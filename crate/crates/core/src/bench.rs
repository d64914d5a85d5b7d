//! Benchmark harness: run solver configurations over problem suites, apply
//! the failure rules, and compute Dolan-More performance profiles.
//!
//! A solver fails on a problem when its residual is neither relatively nor
//! absolutely close to the best residual found for that problem, or when it
//! exceeds the time budget; failed runs get the 9999-second sentinel so a
//! large runtime ratio can mean either an inaccurate or an inefficient
//! solution.

use crate::kernels::svd_solve_min_norm;
use crate::mat::Mat;
use crate::rng::{label, Rng64};
use crate::solver::{solve, SolverConfig};
use crate::testgen::{rhs_ones, ProblemSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use std::time::Instant;

/// Sentinel runtime for failed runs, in seconds.
pub const FAIL_TIME: f64 = 9999.0;

/// Default wall-clock budget per run, in seconds.
pub const DEFAULT_BUDGET: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inaccurate,
    Timeout,
    Error,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Inaccurate => "inaccurate",
            Status::Timeout => "timeout",
            Status::Error => "error",
        })
    }
}

impl std::str::FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ok" => Status::Ok,
            "inaccurate" => Status::Inaccurate,
            "timeout" => Status::Timeout,
            "error" => Status::Error,
            other => return Err(Error::InvalidArg(format!("unknown status '{other}'"))),
        })
    }
}

/// One solver run on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub problem: String,
    pub solver: String,
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    pub time_s: f64,
    pub residual: f64,
    pub iters: usize,
    pub rank: usize,
    pub status: Status,
}

/// Apply the failure rules to all records of a single problem: with `r` the
/// smallest residual among the runs, a run fails when
/// `resid > (1 + tau_r) r` and `resid > r + tau_a`, or when it exceeded the
/// budget. Failed runs have their effective time set to 9999 s.
pub fn judge(records: &mut [BenchRecord], tau_r: f64, tau_a: f64, budget_s: f64) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArg("judge needs at least one record".into()));
    }
    let best = records
        .iter()
        .filter(|rec| rec.status != Status::Error && rec.residual.is_finite())
        .map(|rec| rec.residual)
        .fold(f64::INFINITY, f64::min);
    for rec in records.iter_mut() {
        if rec.status == Status::Error {
            rec.time_s = FAIL_TIME;
            continue;
        }
        if rec.time_s > budget_s {
            rec.status = Status::Timeout;
            rec.time_s = FAIL_TIME;
            continue;
        }
        let relative_far = rec.residual > (1.0 + tau_r) * best;
        let absolute_far = rec.residual > best + tau_a;
        if relative_far && absolute_far {
            rec.status = Status::Inaccurate;
            rec.time_s = FAIL_TIME;
        } else {
            rec.status = Status::Ok;
        }
    }
    Ok(())
}

/// One solver's performance-profile curve: step-function breakpoints
/// `(log2(ratio), fraction of problems solved within that ratio)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Curve value at a runtime ratio (not log scale).
    pub fn fraction_at(&self, ratio: f64) -> f64 {
        let a = ratio.log2();
        let mut frac = 0.0;
        for &(x, y) in &self.points {
            if x <= a + 1e-12 {
                frac = y;
            } else {
                break;
            }
        }
        frac
    }
}

/// Dolan-More performance profiles. Every solver must appear on every
/// problem.
pub fn profile(records: &[BenchRecord]) -> Result<Vec<ProfileCurve>> {
    let mut solvers: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    for rec in records {
        if !solvers.contains(&rec.solver) {
            solvers.push(rec.solver.clone());
        }
        if !problems.contains(&rec.problem) {
            problems.push(rec.problem.clone());
        }
    }
    let np = problems.len();
    let ns = solvers.len();
    let mut times = vec![f64::NAN; np * ns];
    for rec in records {
        let pi = problems.iter().position(|p| *p == rec.problem).unwrap();
        let si = solvers.iter().position(|s| *s == rec.solver).unwrap();
        times[pi * ns + si] = rec.time_s;
    }
    if times.iter().any(|t| t.is_nan()) {
        return Err(Error::InvalidArg("profile needs every (problem, solver) pair".into()));
    }

    let mins: Vec<f64> = (0..np)
        .map(|pi| times[pi * ns..(pi + 1) * ns].iter().copied().fold(f64::INFINITY, f64::min))
        .collect();

    let curves = solvers
        .iter()
        .enumerate()
        .map(|(si, name)| {
            let mut ratios: Vec<f64> = (0..np)
                .map(|pi| {
                    let t = times[pi * ns + si];
                    if mins[pi] > 0.0 {
                        t / mins[pi]
                    } else if t > 0.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    }
                })
                .collect();
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut points: Vec<(f64, f64)> = Vec::new();
            for (idx, ratio) in ratios.iter().enumerate() {
                let frac = (idx + 1) as f64 / np as f64;
                let x = ratio.log2();
                match points.last_mut() {
                    Some(last) if (last.0 - x).abs() < 1e-12 => last.1 = frac,
                    _ => points.push((x, frac)),
                }
            }
            ProfileCurve { solver: name.clone(), points }
        })
        .collect();
    Ok(curves)
}

/// Identifier of the oracle rows added by `run_suite`.
pub const ORACLE_SOLVER: &str = "svd_oracle";

/// Problems small enough to get an SVD-oracle residual row.
pub const ORACLE_MAX_DIM: usize = 2000;

/// Options for a suite run.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub master_seed: u64,
    pub budget_s: f64,
    /// Worker threads for the (problem, config) grid; 1 runs sequentially.
    pub jobs: usize,
    /// Append an `svd_oracle` row for problems with `min(n, d) <= 2000`.
    pub with_oracle: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { master_seed: 0, budget_s: DEFAULT_BUDGET, jobs: 1, with_oracle: true }
    }
}

/// A named problem in a suite.
#[derive(Debug, Clone)]
pub struct SuiteProblem {
    pub id: String,
    pub spec: ProblemSpec,
}

fn run_one(
    problem: &SuiteProblem,
    a: &Mat,
    b: &[f64],
    name: &str,
    cfg: &SolverConfig,
) -> BenchRecord {
    let started = Instant::now();
    let outcome = solve(a, b, cfg);
    let time_s = started.elapsed().as_secs_f64();
    match outcome {
        Ok(res) => BenchRecord {
            problem: problem.id.clone(),
            solver: name.to_string(),
            n: a.rows(),
            d: a.cols(),
            nnz: a.nnz(),
            time_s,
            residual: res.residual,
            iters: res.iterations,
            rank: res.p,
            status: if res.hit_it_max { Status::Inaccurate } else { Status::Ok },
        },
        Err(_) => BenchRecord {
            problem: problem.id.clone(),
            solver: name.to_string(),
            n: a.rows(),
            d: a.cols(),
            nnz: a.nnz(),
            time_s,
            residual: f64::INFINITY,
            iters: 0,
            rank: 0,
            status: Status::Error,
        },
    }
}

/// Run every config on every problem, judge the outcomes per problem, and
/// return records ordered by (problem, config). Problem seeds derive from
/// `(master_seed, problem index)`; solver seeds from
/// `(master_seed, problem index, config index)`, so two runs with the same
/// master seed produce identical residual, iteration, and status columns.
pub fn run_suite(
    problems: &[SuiteProblem],
    configs: &[(String, SolverConfig)],
    tau_r: f64,
    tau_a: f64,
    opts: &SuiteOptions,
) -> Result<Vec<BenchRecord>> {
    if problems.is_empty() || configs.is_empty() {
        return Err(Error::InvalidArg("run_suite needs problems and configs".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArg(format!("thread pool: {e}")))?;

    let mut records: Vec<Vec<BenchRecord>> = pool.install(|| {
        problems
            .par_iter()
            .enumerate()
            .map(|(pi, problem)| {
                let mut spec = problem.spec;
                spec.seed = Rng64::substream(opts.master_seed, label::PROBLEM, pi as u64).next_u64();
                let a = spec.generate().expect("suite problem generates");
                let b = rhs_ones(a.rows());
                let mut rows: Vec<BenchRecord> = configs
                    .iter()
                    .enumerate()
                    .map(|(ci, (name, cfg))| {
                        let mut cfg = *cfg;
                        cfg.seed = Rng64::substream(
                            opts.master_seed,
                            label::SOLVE,
                            ((pi as u64) << 32) | ci as u64,
                        )
                        .next_u64();
                        run_one(problem, &a, &b, name, &cfg)
                    })
                    .collect();
                if opts.with_oracle && a.rows().min(a.cols()) <= ORACLE_MAX_DIM {
                    let started = Instant::now();
                    let (_, resid) = svd_solve_min_norm(&a, &b, 1e-12).expect("oracle solve");
                    rows.push(BenchRecord {
                        problem: problem.id.clone(),
                        solver: ORACLE_SOLVER.to_string(),
                        n: a.rows(),
                        d: a.cols(),
                        nnz: a.nnz(),
                        time_s: started.elapsed().as_secs_f64(),
                        residual: resid,
                        iters: 0,
                        rank: a.cols(),
                        status: Status::Ok,
                    });
                }
                rows
            })
            .collect()
    });

    for group in &mut records {
        judge(group, tau_r, tau_a, opts.budget_s)?;
    }
    Ok(records.into_iter().flatten().collect())
}
