//! Benchmark grid over alpha x mode x algorithm, with CSV and a text table
//! of geometric-mean solve times and timeout counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{exact_makespan, soften, solve_soft, Mode, RcpspError, RcpspMax};
use crate::maxsat::{Algorithm, SolveOptions, Status};

#[derive(Clone, Debug)]
pub struct BenchInstance {
    /// Instance set, the row label of the table.
    pub set: String,
    pub name: String,
    pub inst: RcpspMax,
    /// Known makespan bound; computed exactly when absent.
    pub lower_bound: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub alphas: Vec<f64>,
    pub modes: Vec<Mode>,
    pub algorithms: Vec<Algorithm>,
    pub budget: Duration,
    /// Weights of the k-th instance are drawn from `seed + k`.
    pub seed: u64,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            alphas: vec![0.7, 0.8, 0.9],
            modes: vec![Mode::Cardinality, Mode::Weighted],
            algorithms: Algorithm::ALL.to_vec(),
            budget: Duration::from_secs(600),
            seed: 0,
            jobs: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowStatus {
    Optimal,
    Timeout,
    /// Hard constraints unsatisfiable; excluded from the table.
    Infeasible,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Optimal => "optimal",
            RowStatus::Timeout => "timeout",
            RowStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub set: String,
    pub alpha: f64,
    pub mode: Mode,
    pub algorithm: Algorithm,
    pub instance: String,
    pub status: RowStatus,
    pub z_opt: Option<u64>,
    pub wall: Duration,
    pub conflicts: u64,
    pub cores: usize,
    pub incumbents: usize,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub budget: Duration,
}

struct Cell<'a> {
    bench: &'a BenchInstance,
    seed: u64,
    lower_bound: Result<i64, RowStatus>,
    alpha: f64,
    mode: Mode,
    algorithm: Algorithm,
}

fn failure_status(e: &RcpspError) -> RowStatus {
    match e {
        RcpspError::Budget => RowStatus::Timeout,
        _ => RowStatus::Infeasible,
    }
}

fn run_cell(cell: &Cell, budget: Duration) -> BenchRow {
    let mut row = BenchRow {
        set: cell.bench.set.clone(),
        alpha: cell.alpha,
        mode: cell.mode,
        algorithm: cell.algorithm,
        instance: cell.bench.name.clone(),
        status: RowStatus::Infeasible,
        z_opt: None,
        wall: Duration::ZERO,
        conflicts: 0,
        cores: 0,
        incumbents: 0,
    };
    let l = match cell.lower_bound {
        Ok(l) => l,
        Err(status) => {
            row.status = status;
            return row;
        }
    };
    let start = Instant::now();
    let opts = SolveOptions {
        timeout: Some(budget),
        max_conflicts: None,
    };
    let outcome = soften(&cell.bench.inst, cell.alpha, l, cell.mode, cell.seed)
        .and_then(|p| solve_soft(&p, cell.algorithm, &opts));
    row.wall = start.elapsed();
    match outcome {
        Err(e) => row.status = failure_status(&e),
        Ok(sol) => {
            let r = sol.result;
            row.status = match r.status {
                Status::Optimal => RowStatus::Optimal,
                Status::Unsatisfiable => RowStatus::Infeasible,
                Status::Unknown => RowStatus::Timeout,
            };
            if r.status == Status::Optimal {
                row.z_opt = r.cost;
            }
            row.conflicts = r.stats.conflicts;
            row.cores = r.trace.cores.len();
            row.incumbents = r.trace.incumbents.len();
        }
    }
    row
}

/// Run every cell of the grid. Rows come back sorted by set, instance,
/// alpha, mode and algorithm whatever the number of workers.
pub fn run_benchmark(instances: &[BenchInstance], cfg: &BenchConfig) -> BenchReport {
    let opts = SolveOptions {
        timeout: Some(cfg.budget),
        max_conflicts: None,
    };
    let bounds: Vec<Result<i64, RowStatus>> = instances
        .iter()
        .map(|b| match b.lower_bound {
            Some(l) => Ok(l),
            None => exact_makespan(&b.inst, &opts).map_err(|e| failure_status(&e)),
        })
        .collect();

    let mut cells = Vec::new();
    for (k, bench) in instances.iter().enumerate() {
        for &alpha in &cfg.alphas {
            for &mode in &cfg.modes {
                for &algorithm in &cfg.algorithms {
                    cells.push(Cell {
                        bench,
                        seed: cfg.seed.wrapping_add(k as u64),
                        lower_bound: bounds[k],
                        alpha,
                        mode,
                        algorithm,
                    });
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .expect("thread pool");
    let mut rows: Vec<BenchRow> = pool.install(|| cells.par_iter().map(|c| run_cell(c, cfg.budget)).collect());
    rows.sort_by(|a, b| {
        (&a.set, &a.instance)
            .cmp(&(&b.set, &b.instance))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.mode.cmp(&b.mode))
            .then(a.algorithm.cmp(&b.algorithm))
    });
    BenchReport {
        rows,
        budget: cfg.budget,
    }
}

/// CSV with one line per row. With `mask_timing` the wall-clock column is
/// replaced by `masked`, so reruns produce identical bytes.
pub fn write_csv(report: &BenchReport, mask_timing: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "set",
        "alpha",
        "mode",
        "algorithm",
        "instance",
        "status",
        "z_opt",
        "wall_ms",
        "conflicts",
        "cores",
        "incumbents",
    ])
    .expect("write to memory");
    for r in &report.rows {
        let wall = if mask_timing {
            "masked".to_string()
        } else {
            format!("{:.3}", r.wall.as_secs_f64() * 1e3)
        };
        w.write_record([
            r.set.clone(),
            r.alpha.to_string(),
            r.mode.name().to_string(),
            r.algorithm.name().to_string(),
            r.instance.clone(),
            r.status.name().to_string(),
            r.z_opt.map(|z| z.to_string()).unwrap_or_default(),
            wall,
            r.conflicts.to_string(),
            r.cores.to_string(),
            r.incumbents.to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Geometric mean of positive durations in seconds; zeros are clamped to a
/// microsecond so one instant run cannot zero the product.
pub fn geometric_mean(seconds: &[f64]) -> f64 {
    if seconds.is_empty() {
        return 0.0;
    }
    let log_sum: f64 = seconds.iter().map(|s| s.max(1e-6).ln()).sum();
    (log_sum / seconds.len() as f64).exp()
}

/// Mean time and timeout count of one table cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSummary {
    pub instances: usize,
    pub mean_seconds: f64,
    pub timeouts: usize,
}

/// Table cell: (mode, alpha index, set, algorithm).
pub type CellKey = (Mode, usize, String, Algorithm);

/// Summaries keyed by (mode, alpha index, set, algorithm). Instances that
/// are infeasible, or that every algorithm timed out on, are left out.
pub fn summarize(report: &BenchReport) -> BTreeMap<CellKey, CellSummary> {
    let alphas = distinct_alphas(report);
    let alpha_index = |a: f64| alphas.iter().position(|&x| x == a).expect("alpha listed");
    let budget = report.budget.as_secs_f64();

    let mut per_instance: BTreeMap<(Mode, usize, &str, &str), Vec<&BenchRow>> = BTreeMap::new();
    for r in &report.rows {
        per_instance
            .entry((r.mode, alpha_index(r.alpha), &r.set, &r.instance))
            .or_default()
            .push(r);
    }
    let mut times: BTreeMap<CellKey, (Vec<f64>, usize)> = BTreeMap::new();
    for ((mode, a, set, _), rows) in per_instance {
        if rows.iter().any(|r| r.status == RowStatus::Infeasible)
            || rows.iter().all(|r| r.status == RowStatus::Timeout)
        {
            continue;
        }
        for r in rows {
            let entry = times.entry((mode, a, set.to_string(), r.algorithm)).or_default();
            if r.status == RowStatus::Timeout {
                entry.0.push(budget);
                entry.1 += 1;
            } else {
                entry.0.push(r.wall.as_secs_f64());
            }
        }
    }
    times
        .into_iter()
        .map(|(k, (t, timeouts))| {
            (
                k,
                CellSummary {
                    instances: t.len(),
                    mean_seconds: geometric_mean(&t),
                    timeouts,
                },
            )
        })
        .collect()
}

fn distinct_alphas(report: &BenchReport) -> Vec<f64> {
    let mut alphas: Vec<f64> = Vec::new();
    for r in &report.rows {
        if !alphas.contains(&r.alpha) {
            alphas.push(r.alpha);
        }
    }
    alphas.sort_by(f64::total_cmp);
    alphas
}

fn label(alg: Algorithm, mode: Mode) -> &'static str {
    match (alg, mode) {
        (Algorithm::BranchAndBound, _) => "b&b",
        // Unit weights make WPM1 the classic MSU1.
        (Algorithm::Wpm1, Mode::Cardinality) => "msu1",
        (Algorithm::Wpm1, Mode::Weighted) => "wpm1",
        (Algorithm::Msu3, _) => "msu3",
    }
}

/// Aligned text table: a section per mode, a block per alpha, a row per
/// instance set, and per algorithm the geometric-mean time followed by the
/// number of timeouts.
pub fn format_table(report: &BenchReport) -> String {
    let summary = summarize(report);
    let alphas = distinct_alphas(report);
    let modes: BTreeSet<Mode> = report.rows.iter().map(|r| r.mode).collect();
    let algs: BTreeSet<Algorithm> = report.rows.iter().map(|r| r.algorithm).collect();
    let sets: BTreeSet<&str> = report.rows.iter().map(|r| r.set.as_str()).collect();

    let mut out = String::new();
    for mode in modes {
        let _ = writeln!(out, "{} version", mode.name());
        for (a, alpha) in alphas.iter().enumerate() {
            let _ = write!(out, "{:<16}{:>5}", format!("alpha {alpha}"), "#ins");
            for &alg in &algs {
                let _ = write!(out, " | {:>14}", label(alg, mode));
            }
            out.push('\n');
            for &set in &sets {
                let cells: Vec<Option<&CellSummary>> =
                    algs.iter().map(|&alg| summary.get(&(mode, a, set.to_string(), alg))).collect();
                let n = cells.iter().flatten().map(|c| c.instances).next().unwrap_or(0);
                let _ = write!(out, "{set:<16}{n:>5}");
                for c in cells {
                    match c {
                        Some(c) => {
                            let _ = write!(out, " | {:>10.3} {:>3}", c.mean_seconds, c.timeouts);
                        }
                        None => {
                            let _ = write!(out, " | {:>10} {:>3}", "-", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
    }
    out
}
