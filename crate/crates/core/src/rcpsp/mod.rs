//! RCPSP/max instances turned into soft-precedence problems.
//!
//! Every task must finish by a hard horizon `floor(alpha * l)`, where `l` is
//! a lower bound on the minimum makespan, resources stay hard, and every
//! precedence `s_to - s_from >= lag` becomes soft with an indicator.

mod bench;
mod generate;

use std::fmt::Write as _;

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::cp::{CumulativeConstraint, CumulativeTask, IntVar, Model};
use crate::engine::{Engine, Lit, SolveOutcome, Valuation};
use crate::maxsat::{self, wrap_indicators, Algorithm, OptimizeResult, SolveOptions};

pub use bench::{
    format_table, geometric_mean, run_benchmark, summarize, write_csv, BenchConfig, BenchInstance, BenchReport,
    BenchRow, CellKey, CellSummary, RowStatus,
};
pub use generate::{generate_micro, micro_set};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub duration: i64,
    /// One entry per resource.
    pub demands: Vec<i64>,
}

/// Generalized precedence `s_to - s_from >= lag`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precedence {
    pub from: usize,
    pub to: usize,
    pub lag: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcpspMax {
    pub tasks: Vec<Task>,
    pub capacities: Vec<i64>,
    pub precedences: Vec<Precedence>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RcpspError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("precedences contain a positive cycle")]
    PositiveCycle,
    #[error("alpha {0} is outside (0, 1]")]
    BadAlpha(f64),
    #[error("makespan lower bound must be at least 1")]
    BadLowerBound,
    #[error("horizon {horizon} is shorter than a task of duration {duration}")]
    HorizonTooShort { horizon: i64, duration: i64 },
    #[error("hard constraints are infeasible")]
    HardInfeasible,
    #[error("no schedule with makespan up to {0}")]
    NoSchedule(i64),
    #[error("budget exhausted")]
    Budget,
}

fn parse_err(line: usize, message: impl Into<String>) -> RcpspError {
    RcpspError::Parse {
        line,
        message: message.into(),
    }
}

impl RcpspMax {
    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn max_duration(&self) -> i64 {
        self.tasks.iter().map(|t| t.duration).max().unwrap_or(0)
    }
}

/// Parse the plain instance format:
///
/// ```text
/// <tasks> <resources>
/// <duration> <demand_1> .. <demand_r>     one line per task
/// <capacity_1> .. <capacity_r>
/// <from> <to> <lag>                       one line per precedence, tasks from 1
/// ```
///
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_instance(text: &str) -> Result<RcpspMax, RcpspError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let numbers = |line: usize, l: &str| -> Result<Vec<i64>, RcpspError> {
        l.split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| parse_err(line, format!("bad number `{t}`"))))
            .collect()
    };

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = numbers(line, header)?;
    if header.len() != 2 || header[0] < 0 || header[1] < 0 {
        return Err(parse_err(line, "expected `<tasks> <resources>`"));
    }
    let (n, r) = (header[0] as usize, header[1] as usize);

    let mut tasks = Vec::with_capacity(n);
    for k in 0..n {
        let (line, l) = lines.next().ok_or_else(|| parse_err(line, format!("missing task {}", k + 1)))?;
        let row = numbers(line, l)?;
        if row.len() != r + 1 {
            return Err(parse_err(line, format!("task row needs {} numbers, found {}", r + 1, row.len())));
        }
        if row.iter().any(|&v| v < 0) {
            return Err(parse_err(line, "durations and demands must be nonnegative"));
        }
        tasks.push(Task {
            duration: row[0],
            demands: row[1..].to_vec(),
        });
    }

    // With no resources the capacity row is empty, and empty lines are skipped.
    let (line, capacities) = if r == 0 {
        (line, Vec::new())
    } else {
        let (line, l) = lines.next().ok_or_else(|| parse_err(line, "missing capacity row"))?;
        (line, numbers(line, l)?)
    };
    if capacities.len() != r {
        return Err(parse_err(line, format!("capacity row needs {r} numbers, found {}", capacities.len())));
    }
    if capacities.iter().any(|&c| c < 0) {
        return Err(parse_err(line, "capacities must be nonnegative"));
    }

    let mut precedences = Vec::new();
    for (line, l) in lines {
        let row = numbers(line, l)?;
        if row.len() != 3 {
            return Err(parse_err(line, "expected `<from> <to> <lag>`"));
        }
        let task = |v: i64| -> Result<usize, RcpspError> {
            if v < 1 || v as usize > n {
                Err(parse_err(line, format!("task {v} out of range")))
            } else {
                Ok(v as usize - 1)
            }
        };
        precedences.push(Precedence {
            from: task(row[0])?,
            to: task(row[1])?,
            lag: row[2],
        });
    }
    Ok(RcpspMax {
        tasks,
        capacities,
        precedences,
    })
}

pub fn write_instance(inst: &RcpspMax) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", inst.tasks.len(), inst.capacities.len());
    for t in &inst.tasks {
        let _ = write!(out, "{}", t.duration);
        for d in &t.demands {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
    }
    let caps: Vec<String> = inst.capacities.iter().map(i64::to_string).collect();
    let _ = writeln!(out, "{}", caps.join(" "));
    for p in &inst.precedences {
        let _ = writeln!(out, "{} {} {}", p.from + 1, p.to + 1, p.lag);
    }
    out
}

/// Earliest start times under all precedences (longest paths from time 0).
pub fn earliest_starts(inst: &RcpspMax) -> Result<Vec<i64>, RcpspError> {
    let n = inst.tasks.len();
    let mut es = vec![0i64; n];
    for round in 0..=n {
        let mut changed = false;
        for p in &inst.precedences {
            if es[p.from] + p.lag > es[p.to] {
                es[p.to] = es[p.from] + p.lag;
                changed = true;
            }
        }
        if !changed {
            return Ok(es);
        }
        if round == n {
            break;
        }
    }
    Err(RcpspError::PositiveCycle)
}

/// Max of the precedence-path bound and the per-resource energy bound.
pub fn makespan_lower_bound(inst: &RcpspMax) -> Result<i64, RcpspError> {
    let es = earliest_starts(inst)?;
    let path = es.iter().zip(&inst.tasks).map(|(s, t)| s + t.duration).max().unwrap_or(0);
    let mut energy = 0;
    for (r, &cap) in inst.capacities.iter().enumerate() {
        let total: i64 = inst.tasks.iter().map(|t| t.duration * t.demands[r]).sum();
        if cap > 0 {
            energy = energy.max((total + cap - 1) / cap);
        }
    }
    Ok(path.max(energy))
}

/// Minimum makespan with every precedence hard, found by trying horizons
/// upward from [`makespan_lower_bound`].
pub fn exact_makespan(inst: &RcpspMax, opts: &SolveOptions) -> Result<i64, RcpspError> {
    let lb = makespan_lower_bound(inst)?;
    let cap = lb
        + inst.tasks.iter().map(|t| t.duration).sum::<i64>()
        + inst.precedences.iter().map(|p| p.lag.abs()).sum::<i64>();
    for horizon in lb.max(inst.max_duration())..=cap {
        let mut model = Model::new(Engine::new());
        let Ok(starts) = post_hard(&mut model, inst, horizon) else {
            continue;
        };
        let t = model.true_lit();
        for p in &inst.precedences {
            model
                .post_half_reified_linear(t, &[(1, starts[p.to]), (-1, starts[p.from])], p.lag)
                .expect("two terms");
        }
        let engine = model.engine_mut();
        engine.set_budget(opts.budget(std::time::Instant::now()));
        match engine.solve(&[]) {
            SolveOutcome::Sat(_) => return Ok(horizon),
            SolveOutcome::Unsat(_) => {}
            SolveOutcome::Unknown => return Err(RcpspError::Budget),
        }
    }
    Err(RcpspError::NoSchedule(cap))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Cardinality,
    Weighted,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Cardinality => "cardinality",
            Mode::Weighted => "weighted",
        }
    }

    pub fn from_name(name: &str) -> Option<Mode> {
        [Mode::Cardinality, Mode::Weighted].into_iter().find(|m| m.name() == name)
    }
}

/// Precedence weights in 1..=10: the k-th weight is `1 + x_k mod 10`, where
/// `x_k` is the k-th output of SplitMix64 started from `seed`.
pub fn precedence_weights(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| 1 + rng.next_u64() % 10).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoftPrecedenceProblem {
    pub base: RcpspMax,
    pub alpha: f64,
    pub lower_bound: i64,
    /// Every task must satisfy `start + duration <= horizon`.
    pub horizon: i64,
    pub mode: Mode,
    pub weights: Vec<u64>,
}

pub fn horizon_for(alpha: f64, lower_bound: i64) -> i64 {
    // The epsilon keeps e.g. 0.7 * 100 from rounding down to 69.
    (alpha * lower_bound as f64 + 1e-9).floor() as i64
}

pub fn soften(inst: &RcpspMax, alpha: f64, lower_bound: i64, mode: Mode, seed: u64) -> Result<SoftPrecedenceProblem, RcpspError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RcpspError::BadAlpha(alpha));
    }
    if lower_bound < 1 {
        return Err(RcpspError::BadLowerBound);
    }
    let horizon = horizon_for(alpha, lower_bound);
    let duration = inst.max_duration();
    if horizon < duration {
        return Err(RcpspError::HorizonTooShort { horizon, duration });
    }
    let weights = match mode {
        Mode::Cardinality => vec![1; inst.precedences.len()],
        Mode::Weighted => precedence_weights(seed, inst.precedences.len()),
    };
    Ok(SoftPrecedenceProblem {
        base: inst.clone(),
        alpha,
        lower_bound,
        horizon,
        mode,
        weights,
    })
}

/// Start variables within the horizon plus one cumulative per resource.
fn post_hard(model: &mut Model, inst: &RcpspMax, horizon: i64) -> Result<Vec<IntVar>, RcpspError> {
    let mut starts = Vec::with_capacity(inst.tasks.len());
    for t in &inst.tasks {
        let x = model
            .new_int_var(0, horizon - t.duration)
            .map_err(|_| RcpspError::HardInfeasible)?;
        starts.push(x);
    }
    for (r, &capacity) in inst.capacities.iter().enumerate() {
        let tasks = inst
            .tasks
            .iter()
            .zip(&starts)
            .map(|(t, &start)| CumulativeTask {
                start,
                duration: t.duration,
                demand: t.demands[r],
            })
            .collect();
        model
            .post_cumulative(&CumulativeConstraint { tasks, capacity })
            .map_err(|_| RcpspError::HardInfeasible)?;
    }
    Ok(starts)
}

pub struct BuiltModel {
    pub model: Model,
    pub starts: Vec<IntVar>,
    /// One `(indicator, weight)` per precedence, in order.
    pub indicators: Vec<(Lit, u64)>,
}

/// Load the soft-precedence problem into `engine`.
pub fn build_model(p: &SoftPrecedenceProblem, engine: Engine) -> Result<BuiltModel, RcpspError> {
    let mut model = Model::new(engine);
    let starts = post_hard(&mut model, &p.base, p.horizon)?;
    let mut indicators = Vec::with_capacity(p.base.precedences.len());
    for (prec, &w) in p.base.precedences.iter().zip(&p.weights) {
        let i = model.new_bool_var();
        model
            .post_half_reified_linear(i, &[(1, starts[prec.to]), (-1, starts[prec.from])], prec.lag)
            .expect("two terms");
        indicators.push((i, w));
    }
    if !model.engine_mut().propagate_root() {
        return Err(RcpspError::HardInfeasible);
    }
    Ok(BuiltModel {
        model,
        starts,
        indicators,
    })
}

pub struct ScheduleSolution {
    pub result: OptimizeResult,
    pub starts: Option<Vec<i64>>,
    /// Whether each precedence's indicator holds in the returned model.
    pub enforced: Option<Vec<bool>>,
}

pub fn solve_soft(p: &SoftPrecedenceProblem, algorithm: Algorithm, opts: &SolveOptions) -> Result<ScheduleSolution, RcpspError> {
    let built = build_model(p, Engine::new())?;
    let (engine, domains) = built.model.into_parts();
    let problem = wrap_indicators(engine, &built.indicators).expect("indicators are fresh variables");
    let result = maxsat::solve(problem, algorithm, opts);
    let (starts, enforced) = match &result.model {
        Some(m) => {
            let store = domains.borrow();
            (
                Some(built.starts.iter().map(|&x| store.value_in(m, x)).collect()),
                Some(built.indicators.iter().map(|&(i, _)| m.is_true(i)).collect()),
            )
        }
        None => (None, None),
    };
    Ok(ScheduleSolution {
        result,
        starts,
        enforced,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("task {task} starts at {start}, outside its window")]
    OutOfWindow { task: usize, start: i64 },
    #[error("resource {resource} is overloaded at time {time}")]
    Overload { resource: usize, time: i64 },
    #[error("precedence {index} is enforced but violated")]
    BrokenPrecedence { index: usize },
}

/// Check a schedule against the hard constraints and the enforced
/// precedences; returns the weight of precedences not enforced.
pub fn audit_schedule(p: &SoftPrecedenceProblem, starts: &[i64], enforced: &[bool]) -> Result<u64, AuditError> {
    let inst = &p.base;
    for (k, (t, &s)) in inst.tasks.iter().zip(starts).enumerate() {
        if s < 0 || s + t.duration > p.horizon {
            return Err(AuditError::OutOfWindow { task: k, start: s });
        }
    }
    for (r, &cap) in inst.capacities.iter().enumerate() {
        for time in 0..p.horizon {
            let load: i64 = inst
                .tasks
                .iter()
                .zip(starts)
                .filter(|(t, &s)| s <= time && time < s + t.duration)
                .map(|(t, _)| t.demands[r])
                .sum();
            if load > cap {
                return Err(AuditError::Overload { resource: r, time });
            }
        }
    }
    let mut cost = 0;
    for (k, (prec, &on)) in inst.precedences.iter().zip(enforced).enumerate() {
        if on {
            if starts[prec.to] - starts[prec.from] < prec.lag {
                return Err(AuditError::BrokenPrecedence { index: k });
            }
        } else {
            cost += p.weights[k];
        }
    }
    Ok(cost)
}
