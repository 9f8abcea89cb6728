use std::cmp::Reverse;
use std::time::Instant;

use log::debug;

use crate::cp::{post_at_most_one, post_pb_upper_bound, PbUpperBound};
use crate::engine::{ClauseRef, Lit, Origin, PropId, SolveOutcome};

use super::{
    Algorithm, CoreRecord, OptimizeResult, SoftInstance, SoftProblem, SolveOptions, Status, Trace,
};

pub fn solve(problem: SoftProblem, algorithm: Algorithm, opts: &SolveOptions) -> OptimizeResult {
    match algorithm {
        Algorithm::BranchAndBound => bnb(problem, opts),
        Algorithm::Wpm1 => wpm1(problem, opts),
        Algorithm::Msu3 => msu3(problem, opts),
    }
}

pub fn solve_bnb(inst: &SoftInstance, opts: &SolveOptions) -> OptimizeResult {
    bnb(SoftProblem::from_instance(inst), opts)
}

pub fn solve_wpm1(inst: &SoftInstance, opts: &SolveOptions) -> OptimizeResult {
    wpm1(SoftProblem::from_instance(inst), opts)
}

pub fn solve_msu3(inst: &SoftInstance, opts: &SolveOptions) -> OptimizeResult {
    msu3(SoftProblem::from_instance(inst), opts)
}

/// Indices of `softs` in assumption order.
fn assumption_order(p: &SoftProblem) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.softs.len()).collect();
    order.sort_by_key(|&j| (Reverse(p.softs[j].priority), p.softs[j].source, j));
    order
}

/// Give every soft item a violator `v` with `C or v`. Fused indicators use
/// `!i` and add nothing.
fn add_violators(p: &mut SoftProblem) -> Vec<Lit> {
    let mut violators = Vec::with_capacity(p.softs.len());
    for j in 0..p.softs.len() {
        let v = if p.softs[j].fused {
            !p.softs[j].lits[0]
        } else {
            let v = p.engine.new_bool_var();
            let mut clause = p.softs[j].lits.clone();
            clause.push(v);
            let _ = p.engine.add_clause(&clause, Origin::Relaxation);
            v
        };
        p.engine.prefer(!v);
        violators.push(v);
    }
    violators
}

/// Phase saving may have flipped violators on; start each solve with
/// every soft item satisfied where possible.
fn reset_phases(p: &mut SoftProblem, violators: &[Lit]) {
    for &v in violators {
        p.engine.set_phase(!v);
    }
}

fn objective(p: &mut SoftProblem, violators: &[Lit]) -> PropId {
    let terms: Vec<(u64, Lit)> = p.softs.iter().map(|s| s.weight).zip(violators.iter().copied()).collect();
    post_pb_upper_bound(&mut p.engine, &terms, u64::MAX)
}

fn tighten(p: &mut SoftProblem, objective: PropId, bound: u64) {
    p.engine
        .propagator_mut::<PbUpperBound>(objective)
        .expect("objective propagator")
        .set_bound(bound);
    p.engine.wake(objective);
}

struct Run {
    start: Instant,
    trace: Trace,
    best: Option<(Vec<bool>, u64)>,
}

impl Run {
    fn new(p: &mut SoftProblem, opts: &SolveOptions) -> Run {
        let start = Instant::now();
        p.engine.set_budget(opts.budget(start));
        Run {
            start,
            trace: Trace::default(),
            best: None,
        }
    }

    fn incumbent(&mut self, model: Vec<bool>, z: u64) {
        debug!("incumbent {z}");
        self.trace.incumbents.push(z);
        self.best = Some((model, z));
    }

    fn finish(self, p: &SoftProblem, status: Status, lower_bound: u64) -> OptimizeResult {
        let (model, cost) = match self.best {
            Some((m, z)) => (Some(m), Some(z)),
            None => (None, None),
        };
        OptimizeResult {
            status,
            model,
            cost,
            lower_bound,
            trace: self.trace,
            stats: p.engine.stats(),
            wall: self.start.elapsed(),
        }
    }
}

/// Find any model, then demand a strictly better one until none exists.
fn bnb(mut p: SoftProblem, opts: &SolveOptions) -> OptimizeResult {
    let mut run = Run::new(&mut p, opts);
    let violators = add_violators(&mut p);
    let obj = objective(&mut p, &violators);
    loop {
        reset_phases(&mut p, &violators);
        match p.engine.solve(&[]) {
            SolveOutcome::Sat(model) => {
                let z = p.cost(&model);
                run.incumbent(model, z);
                tighten(&mut p, obj, z);
            }
            SolveOutcome::Unsat(_) => {
                return match run.best.as_ref().map(|b| b.1) {
                    Some(z) => run.finish(&p, Status::Optimal, z),
                    None => run.finish(&p, Status::Unsatisfiable, 0),
                };
            }
            SolveOutcome::Unknown => return run.finish(&p, Status::Unknown, 0),
        }
    }
}

/// Soft items of the WPM1 working set.
struct Relaxable {
    /// Original literals plus violators added so far.
    lits: Vec<Lit>,
    weight: u64,
    assumption: Lit,
    clause: ClauseRef,
    /// Index of the soft item this copy descends from.
    origin: usize,
}

fn store_relaxable(p: &mut SoftProblem, lits: Vec<Lit>, weight: u64, origin: usize) -> Relaxable {
    let assumption = p.engine.new_bool_var();
    let mut clause = lits.clone();
    clause.push(!assumption);
    let clause = p.engine.add_clause(&clause, Origin::User).clause;
    Relaxable {
        lits,
        weight,
        assumption,
        clause,
        origin,
    }
}

/// Solve with every soft item enforced; relax each core with one fresh
/// violator per member under an at-most-one, until a model exists.
fn wpm1(mut p: SoftProblem, opts: &SolveOptions) -> OptimizeResult {
    let mut run = Run::new(&mut p, opts);
    let mut items: Vec<Relaxable> = (0..p.softs.len())
        .map(|j| {
            let (lits, w) = (p.softs[j].lits.clone(), p.softs[j].weight);
            store_relaxable(&mut p, lits, w, j)
        })
        .collect();
    let mut z_min = 0u64;
    loop {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.sort_by_key(|&k| {
            let s = &p.softs[items[k].origin];
            (Reverse(s.priority), s.source, k)
        });
        let assumptions: Vec<Lit> = order.iter().map(|&k| items[k].assumption).collect();
        match p.engine.solve(&assumptions) {
            SolveOutcome::Sat(model) => {
                debug_assert_eq!(p.cost(&model), z_min);
                run.incumbent(model, z_min);
                return run.finish(&p, Status::Optimal, z_min);
            }
            SolveOutcome::Unknown => return run.finish(&p, Status::Unknown, z_min),
            SolveOutcome::Unsat(core) => {
                let mut members: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|&k| core.contains(&items[k].assumption))
                    .collect();
                if members.is_empty() {
                    return run.finish(&p, Status::Unsatisfiable, z_min);
                }
                members.sort_unstable();
                let w_min = members.iter().map(|&k| items[k].weight).min().expect("nonempty core");
                z_min += w_min;
                let mut clauses: Vec<usize> = members.iter().map(|&k| p.softs[items[k].origin].source).collect();
                clauses.sort_unstable();
                clauses.dedup();
                debug!("core {clauses:?} w_min {w_min}");
                run.trace.cores.push(CoreRecord {
                    clauses,
                    temporaries: Vec::new(),
                    w_min: Some(w_min),
                    bound: None,
                });

                let stale: Vec<ClauseRef> = members.iter().map(|&k| items[k].clause).collect();
                p.engine.retract(&stale);
                let mut fresh = Vec::with_capacity(members.len());
                for &k in &members {
                    if items[k].weight > w_min {
                        let copy = store_relaxable(&mut p, items[k].lits.clone(), items[k].weight - w_min, items[k].origin);
                        items.push(copy);
                    }
                    let v = p.engine.new_bool_var();
                    p.engine.prefer(!v);
                    fresh.push(v);
                    let item = &mut items[k];
                    item.lits.push(v);
                    item.weight = w_min;
                    let mut clause = item.lits.clone();
                    clause.push(!item.assumption);
                    item.clause = p.engine.add_clause(&clause, Origin::User).clause;
                }
                post_at_most_one(&mut p.engine, &fresh, Origin::Relaxation);
            }
        }
    }
}

/// Start with every violator held false by a temporary assumption. Models
/// tighten the objective bound; cores release the temporaries they name.
fn msu3(mut p: SoftProblem, opts: &SolveOptions) -> OptimizeResult {
    let mut run = Run::new(&mut p, opts);
    let violators = add_violators(&mut p);
    let obj = objective(&mut p, &violators);
    let mut temporary: Vec<usize> = assumption_order(&p);
    loop {
        let assumptions: Vec<Lit> = temporary.iter().map(|&j| !violators[j]).collect();
        reset_phases(&mut p, &violators);
        match p.engine.solve(&assumptions) {
            SolveOutcome::Sat(model) => {
                let z = p.cost(&model);
                run.incumbent(model, z);
                tighten(&mut p, obj, z);
            }
            SolveOutcome::Unknown => return run.finish(&p, Status::Unknown, 0),
            SolveOutcome::Unsat(core) => {
                let released: Vec<usize> = temporary
                    .iter()
                    .copied()
                    .filter(|&j| core.contains(&!violators[j]))
                    .collect();
                let bound = run.best.as_ref().map(|b| b.1);
                if released.is_empty() {
                    run.trace.cores.push(CoreRecord {
                        bound,
                        ..CoreRecord::default()
                    });
                    return match run.best.as_ref().map(|b| b.1) {
                        Some(z) => run.finish(&p, Status::Optimal, z),
                        None => run.finish(&p, Status::Unsatisfiable, 0),
                    };
                }
                let mut ids: Vec<usize> = released.iter().map(|&j| p.softs[j].source).collect();
                ids.sort_unstable();
                debug!("released temporaries {ids:?}");
                run.trace.cores.push(CoreRecord {
                    clauses: Vec::new(),
                    temporaries: ids,
                    w_min: None,
                    bound,
                });
                temporary.retain(|j| !released.contains(j));
                p.engine.delete_learnts();
            }
        }
    }
}
