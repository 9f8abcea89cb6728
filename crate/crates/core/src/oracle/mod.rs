//! Exhaustive reference solvers used to check the real ones on small inputs.
//!
//! Everything here is deliberately naive and shares no code with the
//! engine: models are plain `Vec<bool>` and start-time vectors.

use thiserror::Error;

use crate::engine::{Lit, Valuation};
use crate::maxsat::{SoftInstance, Weight};
use crate::rcpsp::SoftPrecedenceProblem;

/// Largest variable count `brute_force_maxsat` and the core checks accept.
pub const MAX_VARS: usize = 22;
/// Largest product of start-domain sizes `brute_force_schedule` accepts.
pub const MAX_GRID: u128 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the enumeration guard of {MAX_VARS}")]
    TooManyVars { vars: usize },
    #[error("start grid of {size} points exceeds the enumeration guard of {MAX_GRID}")]
    GridTooLarge { size: u128 },
    #[error("clause id {id} out of range")]
    IdOutOfRange { id: usize },
    #[error("clause {id} is hard")]
    NotSoft { id: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult<W> {
    /// `None` when the hard part is infeasible.
    pub optimum: Option<u64>,
    pub witness: Option<W>,
}

impl<W> OracleResult<W> {
    fn infeasible() -> Self {
        OracleResult {
            optimum: None,
            witness: None,
        }
    }
}

fn guard(n: usize) -> Result<(), OracleError> {
    if n > MAX_VARS {
        Err(OracleError::TooManyVars { vars: n })
    } else {
        Ok(())
    }
}

/// Every assignment to `n` variables.
fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

fn satisfies(m: &[bool], clause: &[Lit]) -> bool {
    clause.iter().any(|&l| m.is_true(l))
}

pub fn brute_force_maxsat(inst: &SoftInstance) -> Result<OracleResult<Vec<bool>>, OracleError> {
    guard(inst.num_vars)?;
    let mut best = OracleResult::infeasible();
    for m in assignments(inst.num_vars) {
        if let Some(c) = inst.cost(&m) {
            if best.optimum.is_none_or(|b| c < b) {
                best = OracleResult {
                    optimum: Some(c),
                    witness: Some(m),
                };
            }
        }
    }
    Ok(best)
}

fn soft_clauses<'a>(inst: &'a SoftInstance, ids: &[usize]) -> Result<Vec<&'a [Lit]>, OracleError> {
    ids.iter()
        .map(|&id| {
            let c = inst.clauses.get(id).ok_or(OracleError::IdOutOfRange { id })?;
            match c.weight {
                Weight::Soft(_) => Ok(c.lits.as_slice()),
                Weight::Hard => Err(OracleError::NotSoft { id }),
            }
        })
        .collect()
}

fn hard_ok(inst: &SoftInstance, m: &[bool]) -> bool {
    inst.clauses
        .iter()
        .filter(|c| c.weight == Weight::Hard)
        .all(|c| satisfies(m, &c.lits))
}

/// True iff the hard clauses together with the soft clauses `core`
/// (0-based clause indices) have no model.
pub fn verify_core(inst: &SoftInstance, core: &[usize]) -> Result<bool, OracleError> {
    guard(inst.num_vars)?;
    let members = soft_clauses(inst, core)?;
    Ok(!assignments(inst.num_vars).any(|m| hard_ok(inst, &m) && members.iter().all(|c| satisfies(&m, c))))
}

/// True iff no model satisfies the hard clauses and the clauses `core`
/// while costing strictly less than `bound` (`None`: no bound).
pub fn verify_core_bounded(inst: &SoftInstance, core: &[usize], bound: Option<u64>) -> Result<bool, OracleError> {
    guard(inst.num_vars)?;
    let members = soft_clauses(inst, core)?;
    Ok(!assignments(inst.num_vars).any(|m| {
        members.iter().all(|c| satisfies(&m, c)) && inst.cost(&m).is_some_and(|z| bound.is_none_or(|b| z < b))
    }))
}

/// True iff `clauses` plus the unit clauses `lits` have no model over
/// `num_vars` variables.
pub fn verify_literal_core(num_vars: usize, clauses: &[Vec<Lit>], lits: &[Lit]) -> Result<bool, OracleError> {
    guard(num_vars)?;
    Ok(!assignments(num_vars).any(|m| lits.iter().all(|&l| m.is_true(l)) && clauses.iter().all(|c| satisfies(&m, c))))
}

/// Weight of the precedences `starts` violates, or `None` if `starts`
/// leaves the window or overloads a resource.
pub fn schedule_cost(p: &SoftPrecedenceProblem, starts: &[i64]) -> Option<u64> {
    let inst = &p.base;
    for (t, &s) in inst.tasks.iter().zip(starts) {
        if s < 0 || s + t.duration > p.horizon {
            return None;
        }
    }
    for (r, &cap) in inst.capacities.iter().enumerate() {
        for time in 0..p.horizon.max(0) {
            let load: i64 = inst
                .tasks
                .iter()
                .zip(starts)
                .filter(|&(t, &s)| s <= time && time < s + t.duration)
                .map(|(t, _)| t.demands[r])
                .sum();
            if load > cap {
                return None;
            }
        }
    }
    Some(
        inst.precedences
            .iter()
            .zip(&p.weights)
            .filter(|(q, _)| starts[q.to] - starts[q.from] < q.lag)
            .map(|(_, &w)| w)
            .sum(),
    )
}

/// Exact optimum by enumerating start times task by task, with a running
/// resource profile and pruning on the cost of already-decided precedences.
pub fn brute_force_schedule(p: &SoftPrecedenceProblem) -> Result<OracleResult<Vec<i64>>, OracleError> {
    let inst = &p.base;
    let mut size: u128 = 1;
    for t in &inst.tasks {
        let d = (p.horizon - t.duration + 1).max(0) as u128;
        if d == 0 {
            return Ok(OracleResult::infeasible());
        }
        size = size.saturating_mul(d);
    }
    if size > MAX_GRID {
        return Err(OracleError::GridTooLarge { size });
    }

    let mut search = Search {
        p,
        starts: vec![0; inst.tasks.len()],
        profile: vec![vec![0; p.horizon as usize]; inst.capacities.len()],
        best: None,
    };
    search.go(0, 0);
    Ok(match search.best {
        Some((z, w)) => OracleResult {
            optimum: Some(z),
            witness: Some(w),
        },
        None => OracleResult::infeasible(),
    })
}

struct Search<'a> {
    p: &'a SoftPrecedenceProblem,
    starts: Vec<i64>,
    profile: Vec<Vec<i64>>,
    best: Option<(u64, Vec<i64>)>,
}

impl Search<'_> {
    fn go(&mut self, k: usize, cost: u64) {
        let inst = &self.p.base;
        if self.best.as_ref().is_some_and(|b| cost >= b.0) {
            return;
        }
        if k == inst.tasks.len() {
            self.best = Some((cost, self.starts.clone()));
            return;
        }
        let task = &inst.tasks[k];
        for s in 0..=self.p.horizon - task.duration {
            let span = s as usize..(s + task.duration) as usize;
            let fits = inst.capacities.iter().enumerate().all(|(r, &cap)| {
                task.demands[r] == 0 || self.profile[r][span.clone()].iter().all(|&l| l + task.demands[r] <= cap)
            });
            if !fits {
                continue;
            }
            self.starts[k] = s;
            // Precedences whose later endpoint is k are now decided.
            let added: u64 = inst
                .precedences
                .iter()
                .zip(&self.p.weights)
                .filter(|(q, _)| q.from.max(q.to) == k && self.starts[q.to] - self.starts[q.from] < q.lag)
                .map(|(_, &w)| w)
                .sum();
            for r in 0..inst.capacities.len() {
                for t in span.clone() {
                    self.profile[r][t] += task.demands[r];
                }
            }
            self.go(k + 1, cost + added);
            for r in 0..inst.capacities.len() {
                for t in span.clone() {
                    self.profile[r][t] -= task.demands[r];
                }
            }
        }
    }
}
