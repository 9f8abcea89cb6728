//! Weighted partial MaxSAT: instances, WCNF I/O and the three optimization
//! drivers (branch-and-bound, WPM1 and MSU3).
//!
//! Drivers work on a [`SoftProblem`]: an engine already holding the hard part
//! of the problem, plus a list of soft items. A soft item is either a clause
//! of a WCNF instance or an indicator literal of a half-reified CP
//! constraint; in both cases its cost is paid when its literals are all false.

mod drivers;
mod wcnf;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::engine::{Budget, Engine, EngineConfig, Lit, Origin, Stats, Valuation, Var};

pub use drivers::{solve, solve_bnb, solve_msu3, solve_wpm1};
pub use wcnf::{parse_wcnf, write_wcnf, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    Soft(u64),
    Hard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedClause {
    pub lits: Vec<Lit>,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoftInstance {
    pub num_vars: usize,
    /// Weight that marks a clause as hard in WCNF.
    pub top: u64,
    pub clauses: Vec<WeightedClause>,
}

impl SoftInstance {
    /// Sum of the weights of soft clauses falsified by `model`, or `None`
    /// if a hard clause is falsified.
    pub fn cost(&self, model: &[bool]) -> Option<u64> {
        let mut cost = 0u64;
        for c in &self.clauses {
            if c.lits.iter().any(|&l| model.is_true(l)) {
                continue;
            }
            match c.weight {
                Weight::Hard => return None,
                Weight::Soft(w) => cost += w,
            }
        }
        Some(cost)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaxSatError {
    #[error("indicator {0} is listed twice")]
    DuplicateIndicator(Lit),
    #[error("soft weights must be positive")]
    ZeroWeight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    BranchAndBound,
    Wpm1,
    Msu3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::BranchAndBound, Algorithm::Wpm1, Algorithm::Msu3];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BranchAndBound => "bnb",
            Algorithm::Wpm1 => "wpm1",
            Algorithm::Msu3 => "msu3",
        }
    }

    pub fn from_name(name: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// One soft item as presented to the drivers.
#[derive(Clone, Debug)]
pub(crate) struct Soft {
    /// Engine literals of the original clause.
    pub lits: Vec<Lit>,
    pub weight: u64,
    /// Caller-facing id: clause index in the instance, or indicator index.
    pub source: usize,
    /// Singleton indicator; B&B and MSU3 use its negation as violator.
    pub fused: bool,
    /// Assumption order key: larger goes first.
    pub priority: usize,
}

/// The hard part of a problem loaded in an engine, plus its soft items.
pub struct SoftProblem {
    pub(crate) engine: Engine,
    pub(crate) softs: Vec<Soft>,
}

impl SoftProblem {
    pub fn from_instance(inst: &SoftInstance) -> SoftProblem {
        SoftProblem::from_instance_with_config(inst, EngineConfig::default())
    }

    pub fn from_instance_with_config(inst: &SoftInstance, config: EngineConfig) -> SoftProblem {
        let mut engine = Engine::with_config(config);
        for _ in 0..inst.num_vars {
            engine.new_bool_var();
        }
        // Fail-first order: a soft clause clashing with many other clauses
        // is assumed early, so cores tend to surface before deep search.
        let mut occurrences = vec![0usize; 2 * inst.num_vars];
        for c in &inst.clauses {
            for &l in &c.lits {
                occurrences[lit_slot(l)] += 1;
            }
        }
        let mut softs = Vec::new();
        for (j, c) in inst.clauses.iter().enumerate() {
            match c.weight {
                Weight::Hard => {
                    let _ = engine.add_clause(&c.lits, Origin::User);
                }
                Weight::Soft(w) => {
                    let priority = c.lits.iter().map(|&l| occurrences[lit_slot(!l)]).sum();
                    softs.push(Soft {
                        lits: c.lits.clone(),
                        weight: w,
                        source: j,
                        fused: false,
                        priority,
                    });
                }
            }
        }
        SoftProblem { engine, softs }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn num_softs(&self) -> usize {
        self.softs.len()
    }

    /// Cost of `model` against the original soft items.
    pub fn cost(&self, model: &[bool]) -> u64 {
        self.softs
            .iter()
            .filter(|s| !s.lits.iter().any(|&l| model.is_true(l)))
            .map(|s| s.weight)
            .sum()
    }

    /// Ids of the soft items violated by `model`.
    pub fn violated(&self, model: &[bool]) -> Vec<usize> {
        self.softs
            .iter()
            .filter(|s| !s.lits.iter().any(|&l| model.is_true(l)))
            .map(|s| s.source)
            .collect()
    }
}

fn lit_slot(l: Lit) -> usize {
    2 * l.var().index() + usize::from(!l.is_positive())
}

/// Present indicator literals of an engine-hosted hard model as weighted
/// soft singleton clauses `{i}`.
pub fn wrap_indicators(engine: Engine, indicators: &[(Lit, u64)]) -> Result<SoftProblem, MaxSatError> {
    let mut seen = HashSet::new();
    let mut softs = Vec::with_capacity(indicators.len());
    for (j, &(lit, w)) in indicators.iter().enumerate() {
        if !seen.insert(lit.var()) {
            return Err(MaxSatError::DuplicateIndicator(lit));
        }
        if w == 0 {
            return Err(MaxSatError::ZeroWeight);
        }
        softs.push(Soft {
            lits: vec![lit],
            weight: w,
            source: j,
            fused: true,
            priority: 0,
        });
    }
    Ok(SoftProblem { engine, softs })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub timeout: Option<Duration>,
    pub max_conflicts: Option<u64>,
}

impl SolveOptions {
    pub(crate) fn budget(&self, start: Instant) -> Budget {
        Budget {
            max_conflicts: self.max_conflicts,
            deadline: self.timeout.map(|t| start + t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Unsatisfiable,
    Unknown,
}

/// A core as seen by a driver.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoreRecord {
    /// Soft items whose assumptions appear in the core (WPM1).
    pub clauses: Vec<usize>,
    /// Soft items whose temporary clauses appear in the core (MSU3).
    pub temporaries: Vec<usize>,
    /// Lower-bound increase charged for the core (WPM1).
    pub w_min: Option<u64>,
    /// Strict objective bound in force when the core was found (MSU3).
    pub bound: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    /// Objective of every model found, in order.
    pub incumbents: Vec<u64>,
    pub cores: Vec<CoreRecord>,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub status: Status,
    /// Best model over all engine variables.
    pub model: Option<Vec<bool>>,
    pub cost: Option<u64>,
    /// Proven lower bound on the optimum.
    pub lower_bound: u64,
    pub trace: Trace,
    pub stats: Stats,
    pub wall: Duration,
}

impl OptimizeResult {
    /// Solver output in the usual MaxSAT evaluation shape: one `o` line per
    /// incumbent, an `s` line, and a `v` line over the first `num_vars`
    /// variables when a model exists.
    pub fn format(&self, num_vars: usize) -> String {
        let mut out = String::new();
        for z in &self.trace.incumbents {
            let _ = writeln!(out, "o {z}");
        }
        let s = match self.status {
            Status::Optimal => "OPTIMUM FOUND",
            Status::Unsatisfiable => "UNSATISFIABLE",
            Status::Unknown => "UNKNOWN",
        };
        let _ = writeln!(out, "s {s}");
        if let Some(model) = &self.model {
            out.push('v');
            for i in 0..num_vars.min(model.len()) {
                let lit = Var::from_id(i as u32 + 1).lit(model[i]);
                let _ = write!(out, " {}", lit.to_dimacs());
            }
            out.push('\n');
        }
        out
    }
}
