//! Conflict-driven Boolean engine.
//!
//! Two-watched-literal unit propagation, first-UIP learning, activity-based
//! branching with phase saving, geometric restarts, and solving under
//! assumptions with final-conflict core extraction. Propagators can be
//! attached; they explain every inference with a clause so learning works
//! across Boolean and non-Boolean reasoning alike.

mod heap;
mod lit;
mod propagator;

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use heap::VarHeap;
pub use lit::{Lit, Var};
pub use propagator::{
    Conflict, LitSource, PropId, PropagationContext, Propagator, Valuation,
};

/// Stable reference to a stored clause.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ClauseRef(u32);

impl ClauseRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Where a stored clause came from. Used to retract groups of clauses.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Origin {
    User,
    Explanation,
    Relaxation,
    Objective,
}

#[derive(Clone, Debug)]
pub(crate) enum Reason {
    Decision,
    Clause(ClauseRef),
    /// Reason clause produced by a propagator; the implied literal comes first.
    Explained(Box<[Lit]>),
}

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    origin: Origin,
    activity: f64,
    deleted: bool,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub var_decay: f64,
    pub clause_decay: f64,
    pub restarts: bool,
    pub restart_base: u64,
    pub restart_factor: f64,
    /// Recursive learnt-clause minimization.
    pub minimize: bool,
    /// Floor of the learnt-clause cap; the cap is `max(floor, 2 * original)`.
    pub learnt_cap_floor: usize,
    /// Re-verify trail reasons and learnt clauses at every conflict.
    pub self_check: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            var_decay: 0.95,
            clause_decay: 0.999,
            restarts: true,
            restart_base: 100,
            restart_factor: 1.5,
            minimize: false,
            learnt_cap_floor: 4000,
            self_check: false,
        }
    }
}

/// Resource limits. Without any limit the engine never reports
/// [`SolveOutcome::Unknown`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    /// Cap on the engine's lifetime conflict count.
    pub max_conflicts: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn with_timeout(timeout: Duration) -> Self {
        Budget {
            max_conflicts: None,
            deadline: Instant::now().checked_add(timeout),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
    pub deleted_learnts: u64,
    /// Retract requests naming clauses that do not exist (or are gone).
    pub retract_misses: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Total assignment indexed by variable.
    Sat(Vec<bool>),
    /// Subset of the assumptions that cannot hold together. Empty when the
    /// clauses are unsatisfiable on their own.
    Unsat(Vec<Lit>),
    Unknown,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

/// Result of adding a clause at root level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[must_use]
pub struct Added {
    pub clause: ClauseRef,
    /// The clause is falsified at root: the clause set is unsatisfiable.
    pub conflict: bool,
}

enum SearchResult {
    Sat(Vec<bool>),
    Unsat(Vec<Lit>),
    Restart,
    Unknown,
}

pub(crate) struct Core {
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<Watcher>>,
    learnts: Vec<ClauseRef>,
    original_live: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    prop_watches: Vec<Vec<PropId>>,
    prop_queue: VecDeque<PropId>,
    prop_queued: Vec<bool>,
    ok: bool,
    config: EngineConfig,
    stats: Stats,
    budget: Budget,
}

impl Core {
    fn new(config: EngineConfig) -> Self {
        Core {
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            clauses: Vec::new(),
            watches: Vec::new(),
            learnts: Vec::new(),
            original_live: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            prop_watches: Vec::new(),
            prop_queue: VecDeque::new(),
            prop_queued: Vec::new(),
            ok: true,
            config,
            stats: Stats::default(),
            budget: Budget::default(),
        }
    }

    fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub(crate) fn new_var(&mut self) -> Var {
        let v = Var::from_index(self.assigns.len());
        self.assigns.push(None);
        self.level.push(0);
        self.reason.push(Reason::Decision);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.prop_watches.push(Vec::new());
        self.prop_watches.push(Vec::new());
        self.heap.insert(v, &self.activity);
        v
    }

    #[inline]
    pub(crate) fn value_lit(&self, lit: Lit) -> Option<bool> {
        self.assigns[lit.var().index()].map(|v| v == lit.is_positive())
    }

    #[inline]
    pub(crate) fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    pub(crate) fn enqueue(&mut self, lit: Lit, reason: Reason) {
        let v = lit.var().index();
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(lit.is_positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
        for i in 0..self.prop_watches[lit.code()].len() {
            let p = self.prop_watches[lit.code()][i];
            self.schedule(p);
        }
    }

    pub(crate) fn wake_on(&mut self, lit: Lit, prop: PropId) {
        let list = &mut self.prop_watches[lit.code()];
        if !list.contains(&prop) {
            list.push(prop);
        }
    }

    fn schedule(&mut self, prop: PropId) {
        let i = prop.index();
        if i >= self.prop_queued.len() {
            self.prop_queued.resize(i + 1, false);
        }
        if !self.prop_queued[i] {
            self.prop_queued[i] = true;
            self.prop_queue.push_back(prop);
        }
    }

    fn clear_prop_queue(&mut self) {
        for p in self.prop_queue.drain(..) {
            self.prop_queued[p.index()] = false;
        }
    }

    fn push_clause(&mut self, lits: Vec<Lit>, learnt: bool, origin: Origin) -> ClauseRef {
        let cref = ClauseRef(self.clauses.len() as u32);
        self.clauses.push(ClauseData {
            lits,
            learnt,
            origin,
            activity: 0.0,
            deleted: false,
        });
        if learnt {
            self.learnts.push(cref);
            self.stats.learnt_clauses += 1;
        } else {
            self.original_live += 1;
        }
        cref
    }

    fn watch_clause(&mut self, cref: ClauseRef) {
        let lits = &self.clauses[cref.index()].lits;
        let (a, b) = (lits[0], lits[1]);
        self.watches[a.code()].push(Watcher { cref, blocker: b });
        self.watches[b.code()].push(Watcher { cref, blocker: a });
    }

    fn delete_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref.index()];
        if c.deleted {
            return;
        }
        c.deleted = true;
        c.lits = Vec::new();
        if c.learnt {
            self.stats.deleted_learnts += 1;
        } else {
            self.original_live -= 1;
        }
    }

    /// Store a model clause while search is in progress. The clause must
    /// have at least two literals; watched literals are chosen among the
    /// non-false ones so the watch invariant holds.
    pub(crate) fn add_clause_in_search(&mut self, lits: &[Lit], origin: Origin) {
        let mut lits = normalize(lits).expect("tautologies are never added during search");
        assert!(lits.len() >= 2, "clauses added during search need two literals");
        let rank = |core: &Core, l: Lit| match core.value_lit(l) {
            Some(true) => (0, 0),
            None => (1, 0),
            Some(false) => (2, u32::MAX - core.level[l.var().index()]),
        };
        lits.sort_by_key(|&l| rank(self, l));
        assert!(
            self.value_lit(lits[0]) != Some(false),
            "clause added during search is already falsified"
        );
        let unit = self.value_lit(lits[0]).is_none() && self.value_lit(lits[1]) == Some(false);
        let first = lits[0];
        let cref = self.push_clause(lits, false, origin);
        self.watch_clause(cref);
        if unit {
            self.enqueue(first, Reason::Clause(cref));
        }
    }

    /// Unit propagation over stored clauses.
    fn propagate_clauses(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value_lit(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[w.cref.index()];
                if clause.deleted {
                    continue;
                }
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                let first = clause.lits[0];
                let kept = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.assigns[first.var().index()] == Some(first.is_positive()) {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.lits.len() {
                    let l = clause.lits[k];
                    if self.assigns[l.var().index()] != Some(!l.is_positive()) {
                        clause.lits.swap(1, k);
                        self.watches[l.code()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                match self.value_lit(first) {
                    Some(false) => {
                        conflict = Some(Conflict::Clause(w.cref));
                        while i < ws.len() {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                    }
                    _ => self.enqueue(first, Reason::Clause(w.cref)),
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var();
            self.assigns[v.index()] = None;
            self.reason[v.index()] = Reason::Decision;
            self.phase[v.index()] = lit.is_positive();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
        self.clear_prop_queue();
    }

    fn reason_lits(&self, v: Var) -> &[Lit] {
        match &self.reason[v.index()] {
            Reason::Decision => &[],
            Reason::Clause(c) => &self.clauses[c.index()].lits,
            Reason::Explained(lits) => lits,
        }
    }

    fn conflict_lits(&self, conflict: &Conflict) -> Vec<Lit> {
        match conflict {
            Conflict::Clause(c) => self.clauses[c.index()].lits.clone(),
            Conflict::Lits(lits) => lits.clone(),
        }
    }

    fn bump_var(&mut self, v: Var) {
        let a = &mut self.activity[v.index()];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref.index()];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l.index()].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Requires at least one conflict literal at the
    /// current decision level. Returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, conflict: &Conflict) -> (Vec<Lit>, usize) {
        let level = self.decision_level() as u32;
        let mut learnt = vec![Lit::from_dimacs(1)];
        let mut to_clear = Vec::new();
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut implied: Option<Lit> = None;
        let mut clause = self.conflict_lits(conflict);
        if let Conflict::Clause(c) = conflict {
            self.bump_clause(*c);
        }
        loop {
            for &q in &clause {
                let v = q.var();
                if Some(v) == implied.map(Lit::var) {
                    continue;
                }
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.seen[v.index()] = true;
                    to_clear.push(v);
                    self.bump_var(v);
                    if self.level[v.index()] >= level {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var().index()] = false;
            implied = Some(p);
            pending -= 1;
            if pending == 0 {
                break;
            }
            if let Reason::Clause(c) = self.reason[p.var().index()] {
                self.bump_clause(c);
            }
            clause = self.reason_lits(p.var()).to_vec();
        }
        learnt[0] = !implied.expect("conflict has a literal at the current level");

        if self.config.minimize {
            let abstract_levels = learnt[1..]
                .iter()
                .fold(0u32, |acc, l| acc | self.abstract_level(l.var()));
            let mut keep = vec![learnt[0]];
            for &l in &learnt[1..] {
                let redundant = !matches!(self.reason[l.var().index()], Reason::Decision)
                    && self.lit_redundant(l, abstract_levels, &mut to_clear);
                if !redundant {
                    keep.push(l);
                }
            }
            learnt = keep;
        }
        for v in to_clear {
            self.seen[v.index()] = false;
        }

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut best = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[best].var().index()] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, backjump)
    }

    fn abstract_level(&self, v: Var) -> u32 {
        1 << (self.level[v.index()] & 31)
    }

    fn lit_redundant(&mut self, p: Lit, abstract_levels: u32, to_clear: &mut Vec<Var>) -> bool {
        let mut stack = vec![p];
        let top = to_clear.len();
        while let Some(q) = stack.pop() {
            let reason = self.reason_lits(q.var()).to_vec();
            for l in reason {
                let v = l.var();
                if v == q.var() || self.seen[v.index()] || self.level[v.index()] == 0 {
                    continue;
                }
                let decision = matches!(self.reason[v.index()], Reason::Decision);
                if !decision && self.abstract_level(v) & abstract_levels != 0 {
                    self.seen[v.index()] = true;
                    stack.push(l);
                    to_clear.push(v);
                } else {
                    for v in to_clear.drain(top..) {
                        self.seen[v.index()] = false;
                    }
                    return false;
                }
            }
        }
        true
    }

    /// Assumptions responsible for `failed` (an assumption found false).
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut core = vec![failed];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[failed.var().index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[i].var();
            if !self.seen[x.index()] {
                continue;
            }
            match &self.reason[x.index()] {
                Reason::Decision => core.push(self.trail[i]),
                _ => {
                    let ante: Vec<Lit> = self.reason_lits(x).to_vec();
                    for l in ante {
                        if l.var() != x && self.level[l.var().index()] > 0 {
                            self.seen[l.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[x.index()] = false;
        }
        self.seen[failed.var().index()] = false;
        core
    }

    fn check_trail(&self) -> Result<(), String> {
        let mut last = 0u32;
        for (i, &lit) in self.trail.iter().enumerate() {
            let v = lit.var();
            let lvl = self.level[v.index()];
            if lvl < last {
                return Err(format!("trail position {i}: level {lvl} after {last}"));
            }
            last = lvl;
            let reason = self.reason_lits(v);
            if reason.is_empty() {
                continue;
            }
            if !reason.contains(&lit) {
                return Err(format!("reason of {lit} does not contain it"));
            }
            for &r in reason {
                if r != lit && self.value_lit(r) != Some(false) {
                    return Err(format!("reason of {lit} has non-false literal {r}"));
                }
            }
        }
        Ok(())
    }

    fn budget_exhausted(&self) -> bool {
        if let Some(max) = self.budget.max_conflicts {
            if self.stats.conflicts >= max {
                return true;
            }
        }
        match self.budget.deadline {
            Some(d) => Instant::now() >= d,
            None => false,
        }
    }

    /// Evict the less active half of the learnt clauses once the database
    /// outgrows its cap. Only called at root level.
    fn reduce_learnts(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        let cap = self.config.learnt_cap_floor.max(2 * self.original_live);
        self.learnts.retain(|c| !self.clauses[c.index()].deleted);
        if self.learnts.len() <= cap {
            return;
        }
        let mut order = self.learnts.clone();
        order.sort_by(|a, b| {
            let (x, y) = (&self.clauses[a.index()], &self.clauses[b.index()]);
            x.activity.total_cmp(&y.activity).then(a.cmp(b))
        });
        let excess = order.len() / 2;
        for &c in order.iter().take(excess) {
            if self.clauses[c.index()].lits.len() > 2 {
                self.delete_clause(c);
            }
        }
        self.learnts.retain(|c| !self.clauses[c.index()].deleted);
    }
}

/// Sort, deduplicate, and reject tautologies.
fn normalize(lits: &[Lit]) -> Option<Vec<Lit>> {
    let mut v = lits.to_vec();
    v.sort();
    v.dedup();
    if v.windows(2).any(|w| w[0] == !w[1]) {
        None
    } else {
        Some(v)
    }
}

pub struct Engine {
    core: Core,
    propagators: Vec<Option<Box<dyn Propagator>>>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine::with_config(EngineConfig::default())
    }

    pub fn with_config(config: EngineConfig) -> Self {
        Engine {
            core: Core::new(config),
            propagators: Vec::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.core.config
    }

    pub fn set_budget(&mut self, budget: Budget) {
        self.core.budget = budget;
    }

    pub fn stats(&self) -> Stats {
        self.core.stats
    }

    pub fn num_vars(&self) -> usize {
        self.core.num_vars()
    }

    /// False once the clause set is known to be unsatisfiable at root.
    pub fn is_consistent(&self) -> bool {
        self.core.ok
    }

    pub fn new_bool_var(&mut self) -> Lit {
        self.core.new_var().pos()
    }

    /// Ask search to branch on `lit`'s variable early, trying `lit` first.
    /// Equivalent to one conflict bump plus a saved phase.
    pub fn prefer(&mut self, lit: Lit) {
        let v = lit.var();
        self.core.phase[v.index()] = lit.is_positive();
        self.core.bump_var(v);
    }

    /// Make `lit` the polarity tried first when its variable is decided.
    pub fn set_phase(&mut self, lit: Lit) {
        self.core.phase[lit.var().index()] = lit.is_positive();
    }

    /// Root-level value of a literal.
    pub fn root_value(&self, lit: Lit) -> Option<bool> {
        if self.core.decision_level() == 0 {
            self.core.value_lit(lit)
        } else {
            self.core.trail[..self.core.trail_lim[0]]
                .iter()
                .find(|l| l.var() == lit.var())
                .map(|&l| l == lit)
        }
    }

    /// Store a clause. Must be called at root level (between solves).
    pub fn add_clause(&mut self, lits: &[Lit], origin: Origin) -> Added {
        assert_eq!(self.core.decision_level(), 0, "clauses are added at root level");
        for l in lits {
            assert!(l.var().index() < self.num_vars(), "literal {l} names an unknown variable");
        }
        let Some(mut lits) = normalize(lits) else {
            let clause = self.core.push_clause(Vec::new(), false, origin);
            self.core.delete_clause(clause);
            return Added {
                clause,
                conflict: false,
            };
        };
        let rank = |core: &Core, l: Lit| match core.value_lit(l) {
            Some(true) => 0,
            None => 1,
            Some(false) => 2,
        };
        lits.sort_by_key(|&l| rank(&self.core, l));
        let len = lits.len();
        let first = lits.first().copied();
        let second = lits.get(1).copied();
        let clause = self.core.push_clause(lits, false, origin);
        let conflict = match (first, second) {
            (None, _) => true,
            (Some(a), None) => match self.core.value_lit(a) {
                Some(true) => false,
                Some(false) => true,
                None => {
                    self.core.enqueue(a, Reason::Clause(clause));
                    false
                }
            },
            (Some(a), Some(b)) => {
                self.core.watch_clause(clause);
                match (self.core.value_lit(a), self.core.value_lit(b)) {
                    (Some(false), _) => true,
                    (None, Some(false)) => {
                        self.core.enqueue(a, Reason::Clause(clause));
                        false
                    }
                    _ => false,
                }
            }
        };
        debug_assert!(len > 0 || conflict);
        if conflict {
            self.core.ok = false;
        }
        Added { clause, conflict }
    }

    /// Literals of a live clause.
    pub fn clause(&self, cref: ClauseRef) -> Option<&[Lit]> {
        self.core
            .clauses
            .get(cref.index())
            .filter(|c| !c.deleted)
            .map(|c| c.lits.as_slice())
    }

    pub fn clause_origin(&self, cref: ClauseRef) -> Option<Origin> {
        self.core
            .clauses
            .get(cref.index())
            .filter(|c| !c.deleted)
            .map(|c| c.origin)
    }

    /// Live non-learnt clauses.
    pub fn original_clauses(&self) -> Vec<Vec<Lit>> {
        self.core
            .clauses
            .iter()
            .filter(|c| !c.deleted && !c.learnt)
            .map(|c| c.lits.clone())
            .collect()
    }

    pub fn learnt_clauses(&self) -> Vec<Vec<Lit>> {
        self.core
            .learnts
            .iter()
            .map(|c| &self.core.clauses[c.index()])
            .filter(|c| !c.deleted)
            .map(|c| c.lits.clone())
            .collect()
    }

    /// Remove the named clauses, then every learnt clause. Unknown or
    /// already-removed references are counted in
    /// [`Stats::retract_misses`] and otherwise ignored.
    pub fn retract(&mut self, clauses: &[ClauseRef]) {
        self.core.cancel_until(0);
        for &c in clauses {
            match self.core.clauses.get(c.index()) {
                Some(data) if !data.deleted => self.core.delete_clause(c),
                _ => self.core.stats.retract_misses += 1,
            }
        }
        self.reset_root();
    }

    /// Remove every live clause with the given origin, then every learnt clause.
    pub fn retract_origin(&mut self, origin: Origin) {
        let named: Vec<ClauseRef> = (0..self.core.clauses.len())
            .map(|i| ClauseRef(i as u32))
            .filter(|c| {
                let d = &self.core.clauses[c.index()];
                !d.deleted && !d.learnt && d.origin == origin
            })
            .collect();
        self.retract(&named);
    }

    pub fn delete_learnts(&mut self) {
        self.retract(&[]);
    }

    /// Drop learnt clauses and every root-level consequence, then re-seed
    /// the root from unit clauses. Propagators re-run on the next solve.
    fn reset_root(&mut self) {
        let core = &mut self.core;
        core.cancel_until(0);
        for c in std::mem::take(&mut core.learnts) {
            core.delete_clause(c);
        }
        for lit in std::mem::take(&mut core.trail) {
            let v = lit.var();
            core.assigns[v.index()] = None;
            core.reason[v.index()] = Reason::Decision;
            core.heap.insert(v, &core.activity);
        }
        core.qhead = 0;
        core.clear_prop_queue();
        let clauses = &core.clauses;
        for list in core.watches.iter_mut() {
            list.retain(|w| !clauses[w.cref.index()].deleted);
        }
        core.ok = true;
        for i in 0..core.clauses.len() {
            let c = &core.clauses[i];
            if c.deleted || c.lits.len() > 1 {
                continue;
            }
            match c.lits.first().copied() {
                None => core.ok = false,
                Some(l) => match core.value_lit(l) {
                    None => core.enqueue(l, Reason::Clause(ClauseRef(i as u32))),
                    Some(true) => {}
                    Some(false) => core.ok = false,
                },
            }
        }
        for i in 0..self.propagators.len() {
            self.core.schedule(PropId(i as u32));
        }
    }

    pub fn next_propagator_id(&self) -> PropId {
        PropId(self.propagators.len() as u32)
    }

    pub fn attach_propagator(&mut self, propagator: Box<dyn Propagator>) -> PropId {
        assert_eq!(self.core.decision_level(), 0, "propagators are attached at root level");
        let id = self.next_propagator_id();
        for lit in propagator.watched_literals() {
            self.core.wake_on(lit, id);
        }
        self.propagators.push(Some(propagator));
        self.core.schedule(id);
        id
    }

    pub fn propagator_mut<T: Propagator>(&mut self, id: PropId) -> Option<&mut T> {
        let p: &mut dyn Propagator = self.propagators.get_mut(id.index())?.as_mut()?.as_mut();
        (p as &mut dyn std::any::Any).downcast_mut::<T>()
    }

    /// Queue a propagator, e.g. after its parameters were tightened.
    pub fn wake(&mut self, id: PropId) {
        self.core.schedule(id);
    }

    fn propagate(&mut self) -> Option<Conflict> {
        loop {
            if let Some(c) = self.core.propagate_clauses() {
                return Some(c);
            }
            let id = self.core.prop_queue.pop_front()?;
            self.core.prop_queued[id.index()] = false;
            let mut p = self.propagators[id.index()].take().expect("propagator is not re-entrant");
            let result = p.propagate(&mut PropagationContext {
                core: &mut self.core,
                current: id,
            });
            self.propagators[id.index()] = Some(p);
            if let Err(c) = result {
                self.core.clear_prop_queue();
                return Some(c);
            }
        }
    }

    fn ask_propagators_for_decision(&mut self) -> Option<Lit> {
        for i in 0..self.propagators.len() {
            let mut p = self.propagators[i].take().expect("propagator is not re-entrant");
            let lit = p.decide(&mut PropagationContext {
                core: &mut self.core,
                current: PropId(i as u32),
            });
            self.propagators[i] = Some(p);
            if let Some(l) = lit {
                assert!(self.core.value_lit(l).is_none(), "propagator decided an assigned literal");
                return Some(l);
            }
        }
        None
    }

    /// Returns false if the conflict is at root level.
    fn handle_conflict(&mut self, conflict: Conflict) -> bool {
        let lits = self.core.conflict_lits(&conflict);
        let top = lits
            .iter()
            .map(|l| self.core.level[l.var().index()] as usize)
            .max()
            .unwrap_or(0);
        if top == 0 {
            return false;
        }
        if top < self.core.decision_level() {
            self.core.cancel_until(top);
        }
        let (learnt, backjump) = self.core.analyze(&conflict);
        if self.core.config.self_check {
            if let Err(e) = self.core.check_trail() {
                panic!("engine self-check: {e}");
            }
            for &l in &learnt {
                assert_eq!(
                    self.core.value_lit(l),
                    Some(false),
                    "engine self-check: learnt literal {l} not falsified at conflict level"
                );
            }
        }
        self.core.cancel_until(backjump);
        let asserting = learnt[0];
        let len = learnt.len();
        let cref = self.core.push_clause(learnt, true, Origin::Explanation);
        if len > 1 {
            self.core.watch_clause(cref);
        }
        self.core.bump_clause(cref);
        self.core.enqueue(asserting, Reason::Clause(cref));
        self.core.var_inc /= self.core.config.var_decay;
        self.core.cla_inc /= self.core.config.clause_decay;
        true
    }

    fn search(&mut self, conflict_limit: Option<u64>, assumptions: &[Lit]) -> SearchResult {
        let mut local_conflicts = 0u64;
        let mut pending: Option<Conflict> = None;
        let mut since_clock = 0u32;
        loop {
            let conflict = match pending.take() {
                Some(c) => Some(c),
                None => self.propagate(),
            };
            if let Some(c) = conflict {
                self.core.stats.conflicts += 1;
                local_conflicts += 1;
                if !self.handle_conflict(c) {
                    self.core.ok = false;
                    return SearchResult::Unsat(Vec::new());
                }
                if self.core.budget_exhausted() {
                    return SearchResult::Unknown;
                }
                continue;
            }
            if conflict_limit.is_some_and(|limit| local_conflicts >= limit) {
                self.core.cancel_until(0);
                return SearchResult::Restart;
            }
            since_clock += 1;
            if since_clock >= 512 {
                since_clock = 0;
                if self.core.budget_exhausted() {
                    return SearchResult::Unknown;
                }
            }

            let mut next = None;
            while self.core.decision_level() < assumptions.len() {
                let a = assumptions[self.core.decision_level()];
                match self.core.value_lit(a) {
                    Some(true) => self.core.trail_lim.push(self.core.trail.len()),
                    Some(false) => return SearchResult::Unsat(self.core.analyze_final(a)),
                    None => {
                        next = Some(a);
                        break;
                    }
                }
            }
            if next.is_none() {
                while let Some(v) = self.core.heap.pop(&self.core.activity) {
                    if self.core.assigns[v.index()].is_none() {
                        next = Some(v.lit(self.core.phase[v.index()]));
                        break;
                    }
                }
            }
            if next.is_none() {
                next = self.ask_propagators_for_decision();
            }
            match next {
                Some(lit) => {
                    self.core.stats.decisions += 1;
                    self.core.trail_lim.push(self.core.trail.len());
                    self.core.enqueue(lit, Reason::Decision);
                }
                None => {
                    let before = self.core.trail.len();
                    for i in 0..self.propagators.len() {
                        self.core.schedule(PropId(i as u32));
                    }
                    match self.propagate() {
                        Some(c) => pending = Some(c),
                        None => {
                            if self.core.trail.len() == before
                                && self.core.trail.len() == self.core.num_vars()
                            {
                                let model = self.core.assigns.iter().map(|v| v.unwrap_or(false)).collect();
                                return SearchResult::Sat(model);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Run clause and propagator propagation to fixpoint at root level.
    /// Returns false if the root is inconsistent.
    pub fn propagate_root(&mut self) -> bool {
        self.core.cancel_until(0);
        if self.core.ok && self.propagate().is_some() {
            self.core.ok = false;
        }
        self.core.ok
    }

    /// Solve under `assumptions`, which are tried in the given order.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveOutcome {
        for a in assumptions {
            assert!(a.var().index() < self.num_vars(), "assumption {a} names an unknown variable");
        }
        self.core.cancel_until(0);
        if !self.core.ok {
            return SolveOutcome::Unsat(Vec::new());
        }
        self.core.reduce_learnts();
        let mut limit = self.core.config.restart_base as f64;
        loop {
            let budget = self.core.config.restarts.then_some(limit.max(1.0) as u64);
            match self.search(budget, assumptions) {
                SearchResult::Restart => {
                    self.core.stats.restarts += 1;
                    limit *= self.core.config.restart_factor;
                    self.core.reduce_learnts();
                }
                SearchResult::Sat(model) => {
                    self.core.cancel_until(0);
                    return SolveOutcome::Sat(model);
                }
                SearchResult::Unsat(core) => {
                    self.core.cancel_until(0);
                    return SolveOutcome::Unsat(core);
                }
                SearchResult::Unknown => {
                    self.core.cancel_until(0);
                    return SolveOutcome::Unknown;
                }
            }
        }
    }
}

impl Valuation for Engine {
    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.core.value_lit(lit)
    }
}

impl LitSource for Engine {
    fn fresh_lit(&mut self) -> Lit {
        self.new_bool_var()
    }

    fn add_model_clause(&mut self, lits: &[Lit], origin: Origin) {
        let _ = self.add_clause(lits, origin);
    }

    fn wake_on(&mut self, lit: Lit, prop: PropId) {
        self.core.wake_on(lit, prop);
    }
}

#[cfg(test)]
mod tests;
