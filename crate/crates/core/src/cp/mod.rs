//! Lazy clause generation layer.
//!
//! Integer variables are represented by order literals `[x >= v]` that are
//! created on first request. Propagators read bounds off those literals and
//! explain every bound change with a clause over them, so the Boolean engine
//! learns nogoods that mix integer and Boolean reasoning.

mod cumulative;
mod linear;
mod pb;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use thiserror::Error;

use crate::engine::{Conflict, Engine, Lit, LitSource, Origin, PropId, PropagationContext, Propagator, Valuation};

pub use cumulative::{CumulativeConstraint, CumulativeTask, TimetablePropagator};
pub use linear::HalfReifiedLinear;
pub use pb::PbUpperBound;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CpError {
    #[error("empty domain [{lb}, {ub}]")]
    EmptyDomain { lb: i64, ub: i64 },
    #[error("linear constraint without terms")]
    NoTerms,
    #[error("constraint is infeasible at root level")]
    RootConflict,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IntVar(u32);

impl IntVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
struct IntVarData {
    lb: i64,
    ub: i64,
    /// `[x >= v]` for lb < v <= ub, in value order.
    geq: BTreeMap<i64, Lit>,
    eq: BTreeMap<i64, Lit>,
    subscribers: Vec<PropId>,
}

/// Current bounds of an integer variable together with the literals that
/// establish them. A bound equal to the original one has no literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lb: i64,
    pub ub: i64,
    /// True literal `[x >= lb]`.
    pub lb_lit: Option<Lit>,
    /// True literal `![x >= ub + 1]`.
    pub ub_lit: Option<Lit>,
}

impl Bounds {
    pub fn is_fixed(&self) -> bool {
        self.lb == self.ub
    }
}

/// Integer variables and their materialized domain literals.
#[derive(Debug)]
pub struct DomainStore {
    vars: Vec<IntVarData>,
    true_lit: Lit,
}

pub type Domains = Rc<RefCell<DomainStore>>;

impl DomainStore {
    pub fn true_lit(&self) -> Lit {
        self.true_lit
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn original_bounds(&self, x: IntVar) -> (i64, i64) {
        let d = &self.vars[x.index()];
        (d.lb, d.ub)
    }

    /// Materialized `[x >= v]` literals in value order.
    pub fn geq_literals(&self, x: IntVar) -> Vec<(i64, Lit)> {
        self.vars[x.index()].geq.iter().map(|(&v, &l)| (v, l)).collect()
    }

    /// The literal `[x >= v]`, created if needed. Values at or below the
    /// original lower bound give the root-true literal, values above the
    /// original upper bound its negation.
    pub fn geq<S: LitSource + ?Sized>(&mut self, src: &mut S, x: IntVar, v: i64) -> Lit {
        let d = &self.vars[x.index()];
        if v <= d.lb {
            return self.true_lit;
        }
        if v > d.ub {
            return !self.true_lit;
        }
        if let Some(&l) = d.geq.get(&v) {
            return l;
        }
        let below = d.geq.range(..v).next_back().map(|(_, &l)| l);
        let above = d.geq.range(v + 1..).next().map(|(_, &l)| l);
        let subscribers = d.subscribers.clone();
        let lit = src.fresh_lit();
        if let Some(lo) = below {
            src.add_model_clause(&[!lit, lo], Origin::Explanation);
        }
        if let Some(hi) = above {
            src.add_model_clause(&[!hi, lit], Origin::Explanation);
        }
        for p in subscribers {
            src.wake_on(lit, p);
            src.wake_on(!lit, p);
        }
        self.vars[x.index()].geq.insert(v, lit);
        lit
    }

    /// `[x <= v]`, i.e. `![x >= v + 1]`.
    pub fn leq<S: LitSource + ?Sized>(&mut self, src: &mut S, x: IntVar, v: i64) -> Lit {
        !self.geq(src, x, v + 1)
    }

    pub fn bounds<A: Valuation + ?Sized>(&self, a: &A, x: IntVar) -> Bounds {
        let d = &self.vars[x.index()];
        let mut b = Bounds {
            lb: d.lb,
            ub: d.ub,
            lb_lit: None,
            ub_lit: None,
        };
        for (&v, &l) in d.geq.iter().rev() {
            if a.is_true(l) {
                b.lb = v;
                b.lb_lit = Some(l);
                break;
            }
        }
        for (&v, &l) in d.geq.iter() {
            if a.is_false(l) {
                b.ub = v - 1;
                b.ub_lit = Some(!l);
                break;
            }
        }
        b
    }

    /// Value of `x` in a total model: the largest `v` with `[x >= v]` true.
    pub fn value_in(&self, model: &[bool], x: IntVar) -> i64 {
        self.bounds(model, x).lb
    }

    fn subscribe<S: LitSource + ?Sized>(&mut self, src: &mut S, x: IntVar, p: PropId) {
        let d = &mut self.vars[x.index()];
        if !d.subscribers.contains(&p) {
            d.subscribers.push(p);
        }
        for &l in d.geq.values() {
            src.wake_on(l, p);
            src.wake_on(!l, p);
        }
    }

    /// Tighten the lower bound of `x` to `v`, explained by `reason`.
    pub(crate) fn set_lb(
        &mut self,
        ctx: &mut PropagationContext<'_>,
        x: IntVar,
        v: i64,
        reason: &[Lit],
    ) -> Result<(), Conflict> {
        let b = self.bounds(ctx, x);
        if v <= b.lb {
            return Ok(());
        }
        if v > b.ub {
            let mut nogood = reason.to_vec();
            nogood.extend(b.ub_lit);
            return Err(ctx.fail(&nogood));
        }
        let lit = self.geq(ctx, x, v);
        ctx.post(lit, reason)
    }

    /// Tighten the upper bound of `x` to `v`, explained by `reason`.
    pub(crate) fn set_ub(
        &mut self,
        ctx: &mut PropagationContext<'_>,
        x: IntVar,
        v: i64,
        reason: &[Lit],
    ) -> Result<(), Conflict> {
        let b = self.bounds(ctx, x);
        if v >= b.ub {
            return Ok(());
        }
        if v < b.lb {
            let mut nogood = reason.to_vec();
            nogood.extend(b.lb_lit);
            return Err(ctx.fail(&nogood));
        }
        let lit = self.geq(ctx, x, v + 1);
        ctx.post(!lit, reason)
    }
}

/// Branches on integer variables left unfixed once every existing Boolean
/// is assigned, trying the smallest remaining value first.
struct IntBrancher {
    domains: Domains,
}

impl Propagator for IntBrancher {
    fn name(&self) -> &'static str {
        "int-brancher"
    }

    fn watched_literals(&self) -> Vec<Lit> {
        Vec::new()
    }

    fn propagate(&mut self, _: &mut PropagationContext<'_>) -> Result<(), Conflict> {
        Ok(())
    }

    fn decide(&mut self, ctx: &mut PropagationContext<'_>) -> Option<Lit> {
        let mut store = self.domains.borrow_mut();
        for i in 0..store.vars.len() {
            let x = IntVar(i as u32);
            let b = store.bounds(ctx, x);
            if !b.is_fixed() {
                return Some(store.leq(ctx, x, b.lb));
            }
        }
        None
    }
}

/// An engine together with the integer variables living in it.
pub struct Model {
    engine: Engine,
    domains: Domains,
}

impl Default for Model {
    fn default() -> Self {
        Model::new(Engine::new())
    }
}

impl Model {
    pub fn new(mut engine: Engine) -> Self {
        let true_lit = engine.new_bool_var();
        let _ = engine.add_clause(&[true_lit], Origin::User);
        let domains = Rc::new(RefCell::new(DomainStore {
            vars: Vec::new(),
            true_lit,
        }));
        engine.attach_propagator(Box::new(IntBrancher {
            domains: domains.clone(),
        }));
        Model { engine, domains }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn domains(&self) -> Domains {
        self.domains.clone()
    }

    pub fn into_parts(self) -> (Engine, Domains) {
        (self.engine, self.domains)
    }

    pub fn true_lit(&self) -> Lit {
        self.domains.borrow().true_lit
    }

    pub fn new_bool_var(&mut self) -> Lit {
        self.engine.new_bool_var()
    }

    pub fn new_int_var(&mut self, lb: i64, ub: i64) -> Result<IntVar, CpError> {
        if lb > ub {
            return Err(CpError::EmptyDomain { lb, ub });
        }
        let mut store = self.domains.borrow_mut();
        let x = IntVar(store.vars.len() as u32);
        store.vars.push(IntVarData {
            lb,
            ub,
            geq: BTreeMap::new(),
            eq: BTreeMap::new(),
            subscribers: Vec::new(),
        });
        Ok(x)
    }

    pub fn domain_size(&self, x: IntVar) -> u64 {
        let (lb, ub) = self.domains.borrow().original_bounds(x);
        (ub - lb + 1) as u64
    }

    pub fn lit_geq(&mut self, x: IntVar, v: i64) -> Lit {
        self.domains.borrow_mut().geq(&mut self.engine, x, v)
    }

    pub fn lit_leq(&mut self, x: IntVar, v: i64) -> Lit {
        self.domains.borrow_mut().leq(&mut self.engine, x, v)
    }

    /// `[x = v]`, channelled to the order literals around `v`.
    pub fn lit_eq(&mut self, x: IntVar, v: i64) -> Lit {
        let (lb, ub) = self.domains.borrow().original_bounds(x);
        if v < lb || v > ub {
            return !self.true_lit();
        }
        if let Some(&l) = self.domains.borrow().vars[x.index()].eq.get(&v) {
            return l;
        }
        let ge = self.lit_geq(x, v);
        let gt = self.lit_geq(x, v + 1);
        let eq = self.engine.new_bool_var();
        let _ = self.engine.add_clause(&[!eq, ge], Origin::Explanation);
        let _ = self.engine.add_clause(&[!eq, !gt], Origin::Explanation);
        let _ = self.engine.add_clause(&[!ge, gt, eq], Origin::Explanation);
        self.domains.borrow_mut().vars[x.index()].eq.insert(v, eq);
        eq
    }

    pub fn bounds(&self, x: IntVar) -> Bounds {
        self.domains.borrow().bounds(&self.engine, x)
    }

    pub fn value_in(&self, model: &[bool], x: IntVar) -> i64 {
        self.domains.borrow().value_in(model, x)
    }

    /// `indicator -> sum(coef * x) >= rhs`.
    pub fn post_half_reified_linear(
        &mut self,
        indicator: Lit,
        terms: &[(i64, IntVar)],
        rhs: i64,
    ) -> Result<(), CpError> {
        if terms.is_empty() {
            return Err(CpError::NoTerms);
        }
        if self.engine.root_value(indicator) == Some(false) {
            return Ok(());
        }
        let id = self.engine.next_propagator_id();
        {
            let mut store = self.domains.borrow_mut();
            for &(_, x) in terms {
                store.subscribe(&mut self.engine, x, id);
            }
        }
        let p = HalfReifiedLinear::new(indicator, terms.to_vec(), rhs, self.domains.clone());
        self.engine.attach_propagator(Box::new(p));
        Ok(())
    }

    pub fn post_at_most_one(&mut self, lits: &[Lit]) {
        post_at_most_one(&mut self.engine, lits, Origin::User);
    }

    pub fn post_pb_upper_bound(&mut self, terms: &[(u64, Lit)], strict_bound: u64) -> PropId {
        post_pb_upper_bound(&mut self.engine, terms, strict_bound)
    }

    pub fn post_cumulative(&mut self, c: &CumulativeConstraint) -> Result<(), CpError> {
        let tasks: Vec<CumulativeTask> = c
            .tasks
            .iter()
            .copied()
            .filter(|t| t.duration > 0 && t.demand > 0)
            .collect();
        if tasks.is_empty() {
            return Ok(());
        }
        if tasks.iter().any(|t| t.demand > c.capacity) {
            let _ = self.engine.add_clause(&[], Origin::User);
            return Err(CpError::RootConflict);
        }
        let id = self.engine.next_propagator_id();
        {
            let mut store = self.domains.borrow_mut();
            for t in &tasks {
                store.subscribe(&mut self.engine, t.start, id);
            }
        }
        let p = TimetablePropagator::new(tasks, c.capacity, self.domains.clone());
        self.engine.attach_propagator(Box::new(p));
        Ok(())
    }
}

/// Pairwise at-most-one: `!a | !b` for every pair.
pub fn post_at_most_one(engine: &mut Engine, lits: &[Lit], origin: Origin) {
    for (i, &a) in lits.iter().enumerate() {
        for &b in &lits[i + 1..] {
            let _ = engine.add_clause(&[!a, !b], origin);
        }
    }
}

/// Attach `sum(w * lit) < strict_bound`.
pub fn post_pb_upper_bound(engine: &mut Engine, terms: &[(u64, Lit)], strict_bound: u64) -> PropId {
    engine.attach_propagator(Box::new(PbUpperBound::new(terms.to_vec(), strict_bound)))
}

#[inline]
pub(crate) fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

#[inline]
pub(crate) fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}
