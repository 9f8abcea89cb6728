//! Externally attached propagators and the context they run in.
//!
//! A propagator never assigns anything without a reason: every inference is
//! posted together with the currently-true literals that entail it, and every
//! failure is reported as a nogood made of currently-true literals. The engine
//! turns both into clauses for conflict analysis.

use std::any::Any;

use super::lit::Lit;
use super::{Core, Origin, Reason};

/// Handle of an attached propagator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PropId(pub(crate) u32);

impl PropId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A falsified clause discovered during propagation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conflict {
    Clause(super::ClauseRef),
    /// Literals of a clause that are all false under the current assignment.
    Lits(Vec<Lit>),
}

/// Read access to a (partial) assignment.
pub trait Valuation {
    fn lit_value(&self, lit: Lit) -> Option<bool>;

    fn is_true(&self, lit: Lit) -> bool {
        self.lit_value(lit) == Some(true)
    }

    fn is_false(&self, lit: Lit) -> bool {
        self.lit_value(lit) == Some(false)
    }
}

impl Valuation for [bool] {
    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var().index()).map(|&v| v == lit.is_positive())
    }
}

impl Valuation for Vec<bool> {
    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.as_slice().lit_value(lit)
    }
}

/// Something that can hand out fresh literals, store clauses and register
/// propagator wake-ups. Implemented by the engine at root level and by the
/// propagation context during search.
pub trait LitSource: Valuation {
    fn fresh_lit(&mut self) -> Lit;
    fn add_model_clause(&mut self, lits: &[Lit], origin: Origin);
    fn wake_on(&mut self, lit: Lit, prop: PropId);
}

pub trait Propagator: Any {
    fn name(&self) -> &'static str;

    /// Literals whose becoming true must wake this propagator.
    fn watched_literals(&self) -> Vec<Lit>;

    fn propagate(&mut self, ctx: &mut PropagationContext<'_>) -> Result<(), Conflict>;

    /// Offered the chance to branch once every Boolean variable is assigned.
    fn decide(&mut self, _ctx: &mut PropagationContext<'_>) -> Option<Lit> {
        None
    }
}

pub struct PropagationContext<'a> {
    pub(crate) core: &'a mut Core,
    pub(crate) current: PropId,
}

impl PropagationContext<'_> {
    pub fn propagator_id(&self) -> PropId {
        self.current
    }

    pub fn decision_level(&self) -> usize {
        self.core.decision_level()
    }

    /// Decision level of an assigned literal's variable.
    pub fn level(&self, lit: Lit) -> Option<usize> {
        self.core.value_lit(lit).map(|_| self.core.level[lit.var().index()] as usize)
    }

    /// Assert `lit`, entailed by the conjunction of `antecedents`.
    ///
    /// Panics if an antecedent is not currently true: an explanation that
    /// does not hold would corrupt every clause learnt from it.
    pub fn post(&mut self, lit: Lit, antecedents: &[Lit]) -> Result<(), Conflict> {
        for &a in antecedents {
            assert!(
                self.core.value_lit(a) == Some(true),
                "engine integrity: antecedent {a} of {lit} is not true"
            );
        }
        let mut reason = Vec::with_capacity(antecedents.len() + 1);
        reason.push(lit);
        for &a in antecedents {
            if !reason.contains(&!a) {
                reason.push(!a);
            }
        }
        match self.core.value_lit(lit) {
            Some(true) => Ok(()),
            Some(false) => Err(Conflict::Lits(reason)),
            None => {
                self.core.enqueue(lit, Reason::Explained(reason.into_boxed_slice()));
                Ok(())
            }
        }
    }

    /// Failure: the conjunction of `nogood` (all currently true) is impossible.
    pub fn fail(&self, nogood: &[Lit]) -> Conflict {
        let mut lits = Vec::with_capacity(nogood.len());
        for &l in nogood {
            assert!(
                self.core.value_lit(l) == Some(true),
                "engine integrity: nogood literal {l} is not true"
            );
            if !lits.contains(&!l) {
                lits.push(!l);
            }
        }
        Conflict::Lits(lits)
    }
}

impl Valuation for PropagationContext<'_> {
    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.core.value_lit(lit)
    }
}

impl LitSource for PropagationContext<'_> {
    fn fresh_lit(&mut self) -> Lit {
        self.core.new_var().pos()
    }

    fn add_model_clause(&mut self, lits: &[Lit], origin: Origin) {
        self.core.add_clause_in_search(lits, origin);
    }

    fn wake_on(&mut self, lit: Lit, prop: PropId) {
        self.core.wake_on(lit, prop);
    }
}
