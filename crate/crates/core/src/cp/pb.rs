use crate::engine::{Conflict, Lit, PropagationContext, Propagator, Valuation};

/// `sum(w * lit) < bound` over positive weights.
///
/// The bound may only be tightened between solves; see [`PbUpperBound::set_bound`].
pub struct PbUpperBound {
    terms: Vec<(u64, Lit)>,
    bound: u64,
}

impl PbUpperBound {
    pub fn new(terms: Vec<(u64, Lit)>, bound: u64) -> Self {
        assert!(terms.iter().all(|&(w, _)| w > 0), "pseudo-Boolean weights must be positive");
        PbUpperBound { terms, bound }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Replace the strict bound. Callers must wake the propagator afterwards.
    pub fn set_bound(&mut self, bound: u64) {
        self.bound = bound;
    }

    pub fn terms(&self) -> &[(u64, Lit)] {
        &self.terms
    }
}

impl Propagator for PbUpperBound {
    fn name(&self) -> &'static str {
        "pb-upper-bound"
    }

    fn watched_literals(&self) -> Vec<Lit> {
        self.terms.iter().map(|&(_, l)| l).collect()
    }

    fn propagate(&mut self, ctx: &mut PropagationContext<'_>) -> Result<(), Conflict> {
        let mut sum = 0u64;
        let mut reason = Vec::new();
        for &(w, l) in &self.terms {
            if ctx.is_true(l) {
                sum = sum.saturating_add(w);
                reason.push(l);
            }
        }
        if sum >= self.bound {
            return Err(ctx.fail(&reason));
        }
        for &(w, l) in &self.terms {
            if ctx.lit_value(l).is_none() && sum.saturating_add(w) >= self.bound {
                ctx.post(!l, &reason)?;
            }
        }
        Ok(())
    }
}
