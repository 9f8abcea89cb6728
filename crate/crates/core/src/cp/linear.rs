use crate::engine::{Conflict, Lit, PropagationContext, Propagator, Valuation};

use super::{div_ceil, div_floor, Domains, IntVar};

/// `indicator -> sum(coef * x) >= rhs` by bounds propagation.
///
/// With the indicator true, each variable is tightened against the slack left
/// by the others. With the indicator unfixed and the body already impossible,
/// the indicator is set false.
pub struct HalfReifiedLinear {
    indicator: Lit,
    terms: Vec<(i64, IntVar)>,
    rhs: i64,
    domains: Domains,
}

impl HalfReifiedLinear {
    pub(crate) fn new(indicator: Lit, terms: Vec<(i64, IntVar)>, rhs: i64, domains: Domains) -> Self {
        let terms = terms.into_iter().filter(|&(c, _)| c != 0).collect();
        HalfReifiedLinear {
            indicator,
            terms,
            rhs,
            domains,
        }
    }

    pub fn indicator(&self) -> Lit {
        self.indicator
    }
}

impl Propagator for HalfReifiedLinear {
    fn name(&self) -> &'static str {
        "half-reified-linear"
    }

    fn watched_literals(&self) -> Vec<Lit> {
        vec![self.indicator]
    }

    fn propagate(&mut self, ctx: &mut PropagationContext<'_>) -> Result<(), Conflict> {
        if ctx.is_false(self.indicator) {
            return Ok(());
        }
        let mut store = self.domains.borrow_mut();
        // Largest value of each term and the literal establishing it.
        let mut maxes = Vec::with_capacity(self.terms.len());
        let mut total: i64 = 0;
        for &(c, x) in &self.terms {
            let b = store.bounds(ctx, x);
            let (m, lit) = if c > 0 { (c * b.ub, b.ub_lit) } else { (c * b.lb, b.lb_lit) };
            total += m;
            maxes.push((m, lit));
        }
        let support = |skip: Option<usize>| -> Vec<Lit> {
            maxes
                .iter()
                .enumerate()
                .filter(|&(k, _)| Some(k) != skip)
                .filter_map(|(_, &(_, l))| l)
                .collect()
        };
        if total < self.rhs {
            let reason = support(None);
            if ctx.is_true(self.indicator) {
                let mut nogood = reason;
                nogood.push(self.indicator);
                return Err(ctx.fail(&nogood));
            }
            return ctx.post(!self.indicator, &reason);
        }
        if !ctx.is_true(self.indicator) {
            return Ok(());
        }
        for k in 0..self.terms.len() {
            let (c, x) = self.terms[k];
            let need = self.rhs - (total - maxes[k].0);
            let mut reason = support(Some(k));
            reason.push(self.indicator);
            if c > 0 {
                store.set_lb(ctx, x, div_ceil(need, c), &reason)?;
            } else {
                store.set_ub(ctx, x, div_floor(need, c), &reason)?;
            }
        }
        Ok(())
    }
}
