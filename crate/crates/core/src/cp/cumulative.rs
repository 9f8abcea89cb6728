use crate::engine::{Conflict, Lit, PropagationContext, Propagator};

use super::{Bounds, Domains, IntVar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CumulativeTask {
    pub start: IntVar,
    pub duration: i64,
    pub demand: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulativeConstraint {
    pub tasks: Vec<CumulativeTask>,
    pub capacity: i64,
}

/// Time-table propagation over compulsory parts.
pub struct TimetablePropagator {
    tasks: Vec<CumulativeTask>,
    capacity: i64,
    domains: Domains,
}

/// A maximal interval of constant profile height.
struct Segment {
    from: i64,
    to: i64,
    height: i64,
    tasks: Vec<usize>,
}

fn bound_lits(b: &Bounds) -> impl Iterator<Item = Lit> {
    b.lb_lit.into_iter().chain(b.ub_lit)
}

impl TimetablePropagator {
    pub(crate) fn new(tasks: Vec<CumulativeTask>, capacity: i64, domains: Domains) -> Self {
        TimetablePropagator {
            tasks,
            capacity,
            domains,
        }
    }

    fn profile(&self, bounds: &[Bounds]) -> Vec<Segment> {
        let mut points: Vec<i64> = Vec::new();
        for (t, b) in self.tasks.iter().zip(bounds) {
            if b.ub < b.lb + t.duration {
                points.push(b.ub);
                points.push(b.lb + t.duration);
            }
        }
        points.sort_unstable();
        points.dedup();
        let mut segments = Vec::new();
        for w in points.windows(2) {
            let (from, to) = (w[0], w[1]);
            let mut seg = Segment {
                from,
                to,
                height: 0,
                tasks: Vec::new(),
            };
            for (j, (t, b)) in self.tasks.iter().zip(bounds).enumerate() {
                if b.ub <= from && to <= b.lb + t.duration {
                    seg.height += t.demand;
                    seg.tasks.push(j);
                }
            }
            if seg.height > 0 {
                segments.push(seg);
            }
        }
        segments
    }

    fn explain(&self, seg: &Segment, bounds: &[Bounds], skip: usize) -> Vec<Lit> {
        seg.tasks
            .iter()
            .filter(|&&j| j != skip)
            .flat_map(|&j| bound_lits(&bounds[j]))
            .collect()
    }
}

impl Propagator for TimetablePropagator {
    fn name(&self) -> &'static str {
        "cumulative-timetable"
    }

    fn watched_literals(&self) -> Vec<Lit> {
        Vec::new()
    }

    fn propagate(&mut self, ctx: &mut PropagationContext<'_>) -> Result<(), Conflict> {
        let mut store = self.domains.borrow_mut();
        let bounds: Vec<Bounds> = self.tasks.iter().map(|t| store.bounds(ctx, t.start)).collect();
        let segments = self.profile(&bounds);
        if let Some(seg) = segments.iter().find(|s| s.height > self.capacity) {
            let nogood = self.explain(seg, &bounds, usize::MAX);
            return Err(ctx.fail(&nogood));
        }
        for (j, t) in self.tasks.iter().enumerate() {
            let own = |seg: &Segment| if seg.tasks.contains(&j) { t.demand } else { 0 };
            let mut lb = bounds[j].lb;
            for seg in &segments {
                if seg.height - own(seg) + t.demand > self.capacity && lb < seg.to && lb + t.duration > seg.from {
                    let mut reason = self.explain(seg, &bounds, j);
                    reason.extend(store.bounds(ctx, t.start).lb_lit);
                    store.set_lb(ctx, t.start, seg.to, &reason)?;
                    lb = seg.to;
                }
            }
            let mut ub = store.bounds(ctx, t.start).ub;
            for seg in segments.iter().rev() {
                if seg.height - own(seg) + t.demand > self.capacity && ub < seg.to && ub + t.duration > seg.from {
                    let mut reason = self.explain(seg, &bounds, j);
                    reason.extend(store.bounds(ctx, t.start).ub_lit);
                    store.set_ub(ctx, t.start, seg.from - t.duration, &reason)?;
                    ub = seg.from - t.duration;
                }
            }
        }
        Ok(())
    }
}
