//! Seeded micro instances small enough for exhaustive checking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{earliest_starts, exact_makespan, horizon_for, soften, Mode, Precedence, RcpspMax, Task};
use crate::maxsat::SolveOptions;
use crate::oracle::brute_force_schedule;

/// Start grids at the loosest benchmark horizon stay below this, which
/// keeps the schedule oracle fast.
const GRID_LIMIT: u128 = 1_000_000;
const LOOSEST_ALPHA: f64 = 0.9;
/// Resources alone must fit within the tightest benchmark horizon.
const TIGHTEST_ALPHA: f64 = 0.7;

/// A random instance with at most 8 tasks and 1 or 2 resources whose
/// resource constraints fit within `floor(0.7 * l)`. The same seed always
/// gives the same instance.
pub fn generate_micro(seed: u64) -> RcpspMax {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inst = candidate(&mut rng);
        if accept(&inst) {
            return inst;
        }
    }
}

fn candidate(rng: &mut ChaCha8Rng) -> RcpspMax {
    let n = rng.gen_range(4..=8);
    let r = rng.gen_range(1..=2);
    let capacities: Vec<i64> = (0..r).map(|_| rng.gen_range(1..=3)).collect();
    let tasks: Vec<Task> = (0..n)
        .map(|_| Task {
            duration: rng.gen_range(1..=3),
            demands: capacities.iter().map(|&c| rng.gen_range(0..=c)).collect(),
        })
        .collect();
    let mut precedences = Vec::new();
    for from in 0..n {
        for to in from + 1..n {
            if rng.gen_bool(0.3) {
                let lag = tasks[from].duration + rng.gen_range(-1..=1);
                precedences.push(Precedence { from, to, lag });
                if rng.gen_bool(0.15) {
                    // A maximum lag closing the pair into a window.
                    let slack = rng.gen_range(0..=2);
                    precedences.push(Precedence {
                        from: to,
                        to: from,
                        lag: -(lag + slack),
                    });
                }
            }
        }
    }
    RcpspMax {
        tasks,
        capacities,
        precedences,
    }
}

fn accept(inst: &RcpspMax) -> bool {
    if inst.precedences.is_empty() || earliest_starts(inst).is_err() {
        return false;
    }
    let Ok(l) = exact_makespan(inst, &SolveOptions::default()) else {
        return false;
    };
    let horizon = horizon_for(LOOSEST_ALPHA, l);
    let grid = inst
        .tasks
        .iter()
        .map(|t| (horizon - t.duration + 1).max(1) as u128)
        .product::<u128>();
    if grid > GRID_LIMIT {
        return false;
    }
    let Ok(tight) = soften(inst, TIGHTEST_ALPHA, l, Mode::Cardinality, 0) else {
        return false;
    };
    brute_force_schedule(&tight).is_ok_and(|r| r.optimum.is_some())
}

/// `count` micro instances named `micro-00`, `micro-01`, ... drawn from
/// seeds `seed`, `seed + 1`, ...
pub fn micro_set(seed: u64, count: usize) -> Vec<(String, RcpspMax)> {
    (0..count)
        .map(|k| (format!("micro-{k:02}"), generate_micro(seed.wrapping_add(k as u64))))
        .collect()
}
