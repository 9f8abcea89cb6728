use super::*;
use proptest::prelude::*;

fn lits(engine: &mut Engine, n: usize) -> Vec<Lit> {
    (0..n).map(|_| engine.new_bool_var()).collect()
}

fn satisfies(model: &[bool], clause: &[Lit]) -> bool {
    clause.iter().any(|&l| model.is_true(l))
}

/// Every total assignment over `n` variables satisfying all `clauses`.
fn models(n: usize, clauses: &[Vec<Lit>]) -> Vec<Vec<bool>> {
    (0u32..1 << n)
        .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|m| clauses.iter().all(|c| satisfies(m, c)))
        .collect()
}

#[test]
fn fresh_variables_count_from_one() {
    let mut e = Engine::new();
    let a = e.new_bool_var();
    let b = e.new_bool_var();
    assert_eq!(a.to_dimacs(), 1);
    assert_ne!(a.var(), b.var());
    for _ in 0..3 {
        e.new_bool_var();
    }
    assert_eq!(e.num_vars(), 5);
}

#[test]
fn contradicting_units_conflict_on_add() {
    let mut e = Engine::new();
    let x = e.new_bool_var();
    assert!(!e.add_clause(&[x], Origin::User).conflict);
    assert!(e.add_clause(&[!x], Origin::User).conflict);
    assert_eq!(e.solve(&[]), SolveOutcome::Unsat(vec![]));
}

#[test]
fn binary_clause_propagates_nothing() {
    let mut e = Engine::new();
    let [x, y] = [e.new_bool_var(), e.new_bool_var()];
    assert!(!e.add_clause(&[x, y], Origin::User).conflict);
    assert_eq!(e.root_value(x), None);
    assert_eq!(e.root_value(y), None);
}

#[test]
fn empty_clause_conflicts() {
    let mut e = Engine::new();
    assert!(e.add_clause(&[], Origin::User).conflict);
    assert!(!e.is_consistent());
}

#[test]
fn core_of_two_assumptions() {
    let mut e = Engine::new();
    let [a, b, x] = [e.new_bool_var(), e.new_bool_var(), e.new_bool_var()];
    let clauses = vec![vec![!a, x], vec![!b, !x]];
    for c in &clauses {
        let _ = e.add_clause(c, Origin::User);
    }
    let SolveOutcome::Unsat(core) = e.solve(&[a, b]) else {
        panic!("expected a core");
    };
    let mut sorted = core.clone();
    sorted.sort();
    assert_eq!(sorted, vec![a, b]);
    // Enumeration: no valuation satisfies the clauses with a and b both true.
    let mut with_core = clauses.clone();
    with_core.extend(core.iter().map(|&l| vec![l]));
    assert!(models(3, &with_core).is_empty());
}

#[test]
fn single_assumption_without_clauses() {
    let mut e = Engine::new();
    let a = e.new_bool_var();
    match e.solve(&[a]) {
        SolveOutcome::Sat(m) => assert!(m.is_true(a)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn five_clauses_as_hard_clauses_are_unsat() {
    let mut e = Engine::new();
    let [x1, x2, x3] = [e.new_bool_var(), e.new_bool_var(), e.new_bool_var()];
    for c in [vec![x1], vec![x2], vec![x3], vec![!x1, !x2], vec![!x1, !x3]] {
        let _ = e.add_clause(&c, Origin::User);
    }
    assert_eq!(e.solve(&[]), SolveOutcome::Unsat(vec![]));
}

#[test]
fn retracted_temporary_unblocks_model() {
    let mut e = Engine::new();
    let [x, v] = [e.new_bool_var(), e.new_bool_var()];
    let _ = e.add_clause(&[x, v], Origin::User);
    let _ = e.add_clause(&[!x], Origin::User);
    let temp = e.add_clause(&[!v], Origin::Relaxation).clause;
    assert_eq!(e.solve(&[]), SolveOutcome::Unsat(vec![]));
    e.retract(&[temp]);
    match e.solve(&[]) {
        SolveOutcome::Sat(m) => assert!(m.is_true(v) && !m.is_true(x)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn retract_with_no_learnts_is_noop() {
    let mut e = Engine::new();
    let x = e.new_bool_var();
    let _ = e.add_clause(&[x], Origin::User);
    e.delete_learnts();
    assert!(e.learnt_clauses().is_empty());
    assert_eq!(e.root_value(x), Some(true));
    assert_eq!(e.stats().retract_misses, 0);
}

#[test]
fn unknown_clause_reference_counts_a_miss() {
    let mut e = Engine::new();
    let x = e.new_bool_var();
    let c = e.add_clause(&[x], Origin::User).clause;
    e.retract(&[c]);
    e.retract(&[c, ClauseRef(99)]);
    assert_eq!(e.stats().retract_misses, 2);
}

#[test]
fn retract_origin_removes_group() {
    let mut e = Engine::new();
    let [x, y] = [e.new_bool_var(), e.new_bool_var()];
    let _ = e.add_clause(&[x, y], Origin::User);
    let _ = e.add_clause(&[!x], Origin::Objective);
    let _ = e.add_clause(&[!y], Origin::Objective);
    assert!(!e.solve(&[]).is_sat());
    e.retract_origin(Origin::Objective);
    assert!(e.solve(&[]).is_sat());
    let mut remaining = e.original_clauses();
    remaining[0].sort();
    assert_eq!(remaining, vec![vec![x, y]]);
}

/// i -> (b >= a + 3) over tiny order-encoded integers a, b in [0, 9]: the
/// literal geq[v] stands for x >= v + 1.
struct ToyPrecedence {
    i: Lit,
    a: Vec<Lit>,
    b: Vec<Lit>,
}

impl ToyPrecedence {
    fn lb(ctx: &PropagationContext<'_>, x: &[Lit]) -> (i64, Option<Lit>) {
        let mut best = (0, None);
        for (k, &l) in x.iter().enumerate() {
            if ctx.is_true(l) {
                best = (k as i64 + 1, Some(l));
            }
        }
        best
    }
}

impl Propagator for ToyPrecedence {
    fn name(&self) -> &'static str {
        "toy-precedence"
    }

    fn watched_literals(&self) -> Vec<Lit> {
        let mut w = vec![self.i];
        w.extend(self.a.iter().copied());
        w
    }

    fn propagate(&mut self, ctx: &mut PropagationContext<'_>) -> Result<(), Conflict> {
        if !ctx.is_true(self.i) {
            return Ok(());
        }
        let (lb, lit) = Self::lb(ctx, &self.a);
        let target = lb + 3;
        let mut ante = vec![self.i];
        ante.extend(lit);
        if target as usize > self.b.len() {
            return Err(ctx.fail(&ante));
        }
        if target >= 1 {
            ctx.post(self.b[target as usize - 1], &ante)?;
        }
        Ok(())
    }
}

fn order_encoded(e: &mut Engine, size: usize) -> Vec<Lit> {
    let x: Vec<Lit> = (0..size).map(|_| e.new_bool_var()).collect();
    for w in x.windows(2) {
        let _ = e.add_clause(&[!w[1], w[0]], Origin::User);
    }
    x
}

#[test]
fn propagator_explains_inference() {
    let mut e = Engine::new();
    let i = e.new_bool_var();
    let a = order_encoded(&mut e, 9);
    let b = order_encoded(&mut e, 9);
    let _ = e.add_clause(&[i], Origin::User);
    let _ = e.add_clause(&[a[3]], Origin::User); // a >= 4
    e.attach_propagator(Box::new(ToyPrecedence {
        i,
        a: a.clone(),
        b: b.clone(),
    }));
    let SolveOutcome::Sat(m) = e.solve(&[]) else {
        panic!("satisfiable");
    };
    assert!(m.is_true(b[6]), "b >= 7 must hold");
    // Root propagation recorded b >= 7 with reason {b>=7, !i, !a>=4}.
    assert_eq!(e.root_value(b[6]), Some(true));
    let Reason::Explained(r) = &e.core.reason[b[6].var().index()] else {
        panic!("expected an explained reason");
    };
    let mut r = r.to_vec();
    r.sort();
    let mut expect = vec![b[6], !i, !a[3]];
    expect.sort();
    assert_eq!(r, expect);
}

#[test]
fn half_reified_propagator_inert_without_indicator() {
    let mut e = Engine::new();
    let i = e.new_bool_var();
    let a = order_encoded(&mut e, 9);
    let b = order_encoded(&mut e, 9);
    let _ = e.add_clause(&[a[3]], Origin::User);
    e.attach_propagator(Box::new(ToyPrecedence {
        i,
        a,
        b: b.clone(),
    }));
    assert!(e.solve(&[!i]).is_sat());
    assert_eq!(e.root_value(b[6]), None);
}

#[test]
fn failing_propagator_drives_learning() {
    let config = EngineConfig {
        self_check: true,
        ..EngineConfig::default()
    };
    let mut e = Engine::with_config(config);
    let i = e.new_bool_var();
    let a = order_encoded(&mut e, 9);
    let b = order_encoded(&mut e, 9);
    // b <= 5 forces a <= 2 when i holds.
    let _ = e.add_clause(&[!b[5]], Origin::User);
    e.attach_propagator(Box::new(ToyPrecedence {
        i,
        a: a.clone(),
        b,
    }));
    let _ = e.add_clause(&[i], Origin::User);
    // Force the search to try a >= 3 first.
    let SolveOutcome::Sat(m) = e.solve(&[]) else {
        panic!("satisfiable");
    };
    assert!(!m.is_true(a[2]));
    let stats = e.stats();
    assert!(stats.conflicts > 0 || !m.is_true(a[2]));
    for learnt in e.learnt_clauses() {
        assert!(satisfies(&m, &learnt));
    }
}

#[test]
#[should_panic(expected = "engine integrity")]
fn explanation_with_false_antecedent_is_rejected() {
    struct Liar(Lit, Lit);
    impl Propagator for Liar {
        fn name(&self) -> &'static str {
            "liar"
        }
        fn watched_literals(&self) -> Vec<Lit> {
            vec![]
        }
        fn propagate(&mut self, ctx: &mut PropagationContext<'_>) -> Result<(), Conflict> {
            ctx.post(self.1, &[self.0])
        }
    }
    let mut e = Engine::new();
    let [x, y] = [e.new_bool_var(), e.new_bool_var()];
    let _ = e.add_clause(&[!x], Origin::User);
    e.attach_propagator(Box::new(Liar(x, y)));
    let _ = e.solve(&[]);
}

#[test]
fn propagator_downcast_and_wake() {
    struct Counter(u32);
    impl Propagator for Counter {
        fn name(&self) -> &'static str {
            "counter"
        }
        fn watched_literals(&self) -> Vec<Lit> {
            vec![]
        }
        fn propagate(&mut self, _: &mut PropagationContext<'_>) -> Result<(), Conflict> {
            self.0 += 1;
            Ok(())
        }
    }
    let mut e = Engine::new();
    e.new_bool_var();
    let id = e.attach_propagator(Box::new(Counter(0)));
    let _ = e.solve(&[]);
    let runs = e.propagator_mut::<Counter>(id).unwrap().0;
    assert!(runs >= 1);
    assert!(e.propagator_mut::<ToyPrecedence>(id).is_none());
}

fn random_cnf() -> impl Strategy<Value = (usize, Vec<Vec<(usize, bool)>>, Vec<(usize, bool)>)> {
    (3usize..=10).prop_flat_map(|n| {
        let lit = (0..n, any::<bool>());
        let clause = prop::collection::vec(lit.clone(), 1..=4);
        (
            Just(n),
            prop::collection::vec(clause, 0..=30),
            prop::collection::vec(lit, 0..=5),
        )
    })
}

fn build(n: usize, raw: &[Vec<(usize, bool)>], config: EngineConfig) -> (Engine, Vec<Lit>, Vec<Vec<Lit>>) {
    let mut e = Engine::with_config(config);
    let vars = lits(&mut e, n);
    let clauses: Vec<Vec<Lit>> = raw
        .iter()
        .map(|c| c.iter().map(|&(v, s)| if s { vars[v] } else { !vars[v] }).collect())
        .collect();
    for c in &clauses {
        let _ = e.add_clause(c, Origin::User);
    }
    (e, vars, clauses)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn outcomes_match_enumeration((n, raw, assume) in random_cnf()) {
        let config = EngineConfig { self_check: true, minimize: true, ..EngineConfig::default() };
        let (mut e, vars, clauses) = build(n, &raw, config);
        let assumptions: Vec<Lit> = assume.iter().map(|&(v, s)| if s { vars[v] } else { !vars[v] }).collect();
        let outcome = e.solve(&assumptions);
        let mut with_assumptions = clauses.clone();
        with_assumptions.extend(assumptions.iter().map(|&l| vec![l]));
        let feasible = !models(n, &with_assumptions).is_empty();
        match &outcome {
            SolveOutcome::Sat(m) => {
                prop_assert!(feasible);
                for c in &with_assumptions {
                    prop_assert!(satisfies(m, c));
                }
            }
            SolveOutcome::Unsat(core) => {
                prop_assert!(!feasible);
                for l in core {
                    prop_assert!(assumptions.contains(l));
                }
                let mut restricted = clauses.clone();
                restricted.extend(core.iter().map(|&l| vec![l]));
                prop_assert!(models(n, &restricted).is_empty());
                // Core soundness on a fresh engine.
                let (mut fresh, _, _) = build(n, &raw, EngineConfig::default());
                prop_assert!(!fresh.solve(core).is_sat());
            }
            SolveOutcome::Unknown => prop_assert!(false, "no budget was set"),
        }
        // Learnt clauses are implied by the original clauses.
        let all = models(n, &clauses);
        for learnt in e.learnt_clauses() {
            for m in &all {
                prop_assert!(satisfies(m, &learnt));
            }
        }
    }

    #[test]
    fn deterministic_and_restart_safe((n, raw, assume) in random_cnf()) {
        let run = |config: EngineConfig| {
            let (mut e, vars, clauses) = build(n, &raw, config);
            let assumptions: Vec<Lit> = assume.iter().map(|&(v, s)| if s { vars[v] } else { !vars[v] }).collect();
            (e.solve(&assumptions), e.stats(), clauses, assumptions)
        };
        let (a, sa, clauses, assumptions) = run(EngineConfig::default());
        let (b, sb, _, _) = run(EngineConfig::default());
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(sa, sb);
        let (c, _, _, _) = run(EngineConfig { restarts: false, ..EngineConfig::default() });
        prop_assert_eq!(a.is_sat(), c.is_sat());
        if let SolveOutcome::Sat(m) = &c {
            for cl in clauses.iter().chain(assumptions.iter().map(std::slice::from_ref).map(<[Lit]>::to_vec).collect::<Vec<_>>().iter()) {
                prop_assert!(satisfies(m, cl));
            }
        }
    }

    #[test]
    fn retract_matches_rebuild((n, raw, assume) in random_cnf(), drop_mask in any::<u32>()) {
        let (mut e, vars, _) = build(n, &raw, EngineConfig::default());
        let assumptions: Vec<Lit> = assume.iter().map(|&(v, s)| if s { vars[v] } else { !vars[v] }).collect();
        let _ = e.solve(&assumptions);
        let dropped: Vec<ClauseRef> = (0..raw.len())
            .filter(|i| drop_mask >> (i % 32) & 1 == 1)
            .map(|i| ClauseRef(i as u32))
            .collect();
        e.retract(&dropped);
        let kept: Vec<Vec<(usize, bool)>> = raw
            .iter()
            .enumerate()
            .filter(|(i, _)| drop_mask >> (i % 32) & 1 == 0)
            .map(|(_, c)| c.clone())
            .collect();
        let (mut fresh, fvars, fclauses) = build(n, &kept, EngineConfig::default());
        let fassumptions: Vec<Lit> = assume.iter().map(|&(v, s)| if s { fvars[v] } else { !fvars[v] }).collect();
        let x = e.solve(&assumptions);
        let y = fresh.solve(&fassumptions);
        prop_assert_eq!(x.is_sat(), y.is_sat());
        if let SolveOutcome::Sat(m) = &x {
            for c in &fclauses {
                prop_assert!(satisfies(m, c));
            }
        }
    }
}
