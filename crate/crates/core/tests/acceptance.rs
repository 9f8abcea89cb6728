//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coremax::engine::Lit;
use coremax::maxsat::{
    parse_wcnf, solve_bnb, solve_msu3, solve_wpm1, Algorithm, CoreRecord, OptimizeResult, SoftInstance, SolveOptions,
    Status, Weight, WeightedClause,
};
use coremax::oracle::{brute_force_maxsat, brute_force_schedule, verify_core, verify_core_bounded};
use coremax::rcpsp::{
    self, audit_schedule, exact_makespan, micro_set, run_benchmark, soften, solve_soft, summarize, write_csv,
    BenchConfig, BenchInstance, BenchReport, BenchRow, Mode, RowStatus,
};

const FIVE_CLAUSES: &str = "p wcnf 3 5 6\n1 1 0\n1 2 0\n1 3 0\n1 -1 -2 0\n1 -1 -3 0\n";
const SEVEN_CLAUSES: &str = "p wcnf 4 7 8\n1 1 0\n1 2 0\n1 3 0\n1 -1 -2 0\n1 -1 -3 0\n1 4 0\n1 -3 -4 0\n";

const EXAMPLE_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
const MICRO_LIMIT: Duration = Duration::from_secs(300);
const RANDOM_INSTANCES: usize = 500;
const RANDOM_SEED: u64 = 2024;
const MICRO_SEED: u64 = 0;
const MICRO_COUNT: usize = 10;
const ALPHAS: [f64; 3] = [0.7, 0.8, 0.9];
const MODES: [Mode; 2] = [Mode::Cardinality, Mode::Weighted];

type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn run(alg: Algorithm, inst: &SoftInstance) -> OptimizeResult {
    match alg {
        Algorithm::BranchAndBound => solve_bnb(inst, &opts()),
        Algorithm::Wpm1 => solve_wpm1(inst, &opts()),
        Algorithm::Msu3 => solve_msu3(inst, &opts()),
    }
}

fn five_clause_golden() -> Verdict {
    let inst = parse_wcnf(FIVE_CLAUSES).map_err(|e| e.to_string())?;
    for alg in Algorithm::ALL {
        let start = Instant::now();
        let r = run(alg, &inst);
        let wall = start.elapsed();
        check(r.status == Status::Optimal && r.cost == Some(1), || {
            format!("{} returned {:?} {:?}", alg.name(), r.status, r.cost)
        })?;
        check(wall < EXAMPLE_LIMIT, || format!("{} took {wall:?}", alg.name()))?;
    }
    Ok("z_opt = 1 for bnb, wpm1, msu3".into())
}

fn wpm1_trace() -> Verdict {
    let inst = parse_wcnf(SEVEN_CLAUSES).map_err(|e| e.to_string())?;
    let r = solve_wpm1(&inst, &opts());
    let cores: Vec<Vec<usize>> = r.trace.cores.iter().map(|c| c.clauses.clone()).collect();
    check(cores == vec![vec![0, 2, 4], vec![0, 1, 2, 3, 5, 6]], || format!("cores {cores:?}"))?;
    check(r.cost == Some(2), || format!("cost {:?}", r.cost))?;
    let audited = r.model.as_ref().and_then(|m| inst.cost(m));
    check(audited == Some(2), || format!("model violates weight {audited:?}"))?;
    Ok("cores {C1,C3,C5}, {C1,C2,C3,C4,C6,C7}; z_opt = 2".into())
}

fn msu3_trace() -> Verdict {
    let inst = parse_wcnf(FIVE_CLAUSES).map_err(|e| e.to_string())?;
    let r = solve_msu3(&inst, &opts());
    let cores = &r.trace.cores;
    check(cores.first().map(|c| c.temporaries.clone()) == Some(vec![0, 1, 3]), || {
        format!("first core {:?}", cores.first())
    })?;
    check(r.trace.incumbents.contains(&1), || format!("incumbents {:?}", r.trace.incumbents))?;
    check(cores.last().is_some_and(|c| c.temporaries.is_empty()), || {
        format!("last core {:?}", cores.last())
    })?;
    check(r.cost == Some(1) && r.status == Status::Optimal, || format!("cost {:?}", r.cost))?;
    Ok("first core {C'1,C'2,C'4}, incumbent 1, empty terminating core".into())
}

/// Seeded random instance: up to 12 variables, up to 30 clauses of length
/// 1 to 3, about one clause in five hard, soft weights 1 to 5.
fn random_wcnf(rng: &mut ChaCha8Rng) -> SoftInstance {
    let n = rng.gen_range(1..=12usize);
    let m = rng.gen_range(1..=30usize);
    let clauses = (0..m)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            let lits = (0..len)
                .map(|_| {
                    let v = rng.gen_range(1..=n as i32);
                    Lit::from_dimacs(if rng.gen_bool(0.5) { v } else { -v })
                })
                .collect();
            let weight = if rng.gen_bool(0.2) {
                Weight::Hard
            } else {
                Weight::Soft(rng.gen_range(1..=5))
            };
            WeightedClause { lits, weight }
        })
        .collect();
    SoftInstance {
        num_vars: n,
        top: 1000,
        clauses,
    }
}

struct OracleRun {
    instances: Vec<SoftInstance>,
    optima: Vec<Option<u64>>,
    /// Per instance, per algorithm: reported cost and cores.
    results: Vec<Vec<(Option<u64>, Vec<CoreRecord>, u64)>>,
    wall: Duration,
}

fn oracle_runs() -> OracleRun {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let instances: Vec<SoftInstance> = (0..RANDOM_INSTANCES).map(|_| random_wcnf(&mut rng)).collect();
    let mut optima = Vec::new();
    let mut results = Vec::new();
    for inst in &instances {
        optima.push(brute_force_maxsat(inst).expect("within guard").optimum);
        results.push(
            Algorithm::ALL
                .iter()
                .map(|&alg| {
                    let r = run(alg, inst);
                    let cost = if r.status == Status::Optimal { r.cost } else { None };
                    (cost, r.trace.cores, r.lower_bound)
                })
                .collect(),
        );
    }
    OracleRun {
        instances,
        optima,
        results,
        wall: start.elapsed(),
    }
}

fn oracle_equivalence(o: &OracleRun) -> Verdict {
    let mut agree = 0;
    for (k, (opt, per_alg)) in o.optima.iter().zip(&o.results).enumerate() {
        for (alg, (cost, _, _)) in Algorithm::ALL.iter().zip(per_alg) {
            check(cost == opt, || format!("instance {k}: {} gave {cost:?}, oracle {opt:?}", alg.name()))?;
            agree += 1;
        }
    }
    check(o.wall < ORACLE_LIMIT, || format!("suite took {:?}", o.wall))?;
    Ok(format!("{agree}/{} runs match the oracle in {:.1?}", 3 * RANDOM_INSTANCES, o.wall))
}

fn core_soundness(o: &OracleRun) -> Verdict {
    let mut checked = 0;
    for (k, (inst, per_alg)) in o.instances.iter().zip(&o.results).enumerate() {
        for (alg, (_, cores, _)) in Algorithm::ALL.iter().zip(per_alg) {
            for core in cores {
                let ok = match alg {
                    Algorithm::Msu3 => verify_core_bounded(inst, &core.temporaries, core.bound),
                    _ => verify_core(inst, &core.clauses),
                }
                .map_err(|e| e.to_string())?;
                check(ok, || format!("instance {k}: {} core {core:?} is satisfiable", alg.name()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} cores verified, 0 failures"))
}

fn wpm1_lower_bound(o: &OracleRun) -> Verdict {
    let wpm1 = Algorithm::ALL.iter().position(|&a| a == Algorithm::Wpm1).expect("wpm1 listed");
    let mut rounds = 0;
    for (k, (opt, per_alg)) in o.optima.iter().zip(&o.results).enumerate() {
        let Some(opt) = *opt else { continue };
        let (_, cores, lower_bound) = &per_alg[wpm1];
        let mut z_min = 0;
        for core in cores {
            z_min += core.w_min.ok_or("wpm1 core without w_min")?;
            rounds += 1;
            check(z_min <= opt, || format!("instance {k}: z_min {z_min} above optimum {opt}"))?;
        }
        check(z_min == opt && *lower_bound == opt, || {
            format!("instance {k}: final z_min {z_min}, bound {lower_bound}, optimum {opt}")
        })?;
    }
    Ok(format!("z_min <= optimum after all {rounds} rounds and equal at termination"))
}

fn micro_instances() -> Vec<BenchInstance> {
    micro_set(MICRO_SEED, MICRO_COUNT)
        .into_iter()
        .map(|(name, inst)| BenchInstance {
            set: "micro".into(),
            name,
            inst,
            lower_bound: None,
        })
        .collect()
}

fn micro_config(jobs: usize) -> BenchConfig {
    BenchConfig {
        alphas: ALPHAS.to_vec(),
        modes: MODES.to_vec(),
        algorithms: Algorithm::ALL.to_vec(),
        budget: Duration::from_secs(600),
        seed: MICRO_SEED,
        jobs,
    }
}

/// Optimum per (instance, alpha, mode, algorithm) from direct solves.
fn micro_solves(set: &[BenchInstance]) -> Result<Vec<Option<u64>>, String> {
    let mut out = Vec::new();
    for (k, b) in set.iter().enumerate() {
        let l = exact_makespan(&b.inst, &opts()).map_err(|e| format!("{}: {e}", b.name))?;
        for alpha in ALPHAS {
            for mode in MODES {
                let p = match soften(&b.inst, alpha, l, mode, MICRO_SEED + k as u64) {
                    Ok(p) => p,
                    Err(_) => {
                        out.extend([None; 3]);
                        continue;
                    }
                };
                let expected = brute_force_schedule(&p).map_err(|e| e.to_string())?.optimum;
                for alg in Algorithm::ALL {
                    let z = match solve_soft(&p, alg, &opts()) {
                        Err(rcpsp::RcpspError::HardInfeasible) => None,
                        Err(e) => return Err(e.to_string()),
                        Ok(sol) => {
                            if let (Some(starts), Some(enforced)) = (&sol.starts, &sol.enforced) {
                                let audited = audit_schedule(&p, starts, enforced);
                                check(audited == Ok(sol.result.cost.unwrap_or(u64::MAX)), || {
                                    format!("{} alpha {alpha} {mode:?} {}: audit {audited:?}", b.name, alg.name())
                                })?;
                            }
                            sol.result.cost
                        }
                    };
                    check(z == expected, || {
                        format!("{} alpha {alpha} {mode:?} {}: {z:?} vs oracle {expected:?}", b.name, alg.name())
                    })?;
                    out.push(z);
                }
            }
        }
    }
    Ok(out)
}

fn micro_benchmark(set: &[BenchInstance]) -> Verdict {
    let start = Instant::now();
    let z = micro_solves(set)?;
    let wall = start.elapsed();
    check(wall < MICRO_LIMIT, || format!("suite took {wall:?}"))?;
    let solved = z.iter().filter(|z| z.is_some()).count();
    Ok(format!("{solved}/{} runs agree with the schedule oracle and pass audits in {wall:.1?}", z.len()))
}

fn determinism(o: &OracleRun, set: &[BenchInstance]) -> Verdict {
    let again = oracle_runs();
    check(again.optima == o.optima, || "oracle optima differ".into())?;
    for (k, (a, b)) in o.results.iter().zip(&again.results).enumerate() {
        for (alg, (x, y)) in Algorithm::ALL.iter().zip(a.iter().zip(b)) {
            check(x.0 == y.0 && x.1 == y.1, || format!("instance {k}: {} differs between runs", alg.name()))?;
        }
    }
    let first = micro_solves(set)?;
    check(first == micro_solves(set)?, || "micro optima differ".into())?;
    let csv = write_csv(&run_benchmark(set, &micro_config(1)), true);
    for jobs in [1, 4] {
        let rerun = write_csv(&run_benchmark(set, &micro_config(jobs)), true);
        check(rerun == csv, || format!("CSV differs with {jobs} workers"))?;
    }
    Ok(format!("identical optima, core sequences and {}-byte CSV", csv.len()))
}

fn bench_table() -> Result<String, String> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/micro");
    let out = Command::new(env!("CARGO_BIN_EXE_coremax"))
        .args(["bench", "--timeout-s", "600", "--jobs", "2"])
        .arg(&data)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn harness_shape() -> Verdict {
    let table = bench_table()?;
    let lines: Vec<&str> = table.lines().collect();
    // Two sections, three alpha blocks each, one set row per block.
    check(lines.len() == 2 * (1 + 3 * 2), || format!("unexpected table:\n{table}"))?;
    for (s, mode) in ["cardinality", "weighted"].iter().enumerate() {
        let base = s * 7;
        check(lines[base] == format!("{mode} version"), || format!("section header `{}`", lines[base]))?;
        for (a, alpha) in ALPHAS.iter().enumerate() {
            let header = lines[base + 1 + 2 * a];
            let labels = if s == 0 { ["b&b", "msu1", "msu3"] } else { ["b&b", "wpm1", "msu3"] };
            check(
                header.starts_with(&format!("alpha {alpha}")) && labels.iter().all(|l| header.contains(l)),
                || format!("block header `{header}`"),
            )?;
            let row: Vec<&str> = lines[base + 2 + 2 * a].split('|').map(str::trim).collect();
            check(row.len() == 4 && row[0].starts_with("micro"), || format!("row `{}`", row.join("|")))?;
            for cell in &row[1..] {
                let parts: Vec<&str> = cell.split_whitespace().collect();
                let ok = parts.len() == 2 && parts[0].parse::<f64>().is_ok() && parts[1].parse::<usize>().is_ok();
                check(ok, || format!("cell `{cell}`"))?;
            }
        }
    }

    // One of two runs times out at a 10 s budget and counts as exactly 10 s.
    let row = |instance: &str, status: RowStatus, wall: f64| BenchRow {
        set: "s".into(),
        alpha: 0.8,
        mode: Mode::Cardinality,
        algorithm: Algorithm::Msu3,
        instance: instance.into(),
        status,
        z_opt: None,
        wall: Duration::from_secs_f64(wall),
        conflicts: 0,
        cores: 0,
        incumbents: 0,
    };
    let timed_out = row("b", RowStatus::Timeout, 12.5);
    let mut other = row("b", RowStatus::Optimal, 0.5);
    other.algorithm = Algorithm::Wpm1;
    let report = BenchReport {
        rows: vec![row("a", RowStatus::Optimal, 0.4), timed_out, other],
        budget: Duration::from_secs(10),
    };
    let cell = summarize(&report)[&(Mode::Cardinality, 0, "s".to_string(), Algorithm::Msu3)];
    let expected = (0.4f64 * 10.0).sqrt();
    check((cell.mean_seconds - expected).abs() < 1e-9 && cell.timeouts == 1, || format!("{cell:?}"))?;
    Ok("2 sections x 3 alpha blocks of mean/timeout cells; timeouts count at the budget".into())
}

fn main() -> ExitCode {
    let o = oracle_runs();
    let set = micro_instances();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("five-clause golden", Box::new(five_clause_golden)),
        ("wpm1 core trace", Box::new(wpm1_trace)),
        ("msu3 core trace", Box::new(msu3_trace)),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&o))),
        ("core soundness", Box::new(|| core_soundness(&o))),
        ("rcpsp micro-benchmark", Box::new(|| micro_benchmark(&set))),
        ("determinism", Box::new(|| determinism(&o, &set))),
        ("wpm1 lower bound", Box::new(|| wpm1_lower_bound(&o))),
        ("harness shape", Box::new(harness_shape)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {} {name}: PASS ({msg})", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({msg})", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
