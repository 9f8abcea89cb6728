//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | optimum or unsatisfiability proven; verification ok  |
//! | 1    | verification failed                                  |
//! | 2    | usage, I/O or parse error                            |
//! | 3    | budget exhausted before a proof                      |
//! | 4    | instance too large for the exhaustive checker        |

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coremax::engine::Lit;
use coremax::maxsat::{self, parse_wcnf, Algorithm, SoftInstance, SoftProblem, SolveOptions, Status};
use coremax::oracle::{self, OracleError};
use coremax::rcpsp::{self, BenchConfig, BenchInstance, Mode, RcpspError};

const VERIFIED: u8 = 0;
const REJECTED: u8 = 1;
const FAILURE: u8 = 2;
const UNKNOWN: u8 = 3;
const REFUSED: u8 = 4;

#[derive(Parser)]
#[command(name = "coremax", version, about = "Core-guided MaxSAT and soft-precedence scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a WCNF file and print o/s/v lines.
    SolveWcnf {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve one RCPSP/max instance with soft precedences.
    SolveRcpsp {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        soft: SoftArgs,
        /// Makespan bound l; computed exactly when omitted.
        #[arg(long)]
        lower_bound: Option<i64>,
    },
    /// Run the alpha x mode x algorithm grid over a directory of instances.
    Bench {
        dir: PathBuf,
        #[arg(long = "algorithm", value_enum, default_values_t = [AlgArg::Bnb, AlgArg::Wpm1, AlgArg::Msu3])]
        algorithms: Vec<AlgArg>,
        #[arg(long = "alpha", default_values_t = [0.7, 0.8, 0.9])]
        alphas: Vec<f64>,
        #[arg(long = "mode", value_enum, default_values_t = [ModeArg::Cardinality, ModeArg::Weighted])]
        modes: Vec<ModeArg>,
        #[arg(long, default_value_t = 600.0)]
        timeout_s: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Where to write the per-run CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write `masked` instead of wall times so reruns compare byte for byte.
        #[arg(long)]
        mask_timing: bool,
    },
    /// Check a claim about a WCNF instance by exhaustive enumeration.
    ///
    /// The claim file holds either solver output (`s`, `o` and `v` lines),
    /// `optimum <z>`, `unsatisfiable`, or `core <id> ...` with 1-based
    /// clause numbers.
    Verify { instance: PathBuf, claim: PathBuf },
    /// Write seeded micro instances into a directory.
    GenMicro {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = AlgArg::Msu3)]
    algorithm: AlgArg,
    #[arg(long, default_value_t = 600.0)]
    timeout_s: f64,
}

#[derive(Args)]
struct SoftArgs {
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Cardinality)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Bnb,
    Wpm1,
    Msu3,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::Bnb => Algorithm::BranchAndBound,
            AlgArg::Wpm1 => Algorithm::Wpm1,
            AlgArg::Msu3 => Algorithm::Msu3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Cardinality,
    Weighted,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cardinality => Mode::Cardinality,
            ModeArg::Weighted => Mode::Weighted,
        }
    }
}

/// Error carrying its exit code.
struct Exit(u8, String);

fn fail(msg: impl Into<String>) -> Exit {
    Exit(FAILURE, msg.into())
}

fn budget(seconds: f64) -> Result<SolveOptions, Exit> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(fail("--timeout-s must be positive"));
    }
    Ok(SolveOptions {
        timeout: Some(Duration::from_secs_f64(seconds)),
        max_conflicts: None,
    })
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn load_wcnf(path: &Path) -> Result<SoftInstance, Exit> {
    parse_wcnf(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Optimal | Status::Unsatisfiable => VERIFIED,
        Status::Unknown => UNKNOWN,
    }
}

fn solve_wcnf(path: &Path, run: &RunArgs) -> Result<u8, Exit> {
    let inst = load_wcnf(path)?;
    let opts = budget(run.timeout_s)?;
    let r = maxsat::solve(SoftProblem::from_instance(&inst), run.algorithm.into(), &opts);
    println!("c algorithm {}", Algorithm::from(run.algorithm).name());
    println!("c conflicts {} cores {}", r.stats.conflicts, r.trace.cores.len());
    print!("{}", r.format(inst.num_vars));
    Ok(status_code(r.status))
}

fn rcpsp_error(path: &Path, e: RcpspError) -> Exit {
    fail(format!("{}: {e}", path.display()))
}

fn solve_rcpsp(path: &Path, run: &RunArgs, soft: &SoftArgs, lower_bound: Option<i64>) -> Result<u8, Exit> {
    let inst = rcpsp::parse_instance(&read(path)?).map_err(|e| rcpsp_error(path, e))?;
    let opts = budget(run.timeout_s)?;
    let l = match lower_bound {
        Some(l) => l,
        None => match rcpsp::exact_makespan(&inst, &opts) {
            Ok(l) => l,
            Err(RcpspError::Budget) => {
                println!("s UNKNOWN");
                return Ok(UNKNOWN);
            }
            Err(e) => return Err(rcpsp_error(path, e)),
        },
    };
    let p = rcpsp::soften(&inst, soft.alpha, l, soft.mode.into(), soft.seed).map_err(|e| rcpsp_error(path, e))?;
    println!("c lower bound {l} horizon {}", p.horizon);
    let sol = match rcpsp::solve_soft(&p, run.algorithm.into(), &opts) {
        Ok(sol) => sol,
        Err(RcpspError::HardInfeasible) => {
            println!("s UNSATISFIABLE");
            return Ok(VERIFIED);
        }
        Err(e) => return Err(rcpsp_error(path, e)),
    };
    let r = &sol.result;
    for z in &r.trace.incumbents {
        println!("o {z}");
    }
    match r.status {
        Status::Optimal => println!("s OPTIMUM FOUND"),
        Status::Unsatisfiable => println!("s UNSATISFIABLE"),
        Status::Unknown => println!("s UNKNOWN"),
    }
    if let (Some(starts), Some(enforced)) = (&sol.starts, &sol.enforced) {
        let audited = rcpsp::audit_schedule(&p, starts, enforced);
        if audited != Ok(r.cost.unwrap_or(0)) {
            return Err(Exit(REJECTED, format!("schedule failed its audit: {audited:?}")));
        }
        let starts: Vec<String> = starts.iter().map(i64::to_string).collect();
        println!("c starts {}", starts.join(" "));
        let dropped: Vec<String> = (1..=enforced.len()).filter(|&k| !enforced[k - 1]).map(|k| k.to_string()).collect();
        println!("c violated {}", dropped.join(" "));
    }
    Ok(status_code(r.status))
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, Exit> {
    let entries = fs::read_dir(dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(fail(format!("{}: no instance files", dir.display())));
    }
    Ok(files)
}

#[allow(clippy::too_many_arguments)]
fn bench(
    dir: &Path,
    algorithms: &[AlgArg],
    alphas: &[f64],
    modes: &[ModeArg],
    timeout_s: f64,
    seed: u64,
    jobs: usize,
    csv: Option<&Path>,
    mask_timing: bool,
) -> Result<u8, Exit> {
    let budget = budget(timeout_s)?.timeout.expect("budget has a timeout");
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(fail(format!("alpha {a} is outside (0, 1]")));
    }
    let set = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instances".into());
    let mut instances = Vec::new();
    for path in instance_files(dir)? {
        let inst = rcpsp::parse_instance(&read(&path)?).map_err(|e| rcpsp_error(&path, e))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        instances.push(BenchInstance {
            set: set.clone(),
            name,
            inst,
            lower_bound: None,
        });
    }
    let cfg = BenchConfig {
        alphas: alphas.to_vec(),
        modes: modes.iter().map(|&m| m.into()).collect(),
        algorithms: algorithms.iter().map(|&a| a.into()).collect(),
        budget,
        seed,
        jobs,
    };
    let report = rcpsp::run_benchmark(&instances, &cfg);
    if let Some(path) = csv {
        fs::write(path, rcpsp::write_csv(&report, mask_timing)).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    }
    print!("{}", rcpsp::format_table(&report));
    Ok(VERIFIED)
}

enum Claim {
    Core(Vec<usize>),
    Optimum(u64),
    Unsatisfiable,
    /// Model over the instance variables with its reported cost.
    Model(Vec<bool>, Option<u64>),
}

fn parse_claim(text: &str, num_vars: usize) -> Result<Claim, String> {
    let mut status = None;
    let mut last_o = None;
    let mut model: Option<Vec<bool>> = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        let num = |w: &str| w.parse::<i64>().map_err(|_| format!("bad number `{w}`"));
        match head {
            "core" => {
                let ids = words
                    .map(|w| match num(w)? {
                        k if k >= 1 => Ok(k as usize - 1),
                        _ => Err(format!("clause ids start at 1: `{w}`")),
                    })
                    .collect::<Result<_, _>>()?;
                return Ok(Claim::Core(ids));
            }
            "optimum" => {
                let z = words.next().ok_or("optimum needs a value")?;
                return z.parse().map(Claim::Optimum).map_err(|_| format!("bad optimum `{z}`"));
            }
            "unsatisfiable" => return Ok(Claim::Unsatisfiable),
            "c" => {}
            "o" => last_o = Some(words.next().and_then(|w| w.parse::<u64>().ok()).ok_or("bad o line")?),
            "s" => status = Some(words.collect::<Vec<_>>().join(" ")),
            "v" => {
                let m = model.get_or_insert_with(|| vec![false; num_vars]);
                for w in words {
                    let v = num(w)?;
                    if v == 0 {
                        continue;
                    }
                    let lit = Lit::from_dimacs(v as i32);
                    let i = lit.var().index();
                    if i >= num_vars {
                        return Err(format!("variable {} out of range", v.abs()));
                    }
                    m[i] = lit.is_positive();
                }
            }
            _ => return Err(format!("unrecognized claim line `{line}`")),
        }
    }
    match status.as_deref() {
        Some("UNSATISFIABLE") => Ok(Claim::Unsatisfiable),
        Some("OPTIMUM FOUND") => match model {
            Some(m) => Ok(Claim::Model(m, last_o)),
            None => last_o.map(Claim::Optimum).ok_or_else(|| "no model or objective".to_string()),
        },
        Some(s) => Err(format!("nothing to verify for status `{s}`")),
        None => Err("empty claim".to_string()),
    }
}

fn oracle_exit(e: OracleError) -> Exit {
    match e {
        OracleError::TooManyVars { .. } | OracleError::GridTooLarge { .. } => Exit(REFUSED, e.to_string()),
        _ => fail(e.to_string()),
    }
}

fn verify(instance: &Path, claim: &Path) -> Result<u8, Exit> {
    let inst = load_wcnf(instance)?;
    let claim = parse_claim(&read(claim)?, inst.num_vars).map_err(|e| fail(format!("{}: {e}", claim.display())))?;
    let (ok, what) = match claim {
        Claim::Core(ids) => (oracle::verify_core(&inst, &ids).map_err(oracle_exit)?, "core"),
        Claim::Optimum(z) => {
            let best = oracle::brute_force_maxsat(&inst).map_err(oracle_exit)?;
            (best.optimum == Some(z), "optimum")
        }
        Claim::Unsatisfiable => {
            let best = oracle::brute_force_maxsat(&inst).map_err(oracle_exit)?;
            (best.optimum.is_none(), "unsatisfiability")
        }
        Claim::Model(m, z) => {
            let best = oracle::brute_force_maxsat(&inst).map_err(oracle_exit)?;
            let cost = inst.cost(&m);
            (cost.is_some() && cost == best.optimum && z.is_none_or(|z| Some(z) == cost), "model")
        }
    };
    if ok {
        println!("c {what} verified");
        Ok(VERIFIED)
    } else {
        println!("c {what} rejected");
        Ok(REJECTED)
    }
}

fn gen_micro(dir: &Path, seed: u64, count: usize) -> Result<u8, Exit> {
    fs::create_dir_all(dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    for (name, inst) in rcpsp::micro_set(seed, count) {
        let path = dir.join(format!("{name}.rcp"));
        fs::write(&path, rcpsp::write_instance(&inst)).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    }
    Ok(VERIFIED)
}

fn run(cli: Cli) -> Result<u8, Exit> {
    match cli.command {
        Command::SolveWcnf { path, run } => solve_wcnf(&path, &run),
        Command::SolveRcpsp {
            path,
            run,
            soft,
            lower_bound,
        } => solve_rcpsp(&path, &run, &soft, lower_bound),
        Command::Bench {
            dir,
            algorithms,
            alphas,
            modes,
            timeout_s,
            seed,
            jobs,
            csv,
            mask_timing,
        } => bench(&dir, &algorithms, &alphas, &modes, timeout_s, seed, jobs, csv.as_deref(), mask_timing),
        Command::Verify { instance, claim } => verify(&instance, &claim),
        Command::GenMicro { dir, seed, count } => gen_micro(&dir, seed, count),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
