//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any fails.
//!
//! Runs for several minutes in an optimized build.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wca_core::baselines::symexe::search;
use wca_core::baselines::{enumerate_paths, SymExeParams};
use wca_core::bench::{lookup, parse_scale, registry, Benchmark, Scale};
use wca_core::budget::Budget;
use wca_core::concrete::{run_concrete, ConcreteInput};
use wca_core::evo::select::{best_index, crowdingness, select, weight, SelectParams};
use wca_core::evo::{self, EvoParams};
use wca_core::program::{CmpOp, Interval};
use wca_core::solver::{Formula, LinExpr, SatResult, SolverContext};
use wca_core::symbolic::{
    execute, extract_path_string, solve_witness, ExecOptions, MappingMode, PathString,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Criteria 1 and 2 share their random strings: every string must be
/// feasible, and the first 1000 per benchmark are replayed concretely.
fn random_strings(strings: usize, replays: usize) -> (Outcome, Outcome) {
    let opts = ExecOptions::default();
    let mut bad_sat = Vec::new();
    let mut bad_replay = Vec::new();
    let mut replayed = 0;
    for (n, b) in registry().iter().enumerate() {
        let p = b.build_default();
        let m = b.max_bits(&Scale::new()).unwrap();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let mut wctx = SolverContext::for_inputs(&p.inputs);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
        let (mut unsat, mut mismatch) = (0, 0);
        for k in 0..strings {
            let q = PathString::random(m, &mut rng);
            let o = match execute(&p, &q, MappingMode::SkipUnsat, &mut ctx, &opts) {
                Ok(o) => o,
                Err(_) => {
                    unsat += 1;
                    continue;
                }
            };
            if !o.sat {
                unsat += 1;
                continue;
            }
            if k < replays {
                replayed += 1;
                let ok = solve_witness(&p, &o, &mut wctx)
                    .ok()
                    .and_then(|w| run_concrete(&p, &w, opts.step_budget).ok())
                    .is_some_and(|t| t.total_cost == o.cost);
                mismatch += usize::from(!ok);
            }
        }
        if unsat > 0 {
            bad_sat.push(format!("{} {unsat}", b.id));
        }
        if mismatch > 0 {
            bad_replay.push(format!("{} {mismatch}", b.id));
        }
    }
    let total = strings * registry().len();
    (
        outcome(
            bad_sat.is_empty(),
            format!("{total} strings, infeasible: {bad_sat:?}"),
        ),
        outcome(
            bad_replay.is_empty(),
            format!("{replayed} witness replays, mismatches: {bad_replay:?}"),
        ),
    )
}

fn quicksort_optimum() -> Outcome {
    let b = lookup("1-2").unwrap();
    let s = parse_scale(["N=16"]).unwrap();
    let p = b.build(&s).unwrap();
    let target = b.known_max(&s).unwrap().unwrap();
    let mut hits = Vec::new();
    for seed in 1..=4 {
        let prm = EvoParams {
            psize: 50,
            offspring: 50,
            path_len: b.max_bits(&s).unwrap(),
            seed,
            ..EvoParams::default()
        };
        let budget = Budget::seconds(600.0).with_target(target);
        let r = evo::run(
            &p,
            &prm,
            MappingMode::SkipUnsat,
            &budget,
            &ExecOptions::default(),
        )
        .unwrap();
        hits.push((r.best_cost, r.time_to_best_ms));
    }
    let n = hits.iter().filter(|h| h.0 == target).count();
    outcome(
        target == 135 && n >= 3,
        format!("target {target}, {n}/4 seeds; (best, ms): {hits:?}"),
    )
}

fn worked_example() -> Outcome {
    let p = lookup("1-2")
        .unwrap()
        .build(&parse_scale(["N=8"]).unwrap())
        .unwrap();
    let input = ConcreteInput {
        scalars: vec![],
        arrays: vec![vec![3, 1, 4, 5, 3, 2, 2, 3]],
    };
    let trace = run_concrete(&p, &input, 100_000).unwrap();
    let mut ctx = SolverContext::for_inputs(&p.inputs);
    let q = extract_path_string(
        &p,
        &trace,
        MappingMode::SkipUnsat,
        &mut ctx,
        &ExecOptions::default(),
    )
    .unwrap();
    let want: PathString = "1 00 00 01 1 1 01".parse().unwrap();
    let got = PathString(q.bits()[..want.len().min(q.len())].to_vec());
    outcome(got == want, format!("first-call bits {got}"))
}

fn baseline_ordering() -> Outcome {
    let opts = ExecOptions::default();
    let mut rows = Vec::new();
    let mut pass = true;
    for (id, n) in [("1-2", 16), ("3-3", 20), ("3-4", 20)] {
        let b = lookup(id).unwrap();
        let s = parse_scale([format!("N={n}").as_str()]).unwrap();
        let p = b.build(&s).unwrap();
        let max = b.known_max(&s).unwrap().unwrap();
        let budget = Budget::seconds(300.0).with_target(max);
        for seed in 1..=4 {
            let prm = EvoParams {
                path_len: b.max_bits(&s).unwrap(),
                seed,
                ..EvoParams::default()
            };
            let pf = evo::run(&p, &prm, MappingMode::SkipUnsat, &budget, &opts)
                .unwrap()
                .best_cost;
            let se = search(&p, &SymExeParams::default(), &budget, &opts)
                .unwrap()
                .best_cost
                .unwrap_or(-1);
            pass &= pf >= se;
            if id != "1-2" {
                pass &= pf == max;
            }
            rows.push(format!("{id} s{seed} {pf}>={se}"));
        }
    }
    outcome(pass, rows.join(", "))
}

fn scale_with(b: &Benchmark, n: i64, small: bool) -> Scale {
    let mut s = parse_scale([format!("N={n}").as_str()]).unwrap();
    if small {
        for (k, v) in [("K", 2), ("V", 2), ("P", 3)] {
            if b.params.iter().any(|p| p.name == k) {
                s.insert(k.to_string(), v);
            }
        }
    }
    s
}

fn exhaustive_equality() -> Outcome {
    let opts = ExecOptions::default();
    let unlimited = Budget {
        seconds: None,
        max_iters: None,
        target_cost: None,
    };
    let mut checked = 0;
    let mut bad = Vec::new();
    for b in registry() {
        for small in [true, false] {
            for n in 1..=16 {
                let s = scale_with(b, n, small);
                let Ok(p) = b.build(&s) else { continue };
                let mut ctx = SolverContext::for_inputs(&p.inputs);
                let e = enumerate_paths(&p, &mut ctx, &opts, 4096).unwrap();
                if !e.complete {
                    break;
                }
                let r = search(&p, &SymExeParams::default(), &unlimited, &opts).unwrap();
                checked += 1;
                if r.best_cost != e.max_cost {
                    bad.push(format!("{} {s:?}", b.id));
                }
            }
        }
    }
    outcome(
        bad.is_empty() && checked > 0,
        format!("{checked} instances, mismatches: {bad:?}"),
    )
}

fn random_formula(rng: &mut ChaCha8Rng, nvars: usize, depth: u32) -> Formula {
    if depth > 0 && rng.gen_bool(0.3) {
        let a = random_formula(rng, nvars, depth - 1);
        let b = random_formula(rng, nvars, depth - 1);
        return match rng.gen_range(0..3) {
            0 => Formula::and(a, b),
            1 => Formula::or(a, b),
            _ => a.negate(),
        };
    }
    let mut e = LinExpr::constant(0);
    for v in 0..nvars {
        e = e.add(&LinExpr::var(v).scale(rng.gen_range(-3..=3)));
    }
    if rng.gen_bool(0.2) {
        e = e.modulo(rng.gen_range(2..=5));
    }
    let ops = [
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Gt,
        CmpOp::Ge,
    ];
    let op = ops[rng.gen_range(0..ops.len())];
    Formula::compare(op, &e, &LinExpr::constant(rng.gen_range(-10..=10)))
}

fn brute_force(domains: &[Interval], fs: &[Formula]) -> bool {
    let mut cur: Vec<i64> = domains.iter().map(|d| d.lo).collect();
    loop {
        if fs.iter().all(|f| f.eval(&cur)) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == cur.len() {
                return false;
            }
            if cur[i] < domains[i].hi {
                cur[i] += 1;
                break;
            }
            cur[i] = domains[i].lo;
            i += 1;
        }
    }
}

const Z3_SCRIPT: &str = r#"
import sys, z3
for path in sys.argv[1:]:
    s = z3.Solver()
    s.from_file(path)
    print(s.check())
"#;

fn solver_completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    let mut expected = Vec::new();
    let mut mismatches = 0;
    let mut sat = 0;
    for k in 0..1000 {
        let nvars = rng.gen_range(1..=3);
        let domains: Vec<Interval> = (0..nvars)
            .map(|_| {
                let lo = rng.gen_range(-8..=8);
                Interval::new(lo, lo + rng.gen_range(0..16))
            })
            .collect();
        let fs: Vec<Formula> = (0..rng.gen_range(0..5))
            .map(|_| random_formula(&mut rng, nvars, 2))
            .collect();
        let mut ctx = SolverContext::new(
            domains
                .iter()
                .enumerate()
                .map(|(i, d)| (format!("v{i}"), *d))
                .collect(),
        );
        for f in &fs {
            ctx.push(f.clone()).unwrap();
        }
        let got = ctx.check_sat().unwrap() == SatResult::Sat;
        let want = brute_force(&domains, &fs);
        if got {
            sat += 1;
            let model = ctx.get_model().unwrap();
            mismatches += usize::from(!fs.iter().all(|f| f.eval(model.values())));
        }
        mismatches += usize::from(got != want);
        if k % 10 == 0 {
            let path = dir.path().join(format!("i{k}.smt2"));
            std::fs::write(&path, ctx.export_smtlib()).unwrap();
            files.push(path);
            expected.push(if got { "sat" } else { "unsat" });
        }
    }
    let z3 = Command::new("python3")
        .arg("-c")
        .arg(Z3_SCRIPT)
        .args(&files)
        .output();
    let cross = match z3 {
        Ok(out) if out.status.success() => {
            let text = String::from_utf8_lossy(&out.stdout);
            let answers: Vec<&str> = text.lines().collect();
            let agree = answers.len() == expected.len()
                && answers.iter().zip(&expected).all(|(a, b)| a == b);
            Some(agree)
        }
        _ => None,
    };
    let cross_text = match cross {
        Some(true) => format!("z3 agrees on {}", files.len()),
        Some(false) => format!("z3 DISAGREES on the {} exported files", files.len()),
        None => "z3 cross-check skipped (python3 with z3 not available)".to_string(),
    };
    outcome(
        mismatches == 0 && cross != Some(false),
        format!("1000 instances ({sat} sat), {mismatches} mismatches; {cross_text}"),
    )
}

fn ea_mechanics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..1000 {
        let psize = rng.gen_range(2..=40);
        let noff = rng.gen_range(0..=2 * psize);
        let r1 = rng.gen_range(0.0..0.5);
        let p = SelectParams {
            psize,
            r1,
            r2: rng.gen_range(r1..1.0),
            beta: rng.gen_range(0.1..5.0),
            gamma: rng.gen_range(0.0..2.0),
        };
        let prev: Vec<i64> = (0..psize).map(|_| rng.gen_range(-1..50)).collect();
        let off: Vec<i64> = (0..noff).map(|_| rng.gen_range(-1..50)).collect();
        let crowd: Vec<f64> = (0..noff).map(|_| rng.gen_range(0.0..5.0)).collect();
        let s = select(&prev, &off, &crowd, &p, &mut rng);
        let best = best_index(&prev).unwrap();
        let mut all: Vec<(bool, usize)> = s.prev.iter().map(|&k| (false, k)).collect();
        all.extend(s.offspring.iter().map(|&k| (true, k)));
        all.sort();
        all.dedup();
        let exact = s.len() == psize && all.len() == psize;
        bad += usize::from(!exact || !s.prev.contains(&best));
    }
    let q: PathString = "0110".parse().unwrap();
    let crowd = crowdingness(&[(&q, 4), (&q, 4), (&q, 4)]);
    let crowd_ok = crowd.iter().all(|&c| (c - 2.0).abs() < 1e-12);
    let w11 = weight(1, 1, 1.0, 0.5);
    let w21 = weight(2, 1, 1.0, 0.5);
    let w_ok = (w11 - 1.0).abs() < 1e-12 && (w21 - 0.5).abs() < 1e-12;
    outcome(
        bad == 0 && crowd_ok && w_ok,
        format!(
            "1000 selections, {bad} bad; crowd {crowd:?}; weight(1,1)={w11}, weight(2,1)={w21}"
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let start = Instant::now();
    let (c1, c2) = random_strings(10_000, 1_000);
    let mut results = vec![("1 complete satisfiability", c1), ("2 witness replay", c2)];
    let rest: [(&str, Check); 6] = [
        ("3 quicksort optimum", quicksort_optimum),
        ("4 worked example bits", worked_example),
        ("5 baseline ordering", baseline_ordering),
        ("6 exhaustive equality", exhaustive_equality),
        ("7 solver completeness", solver_completeness),
        ("8 EA mechanics", ea_mechanics),
    ];
    for (name, f) in rest {
        results.push((name, f()));
    }
    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{tag} {name}: {}", o.detail);
    }
    println!(
        "acceptance: {}/{} passed in {:.0} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
