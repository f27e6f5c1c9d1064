//! Evolutionary fuzzing over concrete inputs.
//!
//! Same loop and survivor selection as the path-string search, with
//! individuals being flat input vectors scored by concrete execution.
//! Crowdingness uses the share of equal positions as similarity.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget::Budget;
use crate::concrete::{random_input_with, run_concrete, ConcreteInput};
use crate::evo::select::{crowd_by, select};
use crate::evo::{EvoError, EvoParams};
use crate::parallel::Workers;
use crate::program::{Interval, Program};
use crate::report::{input_json, CurveRecorder, Method, RunReport, SolverSummary};
use crate::solver::SolverStats;

#[derive(Debug, Clone, PartialEq)]
pub struct InputIndividual {
    /// Flat input values.
    pub values: Vec<i64>,
    /// Concrete cost, -1 when execution failed.
    pub perf: i64,
}

/// Redraws one position uniformly or moves it by one, clamped to its domain.
pub fn mutate_input<R: Rng + ?Sized>(
    values: &[i64],
    domains: &[Interval],
    rng: &mut R,
) -> Vec<i64> {
    let mut out = values.to_vec();
    if out.is_empty() {
        return out;
    }
    let k = rng.gen_range(0..out.len());
    let d = domains[k];
    out[k] = if rng.gen_bool(0.5) {
        rng.gen_range(d.lo..=d.hi)
    } else {
        let step = if rng.gen_bool(0.5) { 1 } else { -1 };
        out[k].saturating_add(step).clamp(d.lo, d.hi)
    };
    out
}

/// Prefix of `a` spliced onto the suffix of `b` at a uniform cut.
pub fn splice<R: Rng + ?Sized>(a: &[i64], b: &[i64], rng: &mut R) -> Vec<i64> {
    let cut = rng.gen_range(0..=a.len());
    a[..cut].iter().chain(&b[cut..]).copied().collect()
}

fn equal_share(a: &[i64], b: &[i64]) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

fn score(program: &Program, values: &[i64], step_budget: u64) -> i64 {
    let input = ConcreteInput::from_flat(&program.inputs, values);
    run_concrete(program, &input, step_budget).map_or(-1, |t| t.total_cost)
}

pub fn fuzz_inputs(
    program: &Program,
    params: &EvoParams,
    budget: &Budget,
    step_budget: u64,
) -> Result<RunReport, EvoError> {
    params.validate()?;
    let start = Instant::now();
    let mut curve = CurveRecorder::new(start);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let workers = Workers::new(params.workers);
    let domains = program.inputs.flat_domains();
    // (evaluations, failures)
    let mut tally = (0u64, 0u64);

    let run_batch = |batch: Vec<Vec<i64>>, curve: &mut CurveRecorder, tally: &mut (u64, u64)| {
        let perf = workers.map_init(&batch, || (), |_, v| score(program, v, step_budget));
        batch
            .into_iter()
            .zip(perf)
            .map(|(values, perf)| {
                tally.0 += 1;
                if perf < 0 {
                    tally.1 += 1;
                } else {
                    curve.observe(perf, tally.0);
                }
                InputIndividual { values, perf }
            })
            .collect::<Vec<_>>()
    };

    let init: Vec<Vec<i64>> = (0..params.psize)
        .map(|_| random_input_with(&program.inputs, &mut rng).to_flat())
        .collect();
    let mut pop = run_batch(init, &mut curve, &mut tally);
    let mut best = pop
        .iter()
        .max_by_key(|i| i.perf)
        .cloned()
        .expect("psize >= 2");
    let mut generation = 0u64;

    let stop = loop {
        if let Some(r) = budget.check(start, generation, Some(best.perf).filter(|p| *p >= 0)) {
            break r;
        }
        let children: Vec<Vec<i64>> = (0..params.offspring)
            .map(|_| {
                let a = pop.choose(&mut rng).expect("population is not empty");
                if rng.gen_bool(params.mutation_share) {
                    mutate_input(&a.values, &domains, &mut rng)
                } else {
                    let b = pop.choose(&mut rng).expect("population is not empty");
                    splice(&a.values, &b.values, &mut rng)
                }
            })
            .collect();
        let offspring = run_batch(children, &mut curve, &mut tally);
        if let Some(b) = offspring.iter().max_by_key(|i| i.perf) {
            if b.perf > best.perf {
                best = b.clone();
            }
        }
        let crowd = crowd_by(offspring.len(), |x, y| {
            equal_share(&offspring[x].values, &offspring[y].values)
        });
        let prev_perf: Vec<i64> = pop.iter().map(|i| i.perf).collect();
        let off_perf: Vec<i64> = offspring.iter().map(|i| i.perf).collect();
        let chosen = select(&prev_perf, &off_perf, &crowd, &params.selection(), &mut rng);
        let mut next: Vec<InputIndividual> = chosen.prev.iter().map(|&k| pop[k].clone()).collect();
        next.extend(chosen.offspring.iter().map(|&k| offspring[k].clone()));
        pop = next;
        generation += 1;
        curve.tick(tally.0);
    };
    let (evals, errors) = tally;

    let wall = start.elapsed().as_secs_f64();
    let (points, best_at) = curve.finish(evals);
    let found = best.perf >= 0;
    Ok(RunReport {
        method: Method::Fuzz,
        program: program.name.clone(),
        program_name: program.name.clone(),
        scale: program.scale_params.clone(),
        mapping: None,
        params: serde_json::to_value(params).expect("params serialize"),
        seed: params.seed,
        workers: workers.count(),
        best_cost: best.perf,
        best_input: found.then(|| {
            input_json(
                &program.inputs,
                &ConcreteInput::from_flat(&program.inputs, &best.values),
            )
        }),
        best_path: None,
        curve: points,
        evals,
        generations: generation,
        sat_rate: if evals == 0 {
            0.0
        } else {
            (evals - errors) as f64 / evals as f64
        },
        errors,
        first_error: None,
        solver_budget_exceeded: 0,
        dropped_states: 0,
        solver: SolverSummary::from_stats(&SolverStats::default(), wall),
        stop_reason: stop,
        wall_time_s: wall,
        time_to_best_ms: best_at,
    })
}
