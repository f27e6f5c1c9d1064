//! The path-string evolutionary search.
//!
//! Individuals are path strings of fixed length `M`, scored by symbolic
//! execution: the path cost when feasible, `-1` otherwise. Half of the
//! initial population is random, half comes from random concrete inputs.
//! Each generation produces offspring by mutation or crossover of uniformly
//! chosen parents and then selects survivors (see [`select`]).

pub mod ops;
pub mod select;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::concrete::{random_input_with, run_concrete};
use crate::parallel::Workers;
use crate::program::Program;
use crate::report::{input_json, CurveRecorder, Method, RunReport, SolverSummary};
use crate::solver::{SolverContext, SolverStats};
use crate::symbolic::{
    execute, extract_path_string, solve_witness, ExecOptions, MappingMode, PathString, SymError,
};

pub use ops::{CrossoverKind, MutationKind};
use select::{crowdingness, SelectParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvoError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvoParams {
    pub psize: usize,
    pub r1: f64,
    pub r2: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Path-string length `M`.
    pub path_len: usize,
    /// Offspring per generation.
    pub offspring: usize,
    /// Share of offspring made by mutation; the rest by crossover.
    pub mutation_share: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for EvoParams {
    fn default() -> Self {
        Self {
            psize: 50,
            r1: 0.2,
            r2: 0.4,
            beta: 1.0,
            gamma: 0.5,
            path_len: 64,
            offspring: 50,
            mutation_share: 0.5,
            seed: 0,
            workers: 1,
        }
    }
}

impl EvoParams {
    pub fn validate(&self) -> Result<(), EvoError> {
        let bad = |m: &str| Err(EvoError::Param(m.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.psize < 2 {
            return bad("psize must be at least 2");
        }
        if !unit(self.r1) || !unit(self.r2) || self.r1 + self.r2 > 1.0 + 1e-9 {
            return bad("r1, r2 and 1 - r1 - r2 must lie in [0, 1]");
        }
        if !(self.beta > 0.0 && self.beta.is_finite() && self.gamma > 0.0 && self.gamma.is_finite())
        {
            return bad("beta and gamma must be positive");
        }
        if self.offspring == 0 {
            return bad("offspring count must be at least 1");
        }
        if !unit(self.mutation_share) {
            return bad("mutation share must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn selection(&self) -> SelectParams {
        SelectParams {
            psize: self.psize,
            r1: self.r1,
            r2: self.r2,
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Random,
    Seeded,
    Mutation,
    Crossover,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub q: PathString,
    /// Path cost when feasible, else -1.
    pub perf: i64,
    /// Bits used.
    pub m: usize,
    pub crowd: f64,
    pub origin: Origin,
}

/// One scored path string.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub perf: i64,
    pub m: usize,
    pub sat: bool,
    pub solver_exceeded: bool,
    pub error: Option<String>,
    pub stats: SolverStats,
}

pub fn evaluate(
    program: &Program,
    q: &PathString,
    mode: MappingMode,
    ctx: &mut SolverContext,
    opts: &ExecOptions,
) -> Evaluation {
    let r = execute(program, q, mode, ctx, opts);
    let stats = ctx.take_stats();
    match r {
        Ok(o) => Evaluation {
            perf: if o.sat { o.cost } else { -1 },
            m: o.m,
            sat: o.sat,
            solver_exceeded: o.solver_budget_exceeded,
            error: None,
            stats,
        },
        Err(e) => Evaluation {
            perf: -1,
            m: match e {
                SymError::PathTooShort { used } => used,
                _ => q.len(),
            },
            sat: false,
            solver_exceeded: false,
            error: Some(e.to_string()),
            stats,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub generation: u64,
    pub individuals: Vec<Individual>,
    pub best_ever: Individual,
}

/// Running totals over every evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub evals: u64,
    pub sat: u64,
    pub errors: u64,
    pub first_error: Option<String>,
    pub solver_exceeded: u64,
    pub stats: SolverStats,
}

impl Tally {
    pub fn add(&mut self, e: &Evaluation) {
        self.evals += 1;
        self.sat += e.sat as u64;
        self.solver_exceeded += e.solver_exceeded as u64;
        if let Some(err) = &e.error {
            self.errors += 1;
            self.first_error.get_or_insert_with(|| err.clone());
        }
        self.stats.merge(&e.stats);
    }

    pub fn sat_rate(&self) -> f64 {
        if self.evals == 0 {
            0.0
        } else {
            self.sat as f64 / self.evals as f64
        }
    }
}

/// A search in progress; [`run`] drives it against a budget.
pub struct Evolution<'a> {
    program: &'a Program,
    params: EvoParams,
    mode: MappingMode,
    opts: ExecOptions,
    workers: Workers,
    rng: ChaCha8Rng,
    pub population: Population,
    pub tally: Tally,
}

impl<'a> Evolution<'a> {
    /// Builds and scores the initial population: `ceil(psize/2)` random
    /// strings and `floor(psize/2)` strings extracted from random inputs.
    pub fn new(
        program: &'a Program,
        params: EvoParams,
        mode: MappingMode,
        opts: ExecOptions,
    ) -> Result<Self, EvoError> {
        Self::with_observer(program, params, mode, opts, &mut |_, _| {})
    }

    fn with_observer(
        program: &'a Program,
        params: EvoParams,
        mode: MappingMode,
        opts: ExecOptions,
        observe: &mut dyn FnMut(&Individual, u64),
    ) -> Result<Self, EvoError> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let len = params.path_len;
        let n_random = params.psize.div_ceil(2);
        let mut strings: Vec<(PathString, Origin)> = (0..n_random)
            .map(|_| (PathString::random(len, &mut rng), Origin::Random))
            .collect();
        let mut ctx = SolverContext::for_inputs(&program.inputs);
        for _ in n_random..params.psize {
            let input = random_input_with(&program.inputs, &mut rng);
            let trace = run_concrete(program, &input, opts.step_budget).map_err(SymError::from)?;
            let q = extract_path_string(program, &trace, mode, &mut ctx, &opts)?;
            strings.push((q.normalized(len), Origin::Seeded));
        }
        let mut evo = Evolution {
            program,
            mode,
            opts,
            workers: Workers::new(params.workers),
            rng,
            population: Population {
                generation: 0,
                individuals: Vec::new(),
                best_ever: placeholder(len),
            },
            tally: Tally::default(),
            params,
        };
        evo.tally.stats.merge(&ctx.take_stats());
        let scored = evo.score(strings, observe);
        let best = scored
            .iter()
            .max_by_key(|i| i.perf)
            .cloned()
            .expect("psize >= 2");
        evo.population.individuals = scored;
        evo.population.best_ever = best;
        Ok(evo)
    }

    pub fn params(&self) -> &EvoParams {
        &self.params
    }

    pub fn workers(&self) -> usize {
        self.workers.count()
    }

    fn score(
        &mut self,
        strings: Vec<(PathString, Origin)>,
        observe: &mut dyn FnMut(&Individual, u64),
    ) -> Vec<Individual> {
        let (program, mode, opts) = (self.program, self.mode, self.opts);
        let evals = self.workers.map_init(
            &strings,
            || SolverContext::for_inputs(&program.inputs),
            |ctx, (q, _)| evaluate(program, q, mode, ctx, &opts),
        );
        let mut out = Vec::with_capacity(strings.len());
        for ((q, origin), e) in strings.into_iter().zip(evals) {
            self.tally.add(&e);
            let ind = Individual {
                q,
                perf: e.perf,
                m: e.m,
                crowd: 0.0,
                origin,
            };
            observe(&ind, self.tally.evals);
            out.push(ind);
        }
        out
    }

    fn offspring_strings(&mut self) -> Vec<(PathString, Origin)> {
        let pop = &self.population.individuals;
        let len = self.params.path_len;
        let rng = &mut self.rng;
        (0..self.params.offspring)
            .map(|_| {
                if rng.gen_bool(self.params.mutation_share) {
                    let p = pop.choose(rng).expect("population is not empty");
                    let kind = if rng.gen_bool(0.5) {
                        MutationKind::A
                    } else {
                        MutationKind::B
                    };
                    (ops::mutate(&p.q, p.m, kind, rng), Origin::Mutation)
                } else {
                    let a = pop.choose(rng).expect("population is not empty");
                    let b = pop.choose(rng).expect("population is not empty");
                    let kind = *[CrossoverKind::A, CrossoverKind::B, CrossoverKind::C]
                        .choose(rng)
                        .unwrap();
                    (
                        ops::crossover(&a.q, a.m, &b.q, b.m, kind, len, rng),
                        Origin::Crossover,
                    )
                }
            })
            .collect()
    }

    /// One generation: breed, score, select. Returns the scored offspring.
    pub fn step(&mut self) -> Vec<Individual> {
        self.step_observed(&mut |_, _| {})
    }

    fn step_observed(&mut self, observe: &mut dyn FnMut(&Individual, u64)) -> Vec<Individual> {
        let strings = self.offspring_strings();
        let mut offspring = self.score(strings, observe);
        let crowd = crowdingness(&offspring.iter().map(|i| (&i.q, i.m)).collect::<Vec<_>>());
        for (ind, c) in offspring.iter_mut().zip(&crowd) {
            ind.crowd = *c;
        }
        if let Some(b) = offspring.iter().max_by_key(|i| i.perf) {
            if b.perf > self.population.best_ever.perf {
                self.population.best_ever = b.clone();
            }
        }
        let prev_perf: Vec<i64> = self.population.individuals.iter().map(|i| i.perf).collect();
        let off_perf: Vec<i64> = offspring.iter().map(|i| i.perf).collect();
        let chosen = select::select(
            &prev_perf,
            &off_perf,
            &crowd,
            &self.params.selection(),
            &mut self.rng,
        );
        let mut next: Vec<Individual> = chosen
            .prev
            .iter()
            .map(|&k| self.population.individuals[k].clone())
            .collect();
        next.extend(chosen.offspring.iter().map(|&k| offspring[k].clone()));
        self.population.individuals = next;
        self.population.generation += 1;
        offspring
    }
}

fn placeholder(len: usize) -> Individual {
    Individual {
        q: PathString::zeros(len),
        perf: -1,
        m: 0,
        crowd: 0.0,
        origin: Origin::Random,
    }
}

/// Runs the search until the budget is spent and reports the best path
/// found with a concrete input that follows it.
pub fn run(
    program: &Program,
    params: &EvoParams,
    mode: MappingMode,
    budget: &Budget,
    opts: &ExecOptions,
) -> Result<RunReport, EvoError> {
    let start = Instant::now();
    let mut curve = CurveRecorder::new(start);
    let mut evo = Evolution::with_observer(program, params.clone(), mode, *opts, &mut |i, n| {
        record(&mut curve, i, n)
    })?;
    let stop = loop {
        let best = Some(evo.population.best_ever.perf).filter(|p| *p >= 0);
        if let Some(reason) = budget.check(start, evo.population.generation, best) {
            break reason;
        }
        evo.step_observed(&mut |i, n| record(&mut curve, i, n));
        curve.tick(evo.tally.evals);
    };

    let best = evo.population.best_ever.clone();
    let mut ctx = SolverContext::for_inputs(&program.inputs);
    let best_input = if best.perf >= 0 {
        let outcome = execute(program, &best.q, mode, &mut ctx, opts)?;
        Some(input_json(
            &program.inputs,
            &solve_witness(program, &outcome, &mut ctx)?,
        ))
    } else {
        None
    };
    let mut stats = evo.tally.stats;
    stats.merge(&ctx.take_stats());
    let wall = start.elapsed().as_secs_f64();
    let (points, best_at) = curve.finish(evo.tally.evals);
    Ok(RunReport {
        method: Method::PathFuzz,
        program: program.name.clone(),
        program_name: program.name.clone(),
        scale: program.scale_params.clone(),
        mapping: Some(mode),
        params: serde_json::to_value(params).expect("params serialize"),
        seed: params.seed,
        workers: evo.workers(),
        best_cost: best.perf,
        best_input,
        best_path: (best.perf >= 0).then(|| best.q.clone()),
        curve: points,
        evals: evo.tally.evals,
        generations: evo.population.generation,
        sat_rate: evo.tally.sat_rate(),
        errors: evo.tally.errors,
        first_error: evo.tally.first_error.clone(),
        solver_budget_exceeded: evo.tally.solver_exceeded,
        dropped_states: 0,
        solver: SolverSummary::from_stats(&stats, wall),
        stop_reason: stop,
        wall_time_s: wall,
        time_to_best_ms: best_at,
    })
}

fn record(curve: &mut CurveRecorder, ind: &Individual, evals: u64) {
    if ind.perf >= 0 {
        curve.observe(ind.perf, evals);
    }
}

#[cfg(test)]
mod tests;
