use super::select::{competition_ranks, sample_weighted, weight};
use super::*;
use crate::bench::{lookup, parse_scale};
use crate::concrete::concrete_cost;
use crate::report::input_from_json;

fn program(id: &str, scale: &[&str]) -> Program {
    lookup(id)
        .unwrap()
        .build(&parse_scale(scale.iter().copied()).unwrap())
        .unwrap()
}

fn params(psize: usize, path_len: usize, seed: u64) -> EvoParams {
    EvoParams {
        psize,
        offspring: psize,
        path_len,
        seed,
        ..EvoParams::default()
    }
}

fn origins(evo: &Evolution<'_>) -> (usize, usize) {
    let pop = &evo.population.individuals;
    let count = |o| pop.iter().filter(|i| i.origin == o).count();
    (count(Origin::Random), count(Origin::Seeded))
}

#[test]
fn initial_population_is_half_random_half_seeded() {
    let p = program("1-2", &["N=6"]);
    let opts = ExecOptions::default();
    let evo = Evolution::new(&p, params(10, 30, 1), MappingMode::Default, opts).unwrap();
    assert_eq!(origins(&evo), (5, 5));
    let evo = Evolution::new(&p, params(2, 30, 1), MappingMode::Default, opts).unwrap();
    assert_eq!(origins(&evo), (1, 1));
    let evo = Evolution::new(&p, params(7, 30, 1), MappingMode::Default, opts).unwrap();
    assert_eq!(origins(&evo), (4, 3));
}

#[test]
fn seeded_individuals_are_feasible() {
    for id in ["1-2", "1-5", "3-4"] {
        let p = lookup(id).unwrap().build_default();
        let m = lookup(id).unwrap().max_bits(&Default::default()).unwrap();
        for mode in [MappingMode::Default, MappingMode::SkipUnsat] {
            let evo = Evolution::new(&p, params(20, m, 3), mode, ExecOptions::default()).unwrap();
            for ind in evo
                .population
                .individuals
                .iter()
                .filter(|i| i.origin == Origin::Seeded)
            {
                assert!(ind.perf >= 0, "{id} {mode}");
                assert_eq!(ind.q.len(), m);
            }
        }
    }
}

#[test]
fn bad_parameters_are_rejected() {
    let p = program("3-3", &["N=4"]);
    let bad = [
        EvoParams {
            psize: 1,
            ..EvoParams::default()
        },
        EvoParams {
            r1: 0.7,
            r2: 0.5,
            ..EvoParams::default()
        },
        EvoParams {
            beta: 0.0,
            ..EvoParams::default()
        },
        EvoParams {
            offspring: 0,
            ..EvoParams::default()
        },
    ];
    for b in bad {
        assert!(matches!(
            Evolution::new(&p, b, MappingMode::Default, ExecOptions::default()),
            Err(EvoError::Param(_))
        ));
    }
}

#[test]
fn zero_generations_report_best_of_initial_population() {
    let p = program("1-1", &["N=6"]);
    let prm = params(12, 15, 8);
    let evo = Evolution::new(
        &p,
        prm.clone(),
        MappingMode::SkipUnsat,
        ExecOptions::default(),
    )
    .unwrap();
    let best = evo
        .population
        .individuals
        .iter()
        .map(|i| i.perf)
        .max()
        .unwrap();
    let r = run(
        &p,
        &prm,
        MappingMode::SkipUnsat,
        &Budget::iters(0),
        &ExecOptions::default(),
    )
    .unwrap();
    assert_eq!(r.generations, 0);
    assert_eq!(r.evals, 12);
    assert_eq!(r.best_cost, best);
    assert_eq!(r.curve.last().unwrap().best_cost, best);
}

#[test]
fn elitism_and_exact_population_size() {
    let p = program("1-2", &["N=8"]);
    for mode in [MappingMode::Default, MappingMode::SkipUnsat] {
        let mut evo = Evolution::new(&p, params(16, 56, 5), mode, ExecOptions::default()).unwrap();
        let mut best = evo.population.best_ever.perf;
        let mut pop_best = evo
            .population
            .individuals
            .iter()
            .map(|i| i.perf)
            .max()
            .unwrap();
        for _ in 0..40 {
            evo.step();
            assert_eq!(evo.population.individuals.len(), 16);
            assert!(evo.population.best_ever.perf >= best);
            let now = evo
                .population
                .individuals
                .iter()
                .map(|i| i.perf)
                .max()
                .unwrap();
            assert!(now >= pop_best, "population best dropped in {mode}");
            best = evo.population.best_ever.perf;
            pop_best = now;
        }
        assert_eq!(best, pop_best);
    }
}

#[test]
fn skip_unsat_individuals_are_all_feasible() {
    for id in ["1-1", "1-2", "1-8", "3-2"] {
        let b = lookup(id).unwrap();
        let p = b.build_default();
        let m = b.max_bits(&Default::default()).unwrap();
        let mut evo = Evolution::new(
            &p,
            params(10, m, 2),
            MappingMode::SkipUnsat,
            ExecOptions::default(),
        )
        .unwrap();
        assert!(
            evo.population.individuals.iter().all(|i| i.perf >= 0),
            "{id}"
        );
        for _ in 0..5 {
            assert!(evo.step().iter().all(|i| i.perf >= 0), "{id}");
        }
        assert_eq!(evo.tally.sat_rate(), 1.0);
    }
}

#[test]
fn offspring_crowdingness_is_computed() {
    let p = program("1-1", &["N=5"]);
    let mut evo = Evolution::new(
        &p,
        params(10, 10, 4),
        MappingMode::SkipUnsat,
        ExecOptions::default(),
    )
    .unwrap();
    let off = evo.step();
    assert_eq!(off.len(), 10);
    assert!(off.iter().all(|i| i.crowd >= 0.0 && i.crowd <= 9.0));
    assert!(off
        .iter()
        .all(|i| matches!(i.origin, Origin::Mutation | Origin::Crossover)));
}

#[test]
fn quicksort_reaches_optimum_with_a_replayable_witness() {
    let p = program("1-2", &["N=8"]);
    let prm = params(30, 56, 11);
    let budget = Budget::iters(300).with_target(35);
    let r = run(
        &p,
        &prm,
        MappingMode::SkipUnsat,
        &budget,
        &ExecOptions::default(),
    )
    .unwrap();
    assert_eq!(r.best_cost, 35);
    assert_eq!(r.sat_rate, 1.0);
    let input = input_from_json(&p.inputs, r.best_input.as_ref().unwrap()).unwrap();
    assert_eq!(concrete_cost(&p, &input, 100_000).unwrap(), 35);
    let costs: Vec<i64> = r.curve.iter().map(|c| c.best_cost).collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn single_worker_runs_are_deterministic() {
    let p = program("3-4", &["N=8"]);
    let prm = params(10, 8, 21);
    let budget = Budget::iters(15);
    let a = run(
        &p,
        &prm,
        MappingMode::SkipUnsat,
        &budget,
        &ExecOptions::default(),
    )
    .unwrap();
    let b = run(
        &p,
        &prm,
        MappingMode::SkipUnsat,
        &budget,
        &ExecOptions::default(),
    )
    .unwrap();
    assert_eq!(a.masked(), b.masked());
    let c = run(
        &p,
        &EvoParams { seed: 22, ..prm },
        MappingMode::SkipUnsat,
        &budget,
        &ExecOptions::default(),
    )
    .unwrap();
    assert_eq!(c.generations, 15);
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_change_scores() {
    let p = program("1-2", &["N=6"]);
    let prm = params(10, 30, 6);
    let one = Evolution::new(
        &p,
        prm.clone(),
        MappingMode::SkipUnsat,
        ExecOptions::default(),
    )
    .unwrap();
    let four = Evolution::new(
        &p,
        EvoParams { workers: 4, ..prm },
        MappingMode::SkipUnsat,
        ExecOptions::default(),
    )
    .unwrap();
    assert_eq!(one.population.individuals, four.population.individuals);
}

/// Spearman correlation between draw order and performance rank.
fn spearman(order: &[usize], perf: &[i64]) -> f64 {
    let n = order.len() as f64;
    let ranks = competition_ranks(perf, |a, b| a > b);
    let d2: f64 = order
        .iter()
        .enumerate()
        .map(|(pos, &k)| (pos as f64 + 1.0 - ranks[k] as f64).powi(2))
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn large_beta_draws_follow_performance_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let perf: Vec<i64> = (0..30).map(|k| (k * 37 % 30) as i64).collect();
    let ranks = competition_ranks(&perf, |a, b| a > b);
    for beta in [50.0, 1.0] {
        let mut total = 0.0;
        for _ in 0..200 {
            let items: Vec<(usize, f64)> = (0..30)
                .map(|k| (k, weight(ranks[k], 1, beta, 0.5)))
                .collect();
            let order = sample_weighted(items, 30, &mut rng);
            total += spearman(&order, &perf);
        }
        let mean = total / 200.0;
        if beta == 50.0 {
            assert!(mean > 0.999, "{mean}");
        } else {
            assert!(mean < 0.9, "{mean}");
        }
    }
}
