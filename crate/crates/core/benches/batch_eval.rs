//! Scoring one generation of path strings on one worker versus a pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wca_core::bench::{lookup, parse_scale};
use wca_core::evo::evaluate;
use wca_core::parallel::{map_init_seq, Workers};
use wca_core::solver::SolverContext;
use wca_core::symbolic::{ExecOptions, MappingMode, PathString};

fn batch_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch_eval");
    group.sample_size(10);
    for (id, scale) in [("1-2", "N=16"), ("1-4", "N=6")] {
        let b = lookup(id).unwrap();
        let s = parse_scale([scale]).unwrap();
        let p = b.build(&s).unwrap();
        let m = b.max_bits(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let batch: Vec<PathString> = (0..64).map(|_| PathString::random(m, &mut rng)).collect();
        let opts = ExecOptions::default();
        let init = || SolverContext::for_inputs(&p.inputs);
        let eval = |ctx: &mut SolverContext, q: &PathString| {
            evaluate(&p, q, MappingMode::SkipUnsat, ctx, &opts).perf
        };

        group.bench_function(BenchmarkId::new("sequential", b.name), |bch| {
            bch.iter(|| map_init_seq(&batch, init, eval))
        });
        let pool = Workers::new(4);
        group.bench_function(
            BenchmarkId::new(format!("pool{}", pool.count()), b.name),
            |bch| bch.iter(|| pool.map_init(&batch, init, eval)),
        );
    }
    group.finish();
}

criterion_group!(benches, batch_eval);
criterion_main!(benches);
