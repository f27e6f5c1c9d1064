//! Small-scale cross-checks between independent engines.

use wca_core::baselines::symexe::search;
use wca_core::baselines::{enumerate_paths, SymExeParams};
use wca_core::bench::{lookup, parse_scale, registry, Benchmark, Scale};
use wca_core::budget::Budget;
use wca_core::concrete::concrete_cost;
use wca_core::program::parse_program;
use wca_core::solver::SolverContext;
use wca_core::symbolic::ExecOptions;

fn scale_at(b: &Benchmark, n: i64) -> Scale {
    let mut s = parse_scale([format!("N={n}").as_str()]).unwrap();
    for (k, v) in [("K", 2), ("V", 2), ("P", 3)] {
        if b.params.iter().any(|p| p.name == k) {
            s.insert(k.to_string(), v);
        }
    }
    s
}

fn unlimited() -> Budget {
    Budget {
        seconds: None,
        max_iters: None,
        target_cost: None,
    }
}

#[test]
fn best_first_search_matches_enumeration_on_small_instances() {
    let opts = ExecOptions::default();
    for b in registry() {
        for n in 2..=4 {
            let p = b.build(&scale_at(b, n)).unwrap();
            let mut ctx = SolverContext::for_inputs(&p.inputs);
            let e = enumerate_paths(&p, &mut ctx, &opts, 4097).unwrap();
            assert!(e.complete, "{} N={n}", b.id);
            let s = search(&p, &SymExeParams::default(), &unlimited(), &opts).unwrap();
            assert_eq!(s.best_cost, e.max_cost, "{} N={n}", b.id);
            assert_eq!(s.completed_paths as usize, e.paths, "{} N={n}", b.id);
            let input = e.best_input.unwrap();
            assert_eq!(
                Some(concrete_cost(&p, &input, 1_000_000).unwrap()),
                e.max_cost
            );
        }
    }
}

#[test]
fn annotated_branches_are_open_on_both_sides() {
    let opts = ExecOptions::default();
    let cases: &[(&str, &[&str])] = &[
        ("1-1", &["N=5"]),
        ("1-2", &["N=5"]),
        ("3-2", &["N=8", "K=3"]),
        ("3-3", &["N=6", "V=3"]),
        ("3-4", &["N=6", "V=3"]),
    ];
    for (id, s) in cases {
        let b = lookup(id).unwrap();
        assert!(b.annotated());
        let p = b.build(&parse_scale(s.iter().copied()).unwrap()).unwrap();
        assert!(p.statements.iter().any(|st| st.always_sat), "{id}");
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let e = enumerate_paths(&p, &mut ctx, &opts, 100_000).unwrap();
        assert!(e.complete, "{id}");
        assert!(e.violations.is_empty(), "{id}: {:?}", e.violations);
    }
}

#[test]
fn path_enumeration_confirms_graph_maxima() {
    let opts = ExecOptions::default();
    for (id, ns) in [
        ("1-4", 2..=5),
        ("1-6", 2..=4),
        ("3-5", 2..=6),
        ("3-6", 2..=6),
    ] {
        let b = lookup(id).unwrap();
        for n in ns {
            let s = scale_at(b, n);
            let p = b.build(&s).unwrap();
            let mut ctx = SolverContext::for_inputs(&p.inputs);
            let e = enumerate_paths(&p, &mut ctx, &opts, 100_000).unwrap();
            assert!(e.complete);
            assert_eq!(e.max_cost, b.known_max(&s).unwrap(), "{id} N={n}");
        }
    }
}

#[test]
fn benchmarks_survive_the_text_format() {
    for b in registry() {
        let p = b.build_default();
        let back = parse_program(&p.to_text()).unwrap();
        assert_eq!(back, p, "{}", b.id);
    }
}
