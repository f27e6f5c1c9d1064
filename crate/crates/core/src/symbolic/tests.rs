use proptest::prelude::*;

use super::*;
use crate::concrete::{concrete_cost, DEFAULT_STEP_BUDGET};
use crate::program::{parse_program, ProgramBuilder};

/// `if X > 0 { if X < 0 { return } }` with costs on each exit.
fn unsat_example() -> Program {
    parse_program(
        "program unsat_example\n\
         input X in [-10, 10]\n\
         0 branch (> X 0) -> 4,1\n\
         1 branch (< X 0) -> 3,2\n\
         2 add_cost 3 -> 5\n\
         3 add_cost 2 -> 5\n\
         4 add_cost 1 -> 5\n\
         5 halt ->\n",
    )
    .unwrap()
}

fn run(p: &Program, q: &str, mode: MappingMode) -> Result<PathOutcome, SymError> {
    let mut ctx = SolverContext::for_inputs(&p.inputs);
    execute(
        p,
        &q.parse().unwrap(),
        mode,
        &mut ctx,
        &ExecOptions::default(),
    )
}

#[test]
fn default_mapping_reports_infeasible_path() {
    let p = unsat_example();
    let o = run(&p, "11", MappingMode::Default).unwrap();
    assert!(!o.sat);
    assert_eq!(o.m, 2);
    assert_eq!(o.conditions.len(), 2);
    let o = run(&p, "10", MappingMode::Default).unwrap();
    assert!(o.sat);
    assert_eq!(o.cost, 2);
}

#[test]
fn skip_unsat_forces_the_inner_branch() {
    let p = unsat_example();
    let o = run(&p, "1", MappingMode::SkipUnsat).unwrap();
    assert!(o.sat);
    assert_eq!(o.m, 1);
    assert_eq!(o.cost, 2);
    let o = run(&p, "0", MappingMode::SkipUnsat).unwrap();
    assert_eq!((o.sat, o.m, o.cost), (true, 1, 1));
}

#[test]
fn branch_free_program() {
    let mut b = ProgramBuilder::new("flat");
    b.input_scalar("X", 0, 3);
    b.add_cost(7);
    let p = b.build();
    for mode in [MappingMode::Default, MappingMode::SkipUnsat] {
        let o = run(&p, "0110", mode).unwrap();
        assert_eq!((o.sat, o.cost, o.m, o.solver_calls), (true, 7, 0, 0));
    }
    let mut ctx = SolverContext::for_inputs(&p.inputs);
    assert_eq!(
        estimate_m(
            &p,
            5,
            2.0,
            1,
            MappingMode::SkipUnsat,
            &mut ctx,
            &ExecOptions::default()
        )
        .unwrap(),
        1
    );
    let w = solve_witness(&p, &run(&p, "", MappingMode::SkipUnsat).unwrap(), &mut ctx).unwrap();
    assert_eq!(w.scalars, vec![0]);
}

#[test]
fn path_too_short_and_unsupported_features() {
    let p = unsat_example();
    assert_eq!(
        run(&p, "", MappingMode::Default),
        Err(SymError::PathTooShort { used: 0 })
    );
    assert_eq!(
        run(&p, "1", MappingMode::Default),
        Err(SymError::PathTooShort { used: 1 })
    );

    let mut b = ProgramBuilder::new("idx");
    let x = b.input_scalar("X", 0, 2);
    let a = b.input_array("A", 3, 0, 9);
    b.add_cost(a.at(x));
    let p = b.build();
    assert!(matches!(
        run(&p, "", MappingMode::SkipUnsat),
        Err(SymError::UnsupportedFeature {
            what: "symbolic array index",
            ..
        })
    ));

    let mut b = ProgramBuilder::new("cost");
    let x = b.input_scalar("X", 0, 2);
    b.add_cost(x);
    let p = b.build();
    assert!(matches!(
        run(&p, "", MappingMode::SkipUnsat),
        Err(SymError::UnsupportedFeature {
            what: "symbolic cost",
            ..
        })
    ));
}

#[test]
fn witness_requires_sat() {
    let p = unsat_example();
    let o = run(&p, "11", MappingMode::Default).unwrap();
    let mut ctx = SolverContext::for_inputs(&p.inputs);
    assert!(matches!(
        solve_witness(&p, &o, &mut ctx),
        Err(SymError::IllegalState(_))
    ));
}

#[test]
fn annotated_branches_skip_the_solver() {
    let mut b = ProgramBuilder::new("ann");
    let a = b.input_array("A", 4, 0, 1);
    let i = b.local("i");
    b.for_range(i, 0, 4, |b| {
        b.if_(a.at(i).equals(1).always_sat(), |b| b.add_cost(1))
    });
    let p = b.build();
    let o = run(&p, "1011", MappingMode::SkipUnsat).unwrap();
    assert_eq!((o.cost, o.m, o.solver_calls), (3, 4, 0));
    let mut ctx = SolverContext::for_inputs(&p.inputs);
    let w = solve_witness(&p, &o, &mut ctx).unwrap();
    assert_eq!(w.arrays[0], vec![1, 0, 1, 1]);
    // without the marker every branch costs a solver call
    let o2 = run(&p.without_annotations(), "1011", MappingMode::SkipUnsat).unwrap();
    assert_eq!((o2.cost, o2.m), (3, 4));
    assert_eq!(o2.solver_calls, 4);
}

/// A small sorting-like program with data-dependent loops.
fn small_sort() -> Program {
    let mut b = ProgramBuilder::new("small_sort");
    let a = b.input_array("A", 4, 1, 4);
    let i = b.local("i");
    let j = b.local("j");
    let x = b.local("x");
    b.for_range(i, 1, 4, |b| {
        b.assign(x, a.at(i));
        b.assign(j, i - 1);
        b.while_(j.get().ge(0).and_also(a.at(j).gt(x)), |b| {
            b.store(a, j + 1, a.at(j));
            b.add_cost(1);
            b.assign(j, j - 1);
        });
        b.store(a, j + 1, x);
    });
    b.build()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seeding_is_sound(vals in proptest::collection::vec(1i64..=4, 4), skip in any::<bool>()) {
        let p = small_sort();
        let mode = if skip { MappingMode::SkipUnsat } else { MappingMode::Default };
        let input = ConcreteInput { scalars: vec![], arrays: vec![vals] };
        let trace = run_concrete(&p, &input, DEFAULT_STEP_BUDGET).unwrap();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let opts = ExecOptions::default();
        let q = extract_path_string(&p, &trace, mode, &mut ctx, &opts).unwrap();
        let m = q.len();
        let o = execute(&p, &q.normalized(m + 3), mode, &mut ctx, &opts).unwrap();
        prop_assert!(o.sat);
        prop_assert_eq!(o.cost, trace.total_cost);
        prop_assert_eq!(o.m, m);
        prop_assert_eq!(o.trace_len as usize, trace.stmts.len());
    }

    #[test]
    fn skip_unsat_is_always_sat_and_witnessed(bits in proptest::collection::vec(any::<bool>(), 12)) {
        let p = small_sort();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let o = execute(&p, &PathString(bits.clone()), MappingMode::SkipUnsat, &mut ctx, &ExecOptions::default()).unwrap();
        prop_assert!(o.sat);
        let w = solve_witness(&p, &o, &mut ctx).unwrap();
        prop_assert_eq!(concrete_cost(&p, &w, DEFAULT_STEP_BUDGET).unwrap(), o.cost);
        // bits past m are inert
        let mut flipped = bits;
        for b in flipped.iter_mut().skip(o.m) {
            *b = !*b;
        }
        let o2 = execute(&p, &PathString(flipped), MappingMode::SkipUnsat, &mut ctx, &ExecOptions::default()).unwrap();
        prop_assert_eq!(o.summary(), o2.summary());
        prop_assert_eq!(o.conditions, o2.conditions);
    }

    #[test]
    fn default_sat_implies_skip_unsat_sat(bits in proptest::collection::vec(any::<bool>(), 12)) {
        let p = small_sort();
        let mut ctx = SolverContext::for_inputs(&p.inputs);
        let q = PathString(bits);
        if let Ok(d) = execute(&p, &q, MappingMode::Default, &mut ctx, &ExecOptions::default()) {
            if d.sat {
                let s = execute(&p, &q, MappingMode::SkipUnsat, &mut ctx, &ExecOptions::default()).unwrap();
                prop_assert!(s.sat);
            }
        }
    }
}
