use proptest::prelude::*;

use super::*;

fn ctx(vars: &[(&str, i64, i64)]) -> SolverContext {
    SolverContext::new(
        vars.iter()
            .map(|(n, lo, hi)| (n.to_string(), Interval::new(*lo, *hi)))
            .collect(),
    )
}

fn x(v: VarId) -> LinExpr {
    LinExpr::var(v)
}

fn k(c: i64) -> LinExpr {
    LinExpr::constant(c)
}

#[test]
fn contradictory_bounds_are_unsat() {
    let mut c = ctx(&[("X", -10, 10)]);
    c.push(Formula::compare(CmpOp::Gt, &x(0), &k(0))).unwrap();
    c.push(Formula::compare(CmpOp::Lt, &x(0), &k(0))).unwrap();
    assert_eq!(c.check_sat().unwrap(), SatResult::Unsat);
    assert!(matches!(c.get_model(), Err(SolverError::IllegalState(_))));
}

#[test]
fn empty_conjunction_is_sat() {
    let mut c = ctx(&[("x", 3, 7)]);
    assert_eq!(c.check_sat().unwrap(), SatResult::Sat);
    assert_eq!(c.get_model().unwrap().0, vec![3]);
}

#[test]
fn single_feasible_point() {
    let mut c = ctx(&[("x", 1, 8)]);
    c.push(Formula::compare(CmpOp::Gt, &x(0), &k(7))).unwrap();
    assert_eq!(c.check_sat().unwrap(), SatResult::Sat);
    assert_eq!(c.get_model().unwrap().0, vec![8]);
}

#[test]
fn equality_model() {
    let mut c = ctx(&[("x", 0, 9)]);
    c.push(Formula::compare(CmpOp::Eq, &x(0), &k(4))).unwrap();
    c.check_sat().unwrap();
    assert_eq!(c.get_model().unwrap().get(0), 4);
}

#[test]
fn disequality_model_is_one_of_two() {
    let mut c = ctx(&[("x", 0, 1), ("y", 0, 1)]);
    c.push(Formula::compare(CmpOp::Ne, &x(0), &x(1))).unwrap();
    c.check_sat().unwrap();
    let m = c.get_model().unwrap().0;
    // oracle: the satisfying assignments among all four
    let sols: Vec<Vec<i64>> = (0..4)
        .map(|i| vec![i / 2, i % 2])
        .filter(|v| v[0] != v[1])
        .collect();
    assert!(sols.contains(&m), "{m:?}");
}

#[test]
fn push_pop_discipline() {
    let mut c = ctx(&[("x", 0, 5)]);
    let original = c.clone();
    c.push(Formula::compare(CmpOp::Gt, &x(0), &k(0))).unwrap();
    c.pop().unwrap();
    assert_eq!(c, original);
    c.push(Formula::compare(CmpOp::Gt, &x(0), &k(0))).unwrap();
    c.push(Formula::compare(CmpOp::Lt, &x(0), &k(3))).unwrap();
    c.pop().unwrap();
    assert_eq!(c.depth(), 1);
    assert_eq!(c.stats().sat_calls, 0);
    c.pop().unwrap();
    assert_eq!(c.pop(), Err(SolverError::StackUnderflow));
}

#[test]
fn maximize_examples() {
    let mut c = ctx(&[("n", 0, 50)]);
    assert_eq!(c.maximize(&x(0)).unwrap().0, 50);

    let mut c = ctx(&[("x", 0, 9)]);
    c.push(Formula::compare(CmpOp::Lt, &x(0), &k(5))).unwrap();
    assert_eq!(c.maximize(&x(0)).unwrap().0, 4);

    let mut c = ctx(&[("x", 0, 3), ("y", 0, 3)]);
    let sum = x(0).add(&x(1));
    c.push(Formula::compare(CmpOp::Le, &sum, &k(4))).unwrap();
    let (v, m) = c.maximize(&sum).unwrap();
    let oracle = (0..16)
        .map(|i| (i / 4, i % 4))
        .filter(|(a, b)| a + b <= 4)
        .map(|(a, b)| a + b)
        .max();
    assert_eq!(Some(v), oracle);
    assert_eq!(m.get(0) + m.get(1), v);

    let mut c = ctx(&[("x", 0, 3)]);
    c.push(Formula::False).unwrap();
    assert!(matches!(
        c.maximize(&x(0)),
        Err(SolverError::IllegalState(_))
    ));
}

#[test]
fn modular_constraints() {
    // x mod 13 = 5 with x in [0, 103]: least solution 5
    let mut c = ctx(&[("x", 0, 103), ("y", 0, 103)]);
    c.push(Formula::compare(CmpOp::Eq, &x(0).modulo(13), &k(5)))
        .unwrap();
    c.push(Formula::compare(CmpOp::Eq, &x(1).modulo(13), &k(5)))
        .unwrap();
    c.push(Formula::compare(CmpOp::Ne, &x(0), &x(1))).unwrap();
    c.push(Formula::compare(CmpOp::Gt, &x(0), &k(20))).unwrap();
    assert_eq!(c.check_sat().unwrap(), SatResult::Sat);
    let m = c.get_model().unwrap();
    assert_eq!(m.0, vec![31, 5]);
    let (best, _) = c.maximize(&x(0).add(&x(1))).unwrap();
    assert_eq!(best, 96 + 83);
}

#[test]
fn normalization_folds_constants_and_gcd() {
    assert_eq!(Formula::compare(CmpOp::Lt, &k(1), &k(2)), Formula::True);
    assert_eq!(
        Formula::compare(CmpOp::Eq, &x(0).scale(2), &k(3)),
        Formula::False
    );
    // 2x <= 3 becomes x <= 1
    let f = Formula::compare(CmpOp::Le, &x(0).scale(2), &k(3));
    assert_eq!(
        f,
        Formula::Atom(Constraint {
            expr: x(0).add_constant(-1),
            rel: Rel::Le
        })
    );
    // x - x folds away
    assert_eq!(Formula::compare(CmpOp::Ne, &x(0), &x(0)), Formula::False);
}

#[test]
fn negation_is_complement() {
    let f = Formula::and(
        Formula::compare(CmpOp::Lt, &x(0), &x(1)),
        Formula::compare(CmpOp::Ne, &x(1), &k(2)),
    );
    let g = f.negate();
    for a in -3..=3 {
        for b in -3..=3 {
            assert_ne!(f.eval(&[a, b]), g.eval(&[a, b]));
        }
    }
}

#[test]
fn check_extension_keeps_unrelated_values() {
    let mut c = ctx(&[("a", 0, 9), ("b", 0, 9), ("z", 0, 9)]);
    c.push(Formula::compare(CmpOp::Lt, &x(0), &x(1))).unwrap();
    c.push(Formula::compare(CmpOp::Gt, &x(2), &k(4))).unwrap();
    let base = Model(vec![0, 1, 7]);
    let m = c
        .check_extension(&base, &Formula::compare(CmpOp::Gt, &x(0), &k(3)))
        .unwrap()
        .unwrap();
    assert_eq!(m.0, vec![4, 5, 7]);
    assert!(c
        .check_extension(&base, &Formula::compare(CmpOp::Gt, &x(0), &k(8)))
        .unwrap()
        .is_none());
    assert_eq!(c.stats().sat_calls, 2);
    assert_eq!(c.stats().unsat_results, 1);
}

#[test]
fn budget_is_enforced() {
    let n = 12;
    let vars: Vec<(String, Interval)> = (0..n)
        .map(|i| (format!("v{i}"), Interval::new(0, 10)))
        .collect();
    let mut c = SolverContext::new(vars).with_budget(50);
    for i in 0..n {
        for j in i + 1..n {
            c.push(Formula::compare(CmpOp::Ne, &x(i), &x(j))).unwrap();
        }
    }
    // 12 pairwise distinct values in an 11-value domain: needs real search
    assert_eq!(c.check_sat(), Err(SolverError::BudgetExceeded(50)));
    assert_eq!(c.stats().budget_exceeded, 1);
}

#[test]
fn smtlib_export_is_stable() {
    let mut c = ctx(&[("x", 0, 1)]);
    let empty = c.export_smtlib();
    assert_eq!(
        empty,
        "(set-logic QF_LIA)\n(declare-const x Int)\n(assert (and (<= 0 x) (<= x 1)))\n(check-sat)\n"
    );
    c.push(Formula::compare(CmpOp::Gt, &x(0), &k(0))).unwrap();
    c.push(Formula::compare(CmpOp::Lt, &x(0).modulo(3), &k(-1)))
        .unwrap();
    assert_eq!(c.export_smtlib(), c.export_smtlib());
    let mut named = SolverContext::new(vec![("A[0]".into(), Interval::new(-2, 2))]);
    named
        .push(Formula::compare(CmpOp::Ge, &x(0).scale(2), &k(-1)))
        .unwrap();
    let text = named.export_smtlib();
    assert!(text.contains("(declare-const |A[0]| Int)"));
    assert!(text.contains("(<= (- 2) |A[0]|)"));
}

/// Random formulas over up to three variables, for oracle comparison.
fn arb_formula(nvars: usize) -> impl Strategy<Value = Formula> {
    let atom = (
        proptest::collection::vec(-3i64..=3, nvars),
        -10i64..=10,
        0usize..6,
        proptest::option::weighted(0.2, 2i64..=5),
    )
        .prop_map(move |(coefs, c, op, m)| {
            let mut e = k(0);
            for (v, a) in coefs.iter().enumerate() {
                e = e.add(&x(v).scale(*a));
            }
            if let Some(m) = m {
                e = e.modulo(m);
            }
            let op = [
                CmpOp::Lt,
                CmpOp::Le,
                CmpOp::Eq,
                CmpOp::Ne,
                CmpOp::Gt,
                CmpOp::Ge,
            ][op];
            Formula::compare(op, &e, &k(c))
        });
    atom.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.prop_map(|a| a.negate()),
        ]
    })
}

fn instance() -> impl Strategy<Value = (Vec<Interval>, Vec<Formula>)> {
    (1usize..=3).prop_flat_map(|n| {
        (
            proptest::collection::vec(
                (-8i64..=8, 0i64..16).prop_map(|(lo, w)| Interval::new(lo, lo + w)),
                n,
            ),
            proptest::collection::vec(arb_formula(n), 0..5),
        )
    })
}

fn enumerate(domains: &[Interval], fs: &[Formula]) -> Option<Vec<i64>> {
    let mut cur: Vec<i64> = domains.iter().map(|d| d.lo).collect();
    loop {
        if fs.iter().all(|f| f.eval(&cur)) {
            return Some(cur);
        }
        let mut i = 0;
        loop {
            if i == cur.len() {
                return None;
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn agrees_with_enumeration((domains, fs) in instance()) {
        let mut c = SolverContext::new(domains.iter().enumerate().map(|(i, d)| (format!("v{i}"), *d)).collect());
        for f in &fs {
            c.push(f.clone()).unwrap();
        }
        let oracle = enumerate(&domains, &fs);
        let got = c.check_sat().unwrap();
        prop_assert_eq!(got == SatResult::Sat, oracle.is_some());
        if got == SatResult::Sat {
            let m = c.get_model().unwrap();
            for (v, d) in m.values().iter().zip(&domains) {
                prop_assert!(d.contains(*v));
            }
            prop_assert!(fs.iter().all(|f| f.eval(m.values())));
        }
    }

    #[test]
    fn maximize_is_tight((domains, fs) in instance(), coefs in proptest::collection::vec(-2i64..=2, 3)) {
        let mut c = SolverContext::new(domains.iter().enumerate().map(|(i, d)| (format!("v{i}"), *d)).collect());
        for f in &fs {
            c.push(f.clone()).unwrap();
        }
        let mut obj = k(0);
        for (v, a) in coefs.iter().take(domains.len()).enumerate() {
            obj = obj.add(&x(v).scale(*a));
        }
        if enumerate(&domains, &fs).is_some() {
            let (v, m) = c.maximize(&obj).unwrap();
            prop_assert_eq!(obj.eval(m.values()), v as i128);
            let above = Constraint::normalized(k(v + 1).sub(&obj), Rel::Le);
            let mut with = fs.clone();
            with.push(above);
            prop_assert!(enumerate(&domains, &with).is_none());
        }
    }
}

/// Linear atoms over up to six variables: sums that the relaxation sees.
fn linear_instance() -> impl Strategy<Value = (Vec<Interval>, Vec<Formula>, Formula)> {
    (2usize..=6).prop_flat_map(|n| {
        let atom = (
            proptest::collection::vec(-2i64..=2, n),
            -6i64..=6,
            0usize..4,
        )
            .prop_map(move |(coefs, c, op)| {
                let mut e = k(0);
                for (v, a) in coefs.iter().enumerate() {
                    e = e.add(&x(v).scale(*a));
                }
                let op = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne][op];
                Formula::compare(op, &e, &k(c))
            });
        (
            proptest::collection::vec(
                (-2i64..=2, 0i64..4).prop_map(|(lo, w)| Interval::new(lo, lo + w)),
                n,
            ),
            proptest::collection::vec(atom.clone(), 1..7),
            atom,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn extension_agrees_with_enumeration((domains, fs, extra) in linear_instance()) {
        let mut c = SolverContext::new(domains.iter().enumerate().map(|(i, d)| (format!("v{i}"), *d)).collect());
        for f in &fs {
            c.push(f.clone()).unwrap();
        }
        let Some(base) = enumerate(&domains, &fs) else { return Ok(()) };
        let mut with = fs.clone();
        with.push(extra.clone());
        let oracle = enumerate(&domains, &with);
        let got = c.check_extension(&Model(base), &extra).unwrap();
        prop_assert_eq!(got.is_some(), oracle.is_some());
        if let Some(m) = got {
            prop_assert!(with.iter().all(|f| f.eval(m.values())));
        }
        let mut all = c.clone();
        all.push(extra).unwrap();
        prop_assert_eq!(all.check_sat().unwrap() == SatResult::Sat, oracle.is_some());
    }
}
