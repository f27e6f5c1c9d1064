use super::*;
use crate::concrete::{concrete_cost, run_concrete};
use crate::program::validate;
use crate::solver::SolverContext;
use crate::symbolic::{extract_path_string, ExecOptions, MappingMode};

fn scale(pairs: &[&str]) -> Scale {
    parse_scale(pairs.iter().copied()).unwrap()
}

/// Maximum concrete cost over every input in the domain.
fn brute_force_max(p: &Program) -> i64 {
    let domains = p.inputs.flat_domains();
    let mut flat: Vec<i64> = domains.iter().map(|d| d.lo).collect();
    let mut best = i64::MIN;
    loop {
        let input = ConcreteInput::from_flat(&p.inputs, &flat);
        best = best.max(concrete_cost(p, &input, 1_000_000).unwrap());
        let mut k = 0;
        loop {
            if k == flat.len() {
                return best;
            }
            if flat[k] < domains[k].hi {
                flat[k] += 1;
                break;
            }
            flat[k] = domains[k].lo;
            k += 1;
        }
    }
}

#[test]
fn registry_has_fifteen_entries() {
    let ids: Vec<&str> = registry().iter().map(|b| b.id).collect();
    assert_eq!(
        ids,
        [
            "1-1", "1-2", "1-3", "1-4", "1-5", "1-6", "1-7", "1-8", "2-1", "3-1", "3-2", "3-3",
            "3-4", "3-5", "3-6"
        ]
    );
    assert_eq!(lookup("quicksort").unwrap().id, "1-2");
    assert_eq!(lookup("IsPalindrome'").unwrap().id, "3-2");
    assert!(matches!(
        lookup("9-9"),
        Err(BenchError::UnknownBenchmark(_))
    ));
}

#[test]
fn scale_checks() {
    let qs = lookup("1-2").unwrap();
    assert!(matches!(
        qs.build(&scale(&["M=3"])),
        Err(BenchError::UnknownParam { .. })
    ));
    assert!(matches!(
        qs.build(&scale(&["N=0"])),
        Err(BenchError::Unsupported { .. })
    ));
    assert!(matches!(parse_scale(["N"]), Err(BenchError::BadScale(_))));
    assert!(matches!(parse_scale(["N=x"]), Err(BenchError::BadScale(_))));
    assert_eq!(qs.build(&scale(&["N=3"])).unwrap().scale_params["N"], 3);
}

#[test]
fn known_maxima_from_closed_forms() {
    let qs = lookup("1-2").unwrap();
    assert_eq!(qs.known_max(&scale(&["N=128"])).unwrap(), Some(8255));
    assert_eq!(qs.known_max(&scale(&["N=8"])).unwrap(), Some(35));
    assert_eq!(qs.known_max(&scale(&["N=16"])).unwrap(), Some(135));
    assert_eq!(
        lookup("3-1")
            .unwrap()
            .known_max(&scale(&["N=100"]))
            .unwrap(),
        Some(100)
    );
    assert_eq!(
        lookup("1-3")
            .unwrap()
            .known_max(&scale(&["N=128"]))
            .unwrap(),
        Some(649)
    );
    assert_eq!(
        lookup("2-1").unwrap().known_max(&scale(&["N=64"])).unwrap(),
        Some(4222)
    );
    assert_eq!(
        lookup("1-4").unwrap().known_max(&Scale::new()).unwrap(),
        Some(28)
    );
    assert_eq!(
        lookup("1-8").unwrap().known_max(&Scale::new()).unwrap(),
        Some(28)
    );
    assert_eq!(
        lookup("1-7").unwrap().known_max(&Scale::new()).unwrap(),
        None
    );
}

#[test]
fn default_programs_validate() {
    for b in registry() {
        let p = b.build_default();
        let report = validate(&p);
        assert!(report.is_ok(), "{}: {report}", b.id);
        assert!(p.statements.len() > 1, "{}", b.id);
    }
}

#[test]
fn witnesses_attain_known_maxima() {
    for b in registry() {
        for n in [2, 3, 5, 8, 10] {
            let over = scale(&[&format!("N={n}")]);
            let (Ok(Some(max)), Ok(Some(w))) = (b.known_max(&over), b.witness(&over)) else {
                continue;
            };
            let p = b.build(&over).unwrap();
            w.conforms(&p.inputs).unwrap();
            assert_eq!(
                concrete_cost(&p, &w, 1_000_000).unwrap(),
                max,
                "{} at N={n}",
                b.id
            );
        }
        if let (Some(max), Some(w)) = (
            b.known_max(&Scale::new()).unwrap(),
            b.witness(&Scale::new()).unwrap(),
        ) {
            assert_eq!(
                concrete_cost(&b.build_default(), &w, 1_000_000).unwrap(),
                max,
                "{}",
                b.id
            );
        }
    }
}

#[test]
fn brute_force_confirms_known_maxima() {
    let cases: &[(&str, &[&str])] = &[
        ("1-1", &["N=4"]),
        ("1-1", &["N=6"]),
        ("1-2", &["N=5"]),
        ("1-2", &["N=6"]),
        ("1-3", &["N=6"]),
        ("1-5", &["N=6"]),
        ("1-8", &["N=3", "P=3"]),
        ("1-8", &["N=4", "P=3"]),
        ("2-1", &["N=5"]),
        ("3-1", &["N=6", "K=3"]),
        ("3-2", &["N=7", "K=3"]),
        ("3-3", &["N=6", "V=2"]),
        ("3-4", &["N=4", "V=3"]),
        ("3-4", &["N=8", "V=1"]),
        ("3-5", &["N=4"]),
        ("3-6", &["N=4"]),
    ];
    for (id, s) in cases {
        let b = lookup(id).unwrap();
        let over = scale(s);
        let p = b.build(&over).unwrap();
        assert_eq!(
            Some(brute_force_max(&p)),
            b.known_max(&over).unwrap(),
            "{id} {s:?}"
        );
    }
}

#[test]
fn insertion_sort_cost_is_shift_count() {
    let p = lookup("1-1").unwrap().build(&scale(&["N=4"])).unwrap();
    let w = ConcreteInput {
        scalars: vec![],
        arrays: vec![vec![4, 3, 2, 1]],
    };
    assert_eq!(concrete_cost(&p, &w, 10_000).unwrap(), 6);
    let w = ConcreteInput {
        scalars: vec![],
        arrays: vec![vec![1, 3, 2, 4]],
    };
    assert_eq!(concrete_cost(&p, &w, 10_000).unwrap(), 1);
}

#[test]
fn quicksort_first_call_bits() {
    let p = lookup("1-2").unwrap().build(&scale(&["N=8"])).unwrap();
    let input = ConcreteInput {
        scalars: vec![],
        arrays: vec![vec![3, 1, 4, 5, 3, 2, 2, 3]],
    };
    let trace = run_concrete(&p, &input, 100_000).unwrap();
    let mut ctx = SolverContext::for_inputs(&p.inputs);
    let expect: crate::symbolic::PathString = "1 00 00 01 1 1 01".parse().unwrap();
    for mode in [MappingMode::Default, MappingMode::SkipUnsat] {
        let q = extract_path_string(&p, &trace, mode, &mut ctx, &ExecOptions::default()).unwrap();
        assert_eq!(&q.bits()[..11], expect.bits(), "{mode}");
    }
}

#[test]
fn quicksort_cost_is_sum_of_segment_lengths() {
    let p = lookup("1-2").unwrap().build(&scale(&["N=8"])).unwrap();
    let input = ConcreteInput {
        scalars: vec![],
        arrays: vec![vec![3, 1, 4, 5, 3, 2, 2, 3]],
    };
    // 8 for the whole array, then [1,2,2] 3, [2,2] 2, [4,5] 2
    assert_eq!(concrete_cost(&p, &input, 100_000).unwrap(), 15);
}

#[test]
fn max_bits_cover_witness_paths() {
    let mut ctx;
    for b in registry() {
        let p = b.build_default();
        let Some(w) = b.witness(&Scale::new()).unwrap() else {
            continue;
        };
        let trace = run_concrete(&p, &w, 1_000_000).unwrap();
        ctx = SolverContext::for_inputs(&p.inputs);
        let q = extract_path_string(
            &p,
            &trace,
            MappingMode::Default,
            &mut ctx,
            &ExecOptions::default(),
        )
        .unwrap();
        assert!(
            q.len() <= b.max_bits(&Scale::new()).unwrap(),
            "{}: {} bits",
            b.id,
            q.len()
        );
    }
}

#[test]
fn annotations_where_declared() {
    let annotated: Vec<&str> = registry()
        .iter()
        .filter(|b| b.annotated())
        .map(|b| b.id)
        .collect();
    assert_eq!(annotated, ["1-1", "1-2", "3-2", "3-3", "3-4"]);
}
