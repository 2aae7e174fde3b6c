mod common;

use common::oracle;
use proptest::prelude::*;
use structmine::event_log::EventLog;
use structmine::metrics::{self, edit_distance, exact_match, f1};
use structmine::miner::flower_model;
use structmine::program::{parse_expr, simplify, Program};
use structmine::semantics::Matcher;

fn p(text: &str) -> Program {
    parse_expr(text).unwrap()
}

fn tokens(p: &Program) -> Vec<String> {
    simplify(p).canonicalize().tokenize().strings()
}

/// Reverses the branch order of every choice and parallel node.
fn mirror(p: &Program) -> Program {
    match p {
        Program::Leaf(_) => p.clone(),
        Program::Seq(v) => Program::Seq(v.iter().map(mirror).collect()),
        Program::Choice(v) => Program::Choice(v.iter().rev().map(mirror).collect()),
        Program::Par(v) => Program::Par(v.iter().rev().map(mirror).collect()),
        Program::Opt(b) => Program::opt(mirror(b)),
        Program::Plus(b) => Program::plus(mirror(b)),
        Program::Star(b) => Program::star(mirror(b)),
    }
}

#[test]
fn precision_of_flower_on_single_trace() {
    // visits: start allows {a, b}, sees {a}; after a allows {a, b, end}, sees {end}
    let v = metrics::precision(&EventLog::from_strs(&["a"]), &p("((a|b)+)")).unwrap();
    assert!((v - 2.0 / 5.0).abs() < 1e-12);
}

#[test]
fn edit_distance_examples() {
    assert_eq!(edit_distance(&p("(a b)"), &p("(a c)")), 1);
    assert_eq!(
        edit_distance(&p("(a b)"), &p("a")),
        oracle::levenshtein(&tokens(&p("(a b)")), &tokens(&p("a")))
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn edit_distance_matches_matrix_levenshtein(x in common::program(), y in common::program()) {
        prop_assert_eq!(edit_distance(&x, &y), oracle::levenshtein(&tokens(&x), &tokens(&y)));
    }

    #[test]
    fn edit_distance_triangle(x in common::program(), y in common::program(), z in common::program()) {
        prop_assert!(edit_distance(&x, &z) <= edit_distance(&x, &y) + edit_distance(&y, &z));
    }

    #[test]
    fn exact_match_laws(x in common::program(), y in common::program()) {
        prop_assert!(exact_match(&x, &x));
        prop_assert_eq!(exact_match(&x, &y), exact_match(&y, &x));
        prop_assert!(exact_match(&x, &mirror(&x)));
        prop_assert_eq!(exact_match(&mirror(&x), &y), exact_match(&x, &y));
        if exact_match(&x, &y) {
            prop_assert_eq!(edit_distance(&x, &y), 0);
        }
    }

    #[test]
    fn fitness_is_one_iff_all_traces_fit(model in common::program(), log in common::log(4, 5, 5)) {
        let m = Matcher::compile(&model).unwrap();
        let all_fit = log.traces().iter().all(|t| m.accepts(t));
        let f = metrics::fitness(&log, &model).unwrap();
        prop_assert_eq!(f == 1.0, all_fit);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn reports_stay_in_range(model in common::program(), log in common::log(5, 5, 6)) {
        let r = metrics::evaluate(&log, &model).unwrap();
        for v in [r.fitness, r.precision, r.f1, r.generalization, r.simplicity] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(r.precision > 0.0);
    }

    #[test]
    fn flower_fits_everything(log in common::log(6, 8, 10)) {
        let flower = flower_model(&log.alphabet(), log.has_empty_trace());
        if let Some(flower) = flower {
            prop_assert_eq!(metrics::fitness(&log, &flower).unwrap(), 1.0);
        }
    }

    #[test]
    fn f1_is_monotone_in_fitness(a in 0.0f64..=1.0, b in 0.0f64..=1.0, prec in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(f1(lo, prec) <= f1(hi, prec) + 1e-15);
    }
}
