mod common;

use common::oracle;
use proptest::prelude::*;
use structmine::event_log::{Activity, Trace};
use structmine::program::{parse_expr, Program};
use structmine::semantics::Matcher;

fn compile(text: &str) -> Matcher {
    Matcher::compile(&parse_expr(text).unwrap()).unwrap()
}

fn activities(word: &[String]) -> Vec<Activity> {
    word.iter().map(|n| Activity::new(n).unwrap()).collect()
}

fn trace(text: &str) -> Vec<Activity> {
    text.split_whitespace().map(|n| Activity::new(n).unwrap()).collect()
}

#[test]
fn running_example_language() {
    let m = compile("(a ((b|c) d)* (e&f))");
    assert!(m.accepts_activities(&trace("a b d c d e f")));
    let p = parse_expr("(a ((b|c) d)* (e&f))").unwrap();
    assert_eq!(common::words(&m.enumerate_language(9).unwrap()), oracle::language(&p, 9));
}

#[test]
fn alignment_examples() {
    assert_eq!(compile("(a b)").align(&trace("a b")).cost, 0);
    assert_eq!(compile("(a b)").align(&trace("a c b")).cost, 1);
    let a = compile("(a+)").align(&[]);
    assert_eq!((a.cost, a.min_model_len), (1, 1));
}

#[test]
fn languages_agree_with_brute_force_filtering() {
    // ((a|b)+) up to length 2, by filtering every string over {a, b}
    let m = compile("((a|b)+)");
    let mut brute = std::collections::BTreeSet::new();
    for len in 0..=2u32 {
        for bits in 0..(1u32 << len) {
            let w: Vec<String> = (0..len).map(|i| if bits >> i & 1 == 1 { "b" } else { "a" }.to_string()).collect();
            if m.accepts_activities(&activities(&w)) {
                brute.insert(w);
            }
        }
    }
    assert_eq!(common::words(&m.enumerate_language(2).unwrap()), brute);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn enumeration_matches_structural_oracle(p in common::program()) {
        let m = Matcher::compile(&p).unwrap();
        prop_assert_eq!(common::words(&m.enumerate_language(6).unwrap()), oracle::language(&p, 6));
    }

    #[test]
    fn accepts_matches_enumeration(p in common::program(), w in common::word()) {
        let m = Matcher::compile(&p).unwrap();
        let listed = m.enumerate_language(w.len()).unwrap().contains(&Trace::new(activities(&w)));
        prop_assert_eq!(m.accepts_activities(&activities(&w)), listed);
    }

    #[test]
    fn alignment_matches_exhaustive_search(p in common::program(), w in common::word()) {
        prop_assume!(2 * w.len() + oracle::min_len(&p) <= 8);
        let m = Matcher::compile(&p).unwrap();
        let a = m.align(&activities(&w));
        prop_assert_eq!(a.cost, oracle::align_cost(&p, &w));
        prop_assert_eq!(a.min_model_len, oracle::min_len(&p));
        prop_assert_eq!(a.cost == 0, m.accepts_activities(&activities(&w)));
        prop_assert!(a.cost <= w.len() + a.min_model_len);
        // the repair is accepted and really is `cost` edits away
        prop_assert!(m.accepts(&Trace::new(a.repaired.clone())));
        let repaired: Vec<String> = a.repaired.iter().map(|x| x.name().to_string()).collect();
        prop_assert_eq!(oracle::levenshtein(&w, &repaired), a.cost);
    }

    #[test]
    fn parallel_composition_commutes(x in common::program(), y in common::program()) {
        let xy = Matcher::compile(&Program::par(vec![x.clone(), y.clone()])).unwrap();
        let yx = Matcher::compile(&Program::par(vec![y, x])).unwrap();
        prop_assert_eq!(xy.enumerate_language(6).unwrap(), yx.enumerate_language(6).unwrap());
    }
}
