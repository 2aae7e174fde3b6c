#![allow(dead_code)]

pub mod oracle;

use proptest::prelude::*;
use structmine::event_log::{EventLog, Trace};
use structmine::program::Program;

/// Random programs over the activities `a`..`d` with at most four levels
/// of operators.
pub fn program() -> impl Strategy<Value = Program> {
    let leaf = prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(Program::leaf);
    leaf.prop_recursive(4, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Program::Seq),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Program::Choice),
            prop::collection::vec(inner.clone(), 2..=2).prop_map(Program::Par),
            inner.clone().prop_map(Program::opt),
            inner.clone().prop_map(Program::plus),
            inner.prop_map(Program::star),
        ]
    })
}

pub fn word() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(String::from), 0..=4)
}

/// Random logs: up to `traces` traces over `activities` letters, each at
/// most `len` long.
pub fn log(activities: usize, traces: usize, len: usize) -> impl Strategy<Value = EventLog> {
    let names: Vec<String> = (0..activities).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let trace = prop::collection::vec(prop::sample::select(names), 0..=len);
    prop::collection::vec(trace, 1..=traces).prop_map(|ts| {
        EventLog::new(ts.into_iter().map(|t| Trace::from_names(&t)).collect()).unwrap()
    })
}

pub fn words(traces: &std::collections::BTreeSet<Trace>) -> std::collections::BTreeSet<oracle::Word> {
    traces
        .iter()
        .map(|t| t.events().iter().map(|a| a.name().to_string()).collect())
        .collect()
}
