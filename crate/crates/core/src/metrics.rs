//! Model quality metrics.
//!
//! Conformance metrics compare a log with a program through its automaton
//! (see [`crate::semantics`]); they are self-contained analogues of the usual
//! Petri-net based measures, comparable across miners evaluated here but not
//! numerically identical to third-party tooling. Synthesis metrics compare a
//! mined program with a known ground truth.
//!
//! * fitness: mean over traces of `1 - cost / max(|t|, shortest model trace)`,
//!   with `cost` the edit distance of the trace to the model language.
//! * precision: escaping-edges style. Each trace, after alignment repair, is
//!   replayed through the subset automaton. At every visited state set the
//!   activities observed next in the log (plus end-of-trace) are compared with
//!   those the model enables (plus end-of-trace if accepting); precision is
//!   the sum of observed counts over the sum of enabled counts, per visit.
//! * generalization: `1 - mean over leaves of 1/sqrt(uses)`, uses counted
//!   along the repaired replays, at least 1.
//! * simplicity: `1 / (1 + duplicate leaves + log activities missing)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::event_log::EventLog;
use crate::program::{simplify, Program, Token};
use crate::semantics::{Matcher, SemanticsError, StateSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot evaluate a model against an empty log")]
    EmptyLog,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub fitness: f64,
    pub precision: f64,
    pub f1: f64,
    pub generalization: f64,
    pub simplicity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SynthesisReport {
    pub exact_match: bool,
    pub edit_distance: usize,
}

/// One row of the fixed-width text tables.
fn table_row(f: &mut fmt::Formatter<'_>, name: &str, value: &dyn fmt::Display) -> fmt::Result {
    writeln!(f, "{name:<16}{value:>12}")
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        table_row(f, "metric", &"value")?;
        for (name, v) in [
            ("fitness", self.fitness),
            ("precision", self.precision),
            ("f1", self.f1),
            ("generalization", self.generalization),
            ("simplicity", self.simplicity),
        ] {
            table_row(f, name, &format!("{v:.6}"))?;
        }
        Ok(())
    }
}

impl fmt::Display for SynthesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        table_row(f, "metric", &"value")?;
        table_row(f, "exact_match", &self.exact_match)?;
        table_row(f, "edit_distance", &self.edit_distance)
    }
}

/// Harmonic mean of fitness and precision, 0 when both are 0.
pub fn f1(fitness: f64, precision: f64) -> f64 {
    if fitness + precision == 0.0 {
        0.0
    } else {
        2.0 * fitness * precision / (fitness + precision)
    }
}

/// Per-log replay results from which all conformance metrics derive.
struct Replay {
    fitness: f64,
    precision: f64,
    generalization: f64,
}

const END: u32 = u32::MAX;

fn replay(log: &EventLog, m: &Matcher) -> Result<Replay, MetricsError> {
    if log.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let mut fitness = 0.0;
    let mut uses = vec![0usize; m.leaves().len()];
    // state set -> (visits, observed next symbols)
    let mut visits: BTreeMap<StateSet, (usize, BTreeSet<u32>)> = BTreeMap::new();
    for (trace, count) in log.multiset() {
        let a = m.align(trace.events());
        let denom = trace.len().max(a.min_model_len);
        if denom > 0 {
            fitness += count as f64 * (1.0 - a.cost as f64 / denom as f64);
        } else {
            fitness += count as f64;
        }
        for &leaf in &a.leaves {
            uses[leaf as usize] += count;
        }
        let mut set = m.start_set();
        for act in &a.repaired {
            let s = m.symbol(act).expect("repaired traces use model activities");
            let entry = visits.entry(set.clone()).or_default();
            entry.0 += count;
            entry.1.insert(s);
            set = m.step(&set, s);
        }
        let entry = visits.entry(set).or_default();
        entry.0 += count;
        entry.1.insert(END);
    }

    let (mut observed, mut allowed) = (0usize, 0usize);
    for (set, (n, seen)) in &visits {
        let enabled = m.enabled(set).len() + usize::from(m.set_accepts(set));
        observed += n * seen.len();
        allowed += n * enabled;
    }
    let generalization = if uses.is_empty() {
        0.0
    } else {
        let penalty: f64 = uses.iter().map(|&u| 1.0 / (u.max(1) as f64).sqrt()).sum();
        1.0 - penalty / uses.len() as f64
    };
    Ok(Replay {
        fitness: fitness / log.len() as f64,
        precision: observed as f64 / allowed as f64,
        generalization,
    })
}

/// All conformance metrics of `p` on `log`, sharing one replay.
pub fn evaluate(log: &EventLog, p: &Program) -> Result<MetricsReport, MetricsError> {
    let m = Matcher::compile(p)?;
    let r = replay(log, &m)?;
    Ok(MetricsReport {
        fitness: r.fitness,
        precision: r.precision,
        f1: f1(r.fitness, r.precision),
        generalization: r.generalization,
        simplicity: simplicity(p, log),
    })
}

pub fn fitness(log: &EventLog, p: &Program) -> Result<f64, MetricsError> {
    Ok(replay(log, &Matcher::compile(p)?)?.fitness)
}

pub fn precision(log: &EventLog, p: &Program) -> Result<f64, MetricsError> {
    Ok(replay(log, &Matcher::compile(p)?)?.precision)
}

pub fn generalization(log: &EventLog, p: &Program) -> Result<f64, MetricsError> {
    Ok(replay(log, &Matcher::compile(p)?)?.generalization)
}

pub fn simplicity(p: &Program, log: &EventLog) -> f64 {
    let dup = p.duplicate_leaf_count();
    let present = p.activities();
    let miss = log.alphabet().iter().filter(|a| !present.contains(*a)).count();
    1.0 / (1 + dup + miss) as f64
}

fn normal_tokens(p: &Program) -> Vec<Token> {
    simplify(p).canonicalize().tokenize().0
}

/// Equality after simplification and branch sorting.
pub fn exact_match(p: &Program, truth: &Program) -> bool {
    simplify(p).canonicalize() == simplify(truth).canonicalize()
}

/// Token-level Levenshtein distance between the normal forms of two
/// programs. Normal forms are simplified as well as sorted, so that
/// [`exact_match`] implies distance 0.
pub fn edit_distance(p: &Program, truth: &Program) -> usize {
    levenshtein(&normal_tokens(p), &normal_tokens(truth))
}

pub fn synthesis(p: &Program, truth: &Program) -> SynthesisReport {
    SynthesisReport { exact_match: exact_match(p, truth), edit_distance: edit_distance(p, truth) }
}

fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let next = (row[j + 1] + 1).min(row[j] + 1).min(diag + usize::from(x != y));
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}
