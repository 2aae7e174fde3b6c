//! Agglomerative discovery: condense the directly-follows graph of a log by
//! local rewriting until a single node, holding the program, is left.
//!
//! Rules run in five phases, each repeated until it no longer applies:
//!
//! 1. `iteration1` (self-loops)
//! 2. `sequence`
//! 3. `iteration2` .. `iteration6` and `concurrence` (two-node cycles)
//! 4. `selection1` (sibling nodes)
//! 5. `selection2` (skippable node)
//!
//! and the phases repeat until a full round changes nothing. Every rule
//! removes a node or an edge, so the number of applications is bounded by
//! the initial `|V| + |E|`. Whatever is left after convergence is folded
//! into a flower loop `((S1|...|Sk)+)`.

mod rules;

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

pub use rules::{contracted_label, match_rule, CoOccurrence, Match, RuleId};

use crate::dfg::{Dfg, DfgError, NodeId, BEGIN_ID, END_ID};
use crate::event_log::{expand_sentinels, Activity, EventLog};
use crate::program::{simplify, Program};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MineError {
    #[error("cannot discover a model from an empty log")]
    EmptyLog,
    #[error("log contains only empty traces")]
    NoActivities,
    #[error("internal invariant violated: {0}")]
    Internal(#[from] DfgError),
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: RuleId,
    /// Nodes matched by the rule.
    pub nodes: Vec<NodeId>,
    /// Node holding the result; `None` for the flower fallback.
    pub result: Option<NodeId>,
    pub label: String,
}

/// Record of a discovery run, for debugging and step replay.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MineTrace {
    pub initial_nodes: usize,
    pub initial_edges: usize,
    pub steps: Vec<Step>,
}

impl MineTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn fired(&self, rule: RuleId) -> bool {
        self.steps.iter().any(|s| s.rule == rule)
    }

    /// One JSON object per step, newline separated.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

const PHASES: [&[RuleId]; 5] = [
    &[RuleId::Iteration1],
    &[RuleId::Sequence],
    &[
        RuleId::Iteration2,
        RuleId::Iteration3,
        RuleId::Iteration4,
        RuleId::Iteration5,
        RuleId::Iteration6,
        RuleId::Concurrence,
    ],
    &[RuleId::Selection1],
    &[RuleId::Selection2],
];

/// Discovers a structured program from `log`.
///
/// Empty traces are handled outside the graph: the Begin->End edge is
/// dropped before rewriting and the result is made optional.
pub fn discover(log: &EventLog) -> Result<(Program, MineTrace), MineError> {
    if log.is_empty() {
        return Err(MineError::EmptyLog);
    }
    let mut g = Dfg::build(&expand_sentinels(log));
    if g.inner_nodes().next().is_none() {
        return Err(MineError::NoActivities);
    }
    let mut trace = MineTrace {
        initial_nodes: g.node_count(),
        initial_edges: g.edge_count(),
        steps: Vec::new(),
    };
    let optional = g.has_edge(BEGIN_ID, END_ID);
    if optional {
        g.delete_edge(BEGIN_ID, END_ID)?;
    }

    let mut co = CoOccurrence::new(log);
    condense(&mut g, &mut co, &mut trace)?;

    let remaining: Vec<NodeId> = g.inner_nodes().collect();
    let mut program = if remaining.len() == 1 {
        g.label(remaining[0]).clone()
    } else {
        let labels: Vec<Program> = remaining.iter().map(|&n| g.label(n).clone()).collect();
        let flower = flower_fallback(&labels);
        trace.steps.push(Step {
            rule: RuleId::FlowerFallback,
            nodes: remaining,
            result: None,
            label: flower.to_expr(),
        });
        flower
    };
    if optional {
        program = Program::opt(program);
    }
    Ok((simplify(&program), trace))
}

/// Runs the rewriting phases on `g` until none of them applies.
pub fn condense(g: &mut Dfg, co: &mut CoOccurrence, trace: &mut MineTrace) -> Result<(), MineError> {
    loop {
        let mut changed = false;
        for phase in PHASES {
            while let Some(m) = phase.iter().find_map(|&r| match_rule(g, r, co)) {
                trace.steps.push(apply(g, &m)?);
                changed = true;
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Rewrites `g` according to `m`.
pub fn apply(g: &mut Dfg, m: &Match) -> Result<Step, MineError> {
    let step = match *m {
        Match::Iteration1 { u } => {
            let label = simplify(&Program::plus(g.label(u).clone()));
            g.delete_edge(u, u)?;
            let expr = label.to_expr();
            g.relabel(u, label)?;
            Step { rule: RuleId::Iteration1, nodes: vec![u], result: Some(u), label: expr }
        }
        Match::Selection2 { u, p, s } => {
            let label = simplify(&Program::opt(g.label(u).clone()));
            g.delete_edge(p, s)?;
            let expr = label.to_expr();
            g.relabel(u, label)?;
            Step { rule: RuleId::Selection2, nodes: vec![u, p, s], result: Some(u), label: expr }
        }
        Match::Contract { rule, u, v } => {
            let label = contracted_label(rule, g.label(u), g.label(v));
            let expr = label.to_expr();
            let w = g.contract(u, v, label)?;
            Step { rule, nodes: vec![u, v], result: Some(w), label: expr }
        }
    };
    debug_assert!(g.sentinels_ok());
    Ok(step)
}

/// `((S1|...|Sk)+)` over the given fragments, branches in canonical order.
pub fn flower_fallback(labels: &[Program]) -> Program {
    let choice = Program::choice(labels.to_vec());
    simplify(&Program::plus(choice)).canonicalize()
}

/// The flower model over an alphabet, made optional when the log has empty
/// traces so that it accepts every trace of the log.
pub fn flower_model<'a, I>(alphabet: I, nullable: bool) -> Option<Program>
where
    I: IntoIterator<Item = &'a Activity>,
{
    let leaves: Vec<Program> = alphabet.into_iter().cloned().map(Program::Leaf).collect();
    if leaves.is_empty() {
        return None;
    }
    let flower = flower_fallback(&leaves);
    Some(if nullable { simplify(&Program::opt(flower)) } else { flower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_expr;

    fn mine(lines: &[&str]) -> String {
        discover(&EventLog::from_strs(lines)).unwrap().0.canonicalize().to_expr()
    }

    fn canon(text: &str) -> String {
        simplify(&parse_expr(text).unwrap()).canonicalize().to_expr()
    }

    #[test]
    fn small_logs() {
        assert_eq!(mine(&["a b"]), "(a b)");
        assert_eq!(mine(&["a a b", "a b"]), "((a+) b)");
        assert_eq!(mine(&["a c", "a b c"]), "(a (b?) c)");
        assert_eq!(mine(&["a b", "b a"]), "(a&b)");
        assert_eq!(mine(&["a"]), "a");
    }

    #[test]
    fn empty_traces_make_the_model_optional() {
        assert_eq!(mine(&["", "a"]), "(a?)");
        assert_eq!(mine(&["", "a", "a b"]), canon("((a (b?))?)"));
        assert_eq!(discover(&EventLog::from_strs(&["", ""])).unwrap_err(), MineError::NoActivities);
        assert_eq!(discover(&EventLog::from_strs(&[])).unwrap_err(), MineError::EmptyLog);
    }

    #[test]
    fn running_example() {
        let log = EventLog::from_strs(&[
            "a e f",
            "a f e",
            "a b d e f",
            "a c d f e",
            "a b d c d e f",
            "a c d b d f e",
        ]);
        let (p, trace) = discover(&log).unwrap();
        assert_eq!(p.canonicalize().to_expr(), canon("(a ((b|c) d)* (e&f))"));
        assert!(trace.fired(RuleId::Concurrence));
        assert!(trace.fired(RuleId::Iteration2));
        assert!(trace.fired(RuleId::Selection1));
        assert!(trace.fired(RuleId::Selection2));
    }

    #[test]
    fn flower_when_nothing_condenses() {
        // a <-> b with separate entries and exits, no common neighbours
        let log = EventLog::from_strs(&["x a b y", "z b a w"]);
        let (p, trace) = discover(&log).unwrap();
        assert!(trace.fired(RuleId::FlowerFallback));
        assert!(matches!(p, Program::Plus(_)));
    }

    #[test]
    fn flower_fallback_sorts_branches() {
        let labels = [Program::leaf("c"), parse_expr("(a b)").unwrap(), Program::leaf("b")];
        assert_eq!(flower_fallback(&labels).to_expr(), "(((a b)|b|c)+)");
        let abc: Vec<Program> = ["b", "c", "a"].iter().map(|n| Program::leaf(n)).collect();
        assert_eq!(flower_fallback(&abc).to_expr(), "((a|b|c)+)");
    }

    #[test]
    fn trace_steps_are_bounded() {
        let log = EventLog::from_strs(&["a b c a", "c b", "b b a c", "a"]);
        let (_, trace) = discover(&log).unwrap();
        assert!(trace.len() <= trace.initial_nodes + trace.initial_edges);
        let mut buf = Vec::new();
        trace.write_json_lines(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), trace.len());
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(RuleId::from_name(v["rule"].as_str().unwrap()).is_some());
        }
    }
}
