//! Rule identifiers and local pattern matching on the directly-follows graph.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::dfg::{Dfg, NodeId};
use crate::event_log::{Activity, EventLog};
use crate::program::{simplify, Program};

/// The rewriting rules, in the order the discovery phases try them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    Iteration1,
    Sequence,
    Iteration2,
    Iteration3,
    Iteration4,
    Iteration5,
    Iteration6,
    Concurrence,
    Selection1,
    Selection2,
    FlowerFallback,
}

impl RuleId {
    pub const GRAPH_RULES: [RuleId; 10] = [
        RuleId::Iteration1,
        RuleId::Sequence,
        RuleId::Iteration2,
        RuleId::Iteration3,
        RuleId::Iteration4,
        RuleId::Iteration5,
        RuleId::Iteration6,
        RuleId::Concurrence,
        RuleId::Selection1,
        RuleId::Selection2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Iteration1 => "iteration1",
            RuleId::Sequence => "sequence",
            RuleId::Iteration2 => "iteration2",
            RuleId::Iteration3 => "iteration3",
            RuleId::Iteration4 => "iteration4",
            RuleId::Iteration5 => "iteration5",
            RuleId::Iteration6 => "iteration6",
            RuleId::Concurrence => "concurrence",
            RuleId::Selection1 => "selection1",
            RuleId::Selection2 => "selection2",
            RuleId::FlowerFallback => "flower_fallback",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleId> {
        RuleId::GRAPH_RULES
            .into_iter()
            .chain([RuleId::FlowerFallback])
            .find(|r| r.name() == name)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A located pattern, ready to be applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Match {
    /// Self-loop on `u`.
    Iteration1 { u: NodeId },
    /// Edge `p -> s` skipping over `u`.
    Selection2 { u: NodeId, p: NodeId, s: NodeId },
    /// Any rule that contracts `u` and `v` into one node.
    Contract { rule: RuleId, u: NodeId, v: NodeId },
}

impl Match {
    pub fn rule(&self) -> RuleId {
        match self {
            Match::Iteration1 { .. } => RuleId::Iteration1,
            Match::Selection2 { .. } => RuleId::Selection2,
            Match::Contract { rule, .. } => *rule,
        }
    }
}

/// Answers the trace-level question that separates concurrence from
/// alternation: in every trace touching either side, does each side occur
/// as exactly one contiguous block?
pub struct CoOccurrence {
    traces: Vec<Vec<Activity>>,
    cache: HashMap<(NodeId, NodeId), bool>,
}

impl CoOccurrence {
    pub fn new(log: &EventLog) -> Self {
        let distinct: BTreeSet<&[Activity]> = log.traces().iter().map(|t| t.events()).collect();
        CoOccurrence { traces: distinct.into_iter().map(<[Activity]>::to_vec).collect(), cache: HashMap::new() }
    }

    pub fn interleaves(&mut self, g: &Dfg, u: NodeId, v: NodeId) -> bool {
        let key = (u.min(v), u.max(v));
        if let Some(&hit) = self.cache.get(&key) {
            return hit;
        }
        let left = g.label(u).activities();
        let right = g.label(v).activities();
        let answer = self.check(&left, &right);
        self.cache.insert(key, answer);
        answer
    }

    fn check(&self, left: &BTreeSet<Activity>, right: &BTreeSet<Activity>) -> bool {
        let left: HashSet<&Activity> = left.iter().collect();
        let right: HashSet<&Activity> = right.iter().collect();
        self.traces.iter().all(|t| {
            let mut blocks = [0usize; 2];
            let mut last = None;
            for a in t {
                let side = if left.contains(a) {
                    0
                } else if right.contains(a) {
                    1
                } else {
                    continue;
                };
                if last != Some(side) {
                    blocks[side] += 1;
                    last = Some(side);
                }
            }
            blocks == [0, 0] || blocks == [1, 1]
        })
    }
}

/// Neighbourhood of a two-cycle `u <-> v`, with edges inside the pair removed.
struct Cycle {
    in_u: BTreeSet<NodeId>,
    out_u: BTreeSet<NodeId>,
    in_v: BTreeSet<NodeId>,
    out_v: BTreeSet<NodeId>,
}

impl Cycle {
    fn new(g: &Dfg, u: NodeId, v: NodeId) -> Self {
        let strip = |mut s: BTreeSet<NodeId>, x: NodeId| {
            s.remove(&x);
            s
        };
        Cycle {
            in_u: strip(g.in_set(u), v),
            out_u: strip(g.out_set(u), v),
            in_v: strip(g.in_set(v), u),
            out_v: strip(g.out_set(v), u),
        }
    }

    fn common_pred(&self) -> bool {
        !self.in_u.is_disjoint(&self.in_v)
    }

    fn common_succ(&self) -> bool {
        !self.out_u.is_disjoint(&self.out_v)
    }
}

fn plain(g: &Dfg, x: NodeId) -> bool {
    !g.is_sentinel(x) && !g.has_edge(x, x)
}

/// First match of `rule` scanning nodes in ascending id order.
pub fn match_rule(g: &Dfg, rule: RuleId, co: &mut CoOccurrence) -> Option<Match> {
    match rule {
        RuleId::Iteration1 => g.inner_nodes().find(|&u| g.has_edge(u, u)).map(|u| Match::Iteration1 { u }),
        RuleId::Sequence => find_sequence(g),
        RuleId::Selection1 => find_selection1(g),
        RuleId::Selection2 => find_selection2(g),
        RuleId::FlowerFallback => None,
        cycle => find_cycle(g, cycle, co),
    }
}

fn find_sequence(g: &Dfg) -> Option<Match> {
    for u in g.inner_nodes() {
        if !plain(g, u) || g.out_degree(u) != 1 {
            continue;
        }
        let v = g.successors(u).next()?;
        if plain(g, v) && g.in_degree(v) == 1 && !g.has_edge(v, u) {
            return Some(Match::Contract { rule: RuleId::Sequence, u, v });
        }
    }
    None
}

fn find_cycle(g: &Dfg, rule: RuleId, co: &mut CoOccurrence) -> Option<Match> {
    let symmetric = matches!(rule, RuleId::Iteration6 | RuleId::Concurrence);
    for u in g.inner_nodes() {
        if !plain(g, u) {
            continue;
        }
        for v in g.successors(u) {
            if v == u || !plain(g, v) || !g.has_edge(v, u) || (symmetric && v < u) {
                continue;
            }
            let c = Cycle::new(g, u, v);
            let hit = match rule {
                RuleId::Iteration2 => c.in_v.is_empty() && c.out_u.is_empty(),
                RuleId::Iteration3 => c.in_v.is_empty() && c.out_v.is_empty(),
                RuleId::Iteration4 => {
                    c.out_u.is_empty()
                        && c.common_pred()
                        && c.in_u.iter().all(|p| g.has_edge(*p, v))
                }
                RuleId::Iteration5 => {
                    c.in_v.is_empty()
                        && c.common_succ()
                        && c.out_v.iter().all(|s| g.has_edge(u, *s))
                }
                RuleId::Iteration6 => {
                    c.common_pred() && c.common_succ() && !co.interleaves(g, u, v)
                }
                RuleId::Concurrence => {
                    c.common_pred() && c.common_succ() && co.interleaves(g, u, v)
                }
                _ => unreachable!("not a cycle rule"),
            };
            if hit {
                return Some(Match::Contract { rule, u, v });
            }
        }
    }
    None
}

fn find_selection1(g: &Dfg) -> Option<Match> {
    for u in g.inner_nodes() {
        if !plain(g, u) {
            continue;
        }
        let in_u = g.in_set(u);
        let out_u = g.out_set(u);
        let (Some(&p), false) = (in_u.first(), out_u.is_empty()) else {
            continue;
        };
        // siblings must share every predecessor, so looking at one suffices
        for v in g.successors(p) {
            if v <= u || !plain(g, v) || g.has_edge(u, v) || g.has_edge(v, u) {
                continue;
            }
            if g.in_set(v) == in_u && g.out_set(v) == out_u {
                return Some(Match::Contract { rule: RuleId::Selection1, u, v });
            }
        }
    }
    None
}

fn find_selection2(g: &Dfg) -> Option<Match> {
    for u in g.inner_nodes() {
        if !plain(g, u) || g.in_degree(u) != 1 || g.out_degree(u) != 1 {
            continue;
        }
        let p = g.predecessors(u).next()?;
        let s = g.successors(u).next()?;
        if p != s && g.has_edge(p, s) {
            return Some(Match::Selection2 { u, p, s });
        }
    }
    None
}

/// The fragment a contraction rule builds from the labels of `u` and `v`.
pub fn contracted_label(rule: RuleId, u: &Program, v: &Program) -> Program {
    let (u, v) = (u.clone(), v.clone());
    let built = match rule {
        RuleId::Sequence => Program::seq(vec![u, v]),
        RuleId::Iteration2 => Program::plus(Program::seq(vec![u, v])),
        RuleId::Iteration3 if u.is_leaf() => {
            Program::seq(vec![Program::plus(Program::seq(vec![u.clone(), v])), u])
        }
        RuleId::Iteration3 | RuleId::Iteration5 => Program::plus(Program::seq(vec![u, Program::opt(v)])),
        RuleId::Iteration4 => Program::plus(Program::seq(vec![Program::opt(u), v])),
        RuleId::Iteration6 => Program::plus(Program::choice(vec![u, v])),
        RuleId::Concurrence => Program::par(vec![u, v]),
        RuleId::Selection1 => Program::choice(vec![u, v]),
        RuleId::Iteration1 | RuleId::Selection2 | RuleId::FlowerFallback => {
            unreachable!("{rule} does not contract")
        }
    };
    simplify(&built)
}
