//! Edit-distance alignment of a trace against a program's language.
//!
//! Shortest paths over the product of trace positions and automaton states:
//! synchronous moves cost 0, while inserting a model activity, deleting a
//! log event or substituting one for the other each cost 1. A deque-based
//! 0-1 BFS settles the states in cost order.

use std::collections::VecDeque;

use super::{Matcher, StateId, SymbolId};
use crate::event_log::Activity;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alignment {
    /// Minimum number of edits turning the trace into an accepted one.
    pub cost: usize,
    /// Length of the shortest accepted trace.
    pub min_model_len: usize,
    /// The accepted trace the edits produce.
    pub repaired: Vec<Activity>,
    /// Leaf ids executed along the repaired trace, one per activity.
    pub leaves: Vec<u32>,
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Back {
    from: u32,
    /// Leaf executed by the move, or `NONE` for a deletion.
    leaf: u32,
    symbol: SymbolId,
}

impl Matcher {
    pub fn align(&self, events: &[Activity]) -> Alignment {
        let trace: Vec<Option<SymbolId>> = events.iter().map(|a| self.symbol(a)).collect();
        let n = trace.len();
        let q = self.state_count();
        let node = |i: usize, s: StateId| (i * q + s as usize) as u32;
        let mut dist = vec![u32::MAX; (n + 1) * q];
        let mut back = vec![Back { from: NONE, leaf: NONE, symbol: 0 }; (n + 1) * q];
        let mut done = vec![false; (n + 1) * q];
        let mut deque = VecDeque::new();
        let start = node(0, self.initial());
        dist[start as usize] = 0;
        deque.push_back(start);

        let mut goal = None;
        while let Some(x) = deque.pop_front() {
            if done[x as usize] {
                continue;
            }
            done[x as usize] = true;
            let (i, s) = (x as usize / q, (x as usize % q) as StateId);
            if i == n && self.is_accepting_state(s) {
                goal = Some(x);
                break;
            }
            let d = dist[x as usize];
            let mut relax = |y: u32, cost: u32, b: Back, deque: &mut VecDeque<u32>| {
                if d + cost < dist[y as usize] {
                    dist[y as usize] = d + cost;
                    back[y as usize] = b;
                    if cost == 0 {
                        deque.push_front(y);
                    } else {
                        deque.push_back(y);
                    }
                }
            };
            for e in self.edges(s) {
                let b = Back { from: x, leaf: e.leaf, symbol: e.symbol };
                if i < n {
                    let cost = u32::from(trace[i] != Some(e.symbol));
                    relax(node(i + 1, e.target), cost, b, &mut deque);
                }
                relax(node(i, e.target), 1, b, &mut deque);
            }
            if i < n {
                relax(node(i + 1, s), 1, Back { from: x, leaf: NONE, symbol: 0 }, &mut deque);
            }
        }

        let goal = goal.expect("every program accepts some trace");
        let mut repaired = Vec::new();
        let mut leaves = Vec::new();
        let mut x = goal;
        while x != start {
            let b = back[x as usize];
            if b.leaf != NONE {
                repaired.push(self.activity(b.symbol).clone());
                leaves.push(b.leaf);
            }
            x = b.from;
        }
        repaired.reverse();
        leaves.reverse();
        Alignment { cost: dist[goal as usize] as usize, min_model_len: self.min_len(), repaired, leaves }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_expr;

    fn align(model: &str, trace: &str) -> Alignment {
        let m = Matcher::compile(&parse_expr(model).unwrap()).unwrap();
        let events: Vec<Activity> = trace.split_whitespace().map(|n| Activity::new(n).unwrap()).collect();
        m.align(&events)
    }

    fn names(a: &Alignment) -> String {
        a.repaired.iter().map(|a| a.name()).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn fitting_trace_costs_nothing() {
        let a = align("(a ((b|c) d)* (e&f))", "a b d f e");
        assert_eq!(a.cost, 0);
        assert_eq!(names(&a), "a b d f e");
        assert_eq!(a.min_model_len, 3);
        assert_eq!(a.leaves, vec![0, 1, 3, 5, 4]);
    }

    #[test]
    fn unit_cost_edits() {
        assert_eq!(align("(a b c)", "a c").cost, 1);
        assert_eq!(align("(a b c)", "a x c").cost, 1);
        assert_eq!(align("(a b c)", "a b b c").cost, 1);
        assert_eq!(align("(a b c)", "").cost, 3);
        assert_eq!(align("(a*)", "b b").cost, 2);
        let a = align("(a b c)", "a x c");
        assert_eq!(names(&a), "a b c");
    }
}
