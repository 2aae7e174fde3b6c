//! Finite-automaton semantics for structured programs.
//!
//! [`Matcher::compile`] performs a Thompson-style construction: sequences
//! concatenate, `?` adds a skip, `|` unions, `+` loops back, `*` loops with
//! a skip, and `&` takes the shuffle product of its (epsilon-free) parts.
//! Epsilon moves are removed and useless states trimmed before the
//! automaton is handed out. Every transition remembers which leaf of the
//! program produced it, so replays can attribute steps to leaves.

mod align;

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

pub use align::Alignment;

use crate::event_log::{Activity, Trace};
use crate::program::Program;

pub type StateId = u32;
pub type SymbolId = u32;

/// Upper bound on the states of a single shuffle product.
pub const MAX_PRODUCT_STATES: usize = 1_000_000;
/// Longest trace [`Matcher::enumerate_language`] will enumerate up to.
pub const MAX_ENUMERATION_LEN: usize = 16;
/// Most traces [`Matcher::enumerate_language`] will return.
pub const MAX_ENUMERATED_TRACES: usize = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("parallel composition needs more than {limit} automaton states; serialize some branches")]
    ProductTooLarge { limit: usize },
    #[error("enumeration length {requested} exceeds the limit of {limit}")]
    LengthTooLarge { requested: usize, limit: usize },
    #[error("language has more than {limit} traces up to the requested length")]
    TooManyTraces { limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub symbol: SymbolId,
    pub target: StateId,
    /// Preorder index of the program leaf this move executes.
    pub leaf: u32,
}

/// An epsilon-free NFA accepting exactly the traces of a program.
#[derive(Clone, Debug)]
pub struct Matcher {
    symbols: Vec<Activity>,
    index: HashMap<Activity, SymbolId>,
    leaves: Vec<Activity>,
    edges: Vec<Vec<Edge>>,
    accepting: Vec<bool>,
    initial: StateId,
    /// Fewest moves from each state to an accepting one.
    to_accept: Vec<u32>,
}

#[derive(Default)]
struct Symbols {
    list: Vec<Activity>,
    index: HashMap<Activity, SymbolId>,
    leaves: Vec<Activity>,
}

impl Symbols {
    fn intern(&mut self, a: &Activity) -> SymbolId {
        if let Some(&s) = self.index.get(a) {
            return s;
        }
        let s = self.list.len() as SymbolId;
        self.list.push(a.clone());
        self.index.insert(a.clone(), s);
        s
    }
}

/// Epsilon-free automaton under construction.
struct Nfa {
    edges: Vec<Vec<Edge>>,
    accepting: Vec<bool>,
    initial: usize,
}

#[derive(Default)]
struct EpsNfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<Edge>>,
}

impl EpsNfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    fn link(&mut self, from: usize, to: usize) {
        self.eps[from].push(to);
    }

    /// Adds a fragment for `p`, returning its entry and exit states.
    fn build(&mut self, p: &Program, syms: &mut Symbols) -> Result<(usize, usize), SemanticsError> {
        Ok(match p {
            Program::Leaf(a) => {
                let (s, t) = (self.state(), self.state());
                let symbol = syms.intern(a);
                let leaf = syms.leaves.len() as u32;
                syms.leaves.push(a.clone());
                self.edges[s].push(Edge { symbol, target: t as StateId, leaf });
                (s, t)
            }
            Program::Seq(parts) => {
                let (start, mut end) = self.build(&parts[0], syms)?;
                for part in &parts[1..] {
                    let (s, t) = self.build(part, syms)?;
                    self.link(end, s);
                    end = t;
                }
                (start, end)
            }
            Program::Choice(branches) => {
                let (s, t) = (self.state(), self.state());
                for b in branches {
                    let (bs, bt) = self.build(b, syms)?;
                    self.link(s, bs);
                    self.link(bt, t);
                }
                (s, t)
            }
            Program::Opt(body) | Program::Plus(body) | Program::Star(body) => {
                let (s, t) = (self.state(), self.state());
                let (bs, bt) = self.build(body, syms)?;
                self.link(s, bs);
                self.link(bt, t);
                if !matches!(p, Program::Plus(_)) {
                    self.link(s, t);
                }
                if !matches!(p, Program::Opt(_)) {
                    self.link(bt, bs);
                }
                (s, t)
            }
            Program::Par(parts) => {
                let mut nfas = Vec::with_capacity(parts.len());
                for part in parts {
                    nfas.push(compile_nfa(part, syms)?);
                }
                self.embed(shuffle(&nfas)?)
            }
        })
    }

    fn embed(&mut self, nfa: Nfa) -> (usize, usize) {
        let base = self.eps.len();
        for _ in 0..nfa.edges.len() {
            self.state();
        }
        let t = self.state();
        for (q, out) in nfa.edges.into_iter().enumerate() {
            self.edges[base + q] =
                out.into_iter().map(|e| Edge { target: e.target + base as StateId, ..e }).collect();
            if nfa.accepting[q] {
                self.link(base + q, t);
            }
        }
        (base + nfa.initial, t)
    }

    /// Removes epsilon moves and keeps only states on some accepting path.
    fn finish(self, start: usize, end: usize) -> Nfa {
        let n = self.eps.len();
        let mut edges = vec![Vec::new(); n];
        let mut accepting = vec![false; n];
        let mut seen = vec![usize::MAX; n];
        let mut stack = Vec::new();
        for q in 0..n {
            stack.push(q);
            seen[q] = q;
            while let Some(x) = stack.pop() {
                if x == end {
                    accepting[q] = true;
                }
                edges[q].extend_from_slice(&self.edges[x]);
                for &y in &self.eps[x] {
                    if seen[y] != q {
                        seen[y] = q;
                        stack.push(y);
                    }
                }
            }
        }
        trim(Nfa { edges, accepting, initial: start })
    }
}

/// Drops states unreachable from the start or unable to reach acceptance,
/// renumbering the rest in discovery order.
fn trim(nfa: Nfa) -> Nfa {
    let n = nfa.edges.len();
    let mut reverse = vec![Vec::new(); n];
    for (q, out) in nfa.edges.iter().enumerate() {
        for e in out {
            reverse[e.target as usize].push(q);
        }
    }
    let mut live = nfa.accepting.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&q| live[q]).collect();
    while let Some(q) = queue.pop_front() {
        for &p in &reverse[q] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }
    let mut map = vec![u32::MAX; n];
    let mut order = vec![nfa.initial];
    map[nfa.initial] = 0;
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        i += 1;
        for e in &nfa.edges[q] {
            let t = e.target as usize;
            if live[t] && map[t] == u32::MAX {
                map[t] = order.len() as u32;
                order.push(t);
            }
        }
    }
    let edges = order
        .iter()
        .map(|&q| {
            let mut out: Vec<Edge> = nfa.edges[q]
                .iter()
                .filter(|e| map[e.target as usize] != u32::MAX)
                .map(|e| Edge { target: map[e.target as usize], ..*e })
                .collect();
            out.sort();
            out.dedup();
            out
        })
        .collect();
    let accepting = order.iter().map(|&q| nfa.accepting[q]).collect();
    Nfa { edges, accepting, initial: 0 }
}

fn compile_nfa(p: &Program, syms: &mut Symbols) -> Result<Nfa, SemanticsError> {
    let mut e = EpsNfa::default();
    let (s, t) = e.build(p, syms)?;
    Ok(e.finish(s, t))
}

/// Shuffle product: each move advances exactly one component.
fn shuffle(parts: &[Nfa]) -> Result<Nfa, SemanticsError> {
    let start: Vec<usize> = parts.iter().map(|p| p.initial).collect();
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut edges: Vec<Vec<Edge>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let tuple = states[i].clone();
        let mut out = Vec::new();
        for (k, part) in parts.iter().enumerate() {
            for e in &part.edges[tuple[k]] {
                let mut next = tuple.clone();
                next[k] = e.target as usize;
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= MAX_PRODUCT_STATES {
                            return Err(SemanticsError::ProductTooLarge { limit: MAX_PRODUCT_STATES });
                        }
                        ids.insert(next.clone(), states.len());
                        states.push(next);
                        states.len() - 1
                    }
                };
                out.push(Edge { target: id as StateId, ..*e });
            }
        }
        edges.push(out);
        i += 1;
    }
    let accepting = states
        .iter()
        .map(|t| t.iter().zip(parts).all(|(&q, p)| p.accepting[q]))
        .collect();
    Ok(trim(Nfa { edges, accepting, initial: 0 }))
}

/// A set of automaton states, kept sorted.
pub type StateSet = Vec<StateId>;

impl Matcher {
    pub fn compile(p: &Program) -> Result<Matcher, SemanticsError> {
        let mut syms = Symbols::default();
        let nfa = compile_nfa(p, &mut syms)?;
        let n = nfa.edges.len();
        let mut reverse = vec![Vec::new(); n];
        for (q, out) in nfa.edges.iter().enumerate() {
            for e in out {
                reverse[e.target as usize].push(q);
            }
        }
        let mut to_accept: Vec<u32> = nfa.accepting.iter().map(|&a| if a { 0 } else { u32::MAX }).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| nfa.accepting[q]).collect();
        while let Some(q) = queue.pop_front() {
            for &p in &reverse[q] {
                if to_accept[p] == u32::MAX {
                    to_accept[p] = to_accept[q] + 1;
                    queue.push_back(p);
                }
            }
        }
        Ok(Matcher {
            symbols: syms.list,
            index: syms.index,
            leaves: syms.leaves,
            edges: nfa.edges,
            accepting: nfa.accepting,
            initial: nfa.initial as StateId,
            to_accept,
        })
    }

    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting_state(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn edges(&self, q: StateId) -> &[Edge] {
        &self.edges[q as usize]
    }

    pub fn symbol(&self, a: &Activity) -> Option<SymbolId> {
        self.index.get(a).copied()
    }

    pub fn activity(&self, s: SymbolId) -> &Activity {
        &self.symbols[s as usize]
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    /// Activities of the program leaves, indexed by leaf id.
    pub fn leaves(&self) -> &[Activity] {
        &self.leaves
    }

    /// Length of the shortest accepted trace.
    pub fn min_len(&self) -> usize {
        self.to_accept[self.initial as usize] as usize
    }

    pub fn start_set(&self) -> StateSet {
        vec![self.initial]
    }

    pub fn step(&self, set: &[StateId], symbol: SymbolId) -> StateSet {
        let mut next: Vec<StateId> = set
            .iter()
            .flat_map(|&q| self.edges(q).iter().filter(|e| e.symbol == symbol).map(|e| e.target))
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    pub fn set_accepts(&self, set: &[StateId]) -> bool {
        set.iter().any(|&q| self.is_accepting_state(q))
    }

    /// Symbols with at least one move out of `set`.
    pub fn enabled(&self, set: &[StateId]) -> BTreeSet<SymbolId> {
        set.iter().flat_map(|&q| self.edges(q).iter().map(|e| e.symbol)).collect()
    }

    /// Leaves whose moves on `symbol` are available from `set`.
    pub fn leaves_on(&self, set: &[StateId], symbol: SymbolId) -> BTreeSet<u32> {
        set.iter()
            .flat_map(|&q| self.edges(q).iter().filter(|e| e.symbol == symbol).map(|e| e.leaf))
            .collect()
    }

    pub fn accepts(&self, trace: &Trace) -> bool {
        self.accepts_activities(trace.events())
    }

    pub fn accepts_activities(&self, events: &[Activity]) -> bool {
        let mut set = self.start_set();
        for a in events {
            let Some(s) = self.symbol(a) else { return false };
            set = self.step(&set, s);
            if set.is_empty() {
                return false;
            }
        }
        self.set_accepts(&set)
    }

    /// Every accepted trace of length at most `max_len`.
    pub fn enumerate_language(&self, max_len: usize) -> Result<BTreeSet<Trace>, SemanticsError> {
        if max_len > MAX_ENUMERATION_LEN {
            return Err(SemanticsError::LengthTooLarge { requested: max_len, limit: MAX_ENUMERATION_LEN });
        }
        let mut out = BTreeSet::new();
        let mut prefix = Vec::new();
        self.enumerate_from(&self.start_set(), max_len, &mut prefix, &mut out)?;
        Ok(out)
    }

    fn enumerate_from(
        &self,
        set: &[StateId],
        max_len: usize,
        prefix: &mut Vec<SymbolId>,
        out: &mut BTreeSet<Trace>,
    ) -> Result<(), SemanticsError> {
        if self.set_accepts(set) {
            out.insert(prefix.iter().map(|&s| self.activity(s).clone()).collect());
            if out.len() > MAX_ENUMERATED_TRACES {
                return Err(SemanticsError::TooManyTraces { limit: MAX_ENUMERATED_TRACES });
            }
        }
        if prefix.len() == max_len {
            return Ok(());
        }
        let budget = (max_len - prefix.len() - 1) as u32;
        for s in self.enabled(set) {
            let next = self.step(set, s);
            let reachable = next.iter().any(|&q| self.to_accept[q as usize] <= budget);
            if reachable {
                prefix.push(s);
                self.enumerate_from(&next, max_len, prefix, out)?;
                prefix.pop();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_expr;

    fn m(text: &str) -> Matcher {
        Matcher::compile(&parse_expr(text).unwrap()).unwrap()
    }

    fn t(text: &str) -> Trace {
        Trace::from_names(&text.split_whitespace().collect::<Vec<_>>())
    }

    fn lang(text: &str, n: usize) -> Vec<String> {
        m(text)
            .enumerate_language(n)
            .unwrap()
            .iter()
            .map(|t| t.events().iter().map(|a| a.name()).collect::<Vec<_>>().join(""))
            .collect()
    }

    #[test]
    fn acceptance() {
        assert!(m("a").accepts(&t("a")));
        assert!(!m("a").accepts(&t("")));
        assert!(m("(a+)").accepts(&t("a a a")));
        assert!(!m("(a+)").accepts(&t("")));
        assert!(m("(a*)").accepts(&t("")));
        assert!(!m("(((a b)+) a)").accepts(&t("a")));
        assert!(m("(a ((b|c) d)* (e&f))").accepts(&t("a b d c d e f")));
        assert!(!m("(a b)").accepts(&t("a z")));
    }

    #[test]
    fn small_languages() {
        assert_eq!(lang("(e&f)", 4), ["ef", "fe"]);
        assert_eq!(lang("(a (b?))", 2), ["a", "ab"]);
        assert_eq!(lang("(a|b)", 1), ["a", "b"]);
        assert_eq!(lang("((a|b)+)", 2), ["a", "aa", "ab", "b", "ba", "bb"]);
        assert_eq!(lang("((a b)&c)", 3), ["abc", "acb", "cab"]);
    }

    #[test]
    fn enumeration_guard() {
        assert_eq!(
            m("(a*)").enumerate_language(17),
            Err(SemanticsError::LengthTooLarge { requested: 17, limit: MAX_ENUMERATION_LEN })
        );
    }

    #[test]
    fn product_guard() {
        // eight parallel 7-step loops: 8^8 > 10^6 product states
        let part = "((a0 a1 a2 a3 a4 a5 a6 a7)+)";
        let parts: Vec<String> = (0..8).map(|i| part.replace('a', &format!("x{i}_"))).collect();
        let p = parse_expr(&format!("({})", parts.join("&"))).unwrap();
        assert_eq!(
            Matcher::compile(&p).unwrap_err(),
            SemanticsError::ProductTooLarge { limit: MAX_PRODUCT_STATES }
        );
    }

    #[test]
    fn shortest_trace() {
        assert_eq!(m("(a (b?) c)").min_len(), 2);
        assert_eq!(m("((a b)*)").min_len(), 0);
        assert_eq!(m("((a b)&(c|(d e)))").min_len(), 3);
    }
}
