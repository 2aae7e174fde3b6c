//! Directly-follows graphs and the mutations used by the rewriting rules.
//!
//! Node ids are stable: Begin is 0, End is 1, activities get 2.. in name
//! order, and every contraction allocates a fresh id above all existing
//! ones. Successor and predecessor sets are both kept so that rule matching
//! can look at a node's neighbourhood without scanning the edge list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::event_log::{Activity, ExpandedLog};
use crate::program::render::dot_string;
use crate::program::Program;

pub type NodeId = usize;

pub const BEGIN_ID: NodeId = 0;
pub const END_ID: NodeId = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DfgError {
    #[error("node {0} does not exist")]
    MissingNode(NodeId),
    #[error("edge {0} -> {1} does not exist")]
    MissingEdge(NodeId, NodeId),
    #[error("sentinel node {0} cannot be contracted or relabelled")]
    Sentinel(NodeId),
    #[error("cannot contract node {0} with itself")]
    SelfContraction(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentinel {
    Begin,
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfgNode {
    pub id: NodeId,
    pub label: Program,
    pub sentinel: Option<Sentinel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfg {
    nodes: BTreeMap<NodeId, DfgNode>,
    succ: BTreeMap<NodeId, BTreeMap<NodeId, u64>>,
    pred: BTreeMap<NodeId, BTreeSet<NodeId>>,
    edge_count: usize,
    next_id: NodeId,
}

impl Dfg {
    /// Builds the graph of a sentinel-expanded log. Edge frequency is the
    /// number of adjacent occurrences over the whole multiset.
    pub fn build(log: &ExpandedLog) -> Dfg {
        let alphabet: BTreeSet<&Activity> = log
            .traces()
            .iter()
            .flat_map(|t| t.events())
            .filter(|a| !a.is_sentinel())
            .collect();
        let mut g = Dfg::with_activities(alphabet.iter().copied().cloned());
        let ids: BTreeMap<&Activity, NodeId> = g
            .nodes
            .values()
            .filter_map(|n| match (&n.label, n.sentinel) {
                (Program::Leaf(a), None) => Some((alphabet.get(a).copied().unwrap(), n.id)),
                _ => None,
            })
            .collect();
        let id_of = |a: &Activity| match a.name() {
            crate::event_log::BEGIN => BEGIN_ID,
            crate::event_log::END => END_ID,
            _ => ids[a],
        };
        for t in log.traces() {
            for w in t.events().windows(2) {
                g.add_edge(id_of(&w[0]), id_of(&w[1]), 1);
            }
        }
        g
    }

    /// A graph with the two sentinels and one isolated node per activity.
    pub fn with_activities<I: IntoIterator<Item = Activity>>(activities: I) -> Dfg {
        let mut g = Dfg {
            nodes: BTreeMap::new(),
            succ: BTreeMap::new(),
            pred: BTreeMap::new(),
            edge_count: 0,
            next_id: 0,
        };
        g.insert_node(Program::Leaf(Activity::begin()), Some(Sentinel::Begin));
        g.insert_node(Program::Leaf(Activity::end()), Some(Sentinel::End));
        let sorted: BTreeSet<Activity> = activities.into_iter().collect();
        for a in sorted {
            g.insert_node(Program::Leaf(a), None);
        }
        g
    }

    fn insert_node(&mut self, label: Program, sentinel: Option<Sentinel>) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        self.nodes.insert(id, DfgNode { id, label, sentinel });
        self.succ.insert(id, BTreeMap::new());
        self.pred.insert(id, BTreeSet::new());
        id
    }

    /// Adds `freq` observations of `u -> v`, creating the edge if needed.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, freq: u64) {
        let out = self.succ.get_mut(&u).expect("edge source exists");
        let slot = out.entry(v).or_insert(0);
        if *slot == 0 {
            self.edge_count += 1;
        }
        *slot += freq;
        self.pred.get_mut(&v).expect("edge target exists").insert(u);
    }

    pub fn begin(&self) -> NodeId {
        BEGIN_ID
    }

    pub fn end(&self) -> NodeId {
        END_ID
    }

    pub fn node(&self, id: NodeId) -> Option<&DfgNode> {
        self.nodes.get(&id)
    }

    pub fn label(&self, id: NodeId) -> &Program {
        &self.nodes[&id].label
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn is_sentinel(&self, id: NodeId) -> bool {
        self.nodes.get(&id).is_some_and(|n| n.sentinel.is_some())
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// Non-sentinel nodes in ascending id order.
    pub fn inner_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.values().filter(|n| n.sentinel.is_none()).map(|n| n.id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.succ.get(&u).is_some_and(|s| s.contains_key(&v))
    }

    pub fn frequency(&self, u: NodeId, v: NodeId) -> Option<u64> {
        self.succ.get(&u).and_then(|s| s.get(&v)).copied()
    }

    /// All successors, including `u` itself on a self-loop.
    pub fn successors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.succ[&u].keys().copied()
    }

    pub fn predecessors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.pred[&u].iter().copied()
    }

    /// Successors other than `u` itself.
    pub fn out_set(&self, u: NodeId) -> BTreeSet<NodeId> {
        self.successors(u).filter(|&x| x != u).collect()
    }

    /// Predecessors other than `u` itself.
    pub fn in_set(&self, u: NodeId) -> BTreeSet<NodeId> {
        self.predecessors(u).filter(|&x| x != u).collect()
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.succ[&u].len() - usize::from(self.has_edge(u, u))
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.pred[&u].len() - usize::from(self.has_edge(u, u))
    }

    /// Edges as `(from, to, frequency)` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.succ.iter().flat_map(|(&u, out)| out.iter().map(move |(&v, &f)| (u, v, f)))
    }

    fn check_inner(&self, u: NodeId) -> Result<(), DfgError> {
        match self.nodes.get(&u) {
            None => Err(DfgError::MissingNode(u)),
            Some(n) if n.sentinel.is_some() => Err(DfgError::Sentinel(u)),
            Some(_) => Ok(()),
        }
    }

    /// Replaces `u` and `v` by one fresh node carrying `label`. Edges
    /// between `u` and `v` (and self-loops on either) disappear; all other
    /// edges are redirected to the new node with frequencies summed.
    pub fn contract(&mut self, u: NodeId, v: NodeId, label: Program) -> Result<NodeId, DfgError> {
        if u == v {
            return Err(DfgError::SelfContraction(u));
        }
        self.check_inner(u)?;
        self.check_inner(v)?;
        let pair = [u, v];
        let mut incoming: BTreeMap<NodeId, u64> = BTreeMap::new();
        let mut outgoing: BTreeMap<NodeId, u64> = BTreeMap::new();
        for x in pair {
            for p in self.pred[&x].clone() {
                let f = self.succ[&p][&x];
                if !pair.contains(&p) {
                    *incoming.entry(p).or_default() += f;
                }
                self.remove_edge(p, x);
            }
            for s in self.succ[&x].keys().copied().collect::<Vec<_>>() {
                let f = self.succ[&x][&s];
                if !pair.contains(&s) {
                    *outgoing.entry(s).or_default() += f;
                }
                self.remove_edge(x, s);
            }
        }
        for x in pair {
            self.nodes.remove(&x);
            self.succ.remove(&x);
            self.pred.remove(&x);
        }
        let w = self.insert_node(label, None);
        for (p, f) in incoming {
            self.add_edge(p, w, f);
        }
        for (s, f) in outgoing {
            self.add_edge(w, s, f);
        }
        Ok(w)
    }

    fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Option<u64> {
        let f = self.succ.get_mut(&u)?.remove(&v)?;
        if let Some(p) = self.pred.get_mut(&v) {
            p.remove(&u);
        }
        self.edge_count -= 1;
        Some(f)
    }

    pub fn relabel(&mut self, u: NodeId, label: Program) -> Result<(), DfgError> {
        self.check_inner(u)?;
        self.nodes.get_mut(&u).unwrap().label = label;
        Ok(())
    }

    /// Removes `u -> v`, returning its frequency.
    pub fn delete_edge(&mut self, u: NodeId, v: NodeId) -> Result<u64, DfgError> {
        self.remove_edge(u, v).ok_or(DfgError::MissingEdge(u, v))
    }

    /// Graphviz rendering; sentinels are drawn as filled circles.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfg {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
        for n in self.nodes.values() {
            let style = match n.sentinel {
                Some(_) => "shape=circle, style=filled, fillcolor=\"#dddddd\"",
                None => "shape=box",
            };
            let _ = writeln!(out, "  n{} [{style}, label={}];", n.id, dot_string(&n.label.to_expr()));
        }
        for (u, v, f) in self.edges() {
            let _ = writeln!(out, "  n{u} -> n{v} [label=\"{f}\"];");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct JsonNode<'a> {
            id: NodeId,
            label: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            sentinel: Option<&'a Sentinel>,
        }
        #[derive(Serialize)]
        struct JsonEdge {
            from: NodeId,
            to: NodeId,
            frequency: u64,
        }
        let nodes: Vec<JsonNode> = self
            .nodes
            .values()
            .map(|n| JsonNode { id: n.id, label: n.label.to_expr(), sentinel: n.sentinel.as_ref() })
            .collect();
        let edges: Vec<JsonEdge> =
            self.edges().map(|(from, to, frequency)| JsonEdge { from, to, frequency }).collect();
        serde_json::json!({ "nodes": nodes, "edges": edges })
    }

    /// Begin has no incoming edges and End no outgoing ones.
    pub fn sentinels_ok(&self) -> bool {
        self.pred[&BEGIN_ID].is_empty() && self.succ[&END_ID].is_empty()
    }
}
