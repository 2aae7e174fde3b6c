//! Structured programs: the block-structured process models produced by the
//! miner.
//!
//! A program is a tree over seven constructs. Sequence, choice and parallel
//! nodes are n-ary; the other operators are unary.
//!
//! | construct | expression | pseudocode |
//! |-----------|------------|------------|
//! | activity  | `x`        | `x`        |
//! | sequence  | `(S1 S2)`  | `S1`, `S2` on consecutive lines |
//! | optional  | `(S?)`     | `if (.):` |
//! | choice    | `(S1\|S2)` | `if (.):` / `else:` |
//! | plus      | `(S+)`     | `while (.):` |
//! | star      | `(S*)`     | `while (.):` |
//! | parallel  | `(S1&S2)`  | `para:` |

mod json;
pub(crate) mod render;
mod simplify;
mod token;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use render::{render, Format};
pub use simplify::simplify;
pub use token::{parse_expr, ParseError, Token, TokenStream};

use crate::event_log::Activity;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Program {
    Leaf(Activity),
    Seq(Vec<Program>),
    Opt(Box<Program>),
    Choice(Vec<Program>),
    Plus(Box<Program>),
    Star(Box<Program>),
    Par(Vec<Program>),
}

/// Operator kinds, used for rendering and JSON.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Leaf,
    Seq,
    Opt,
    Choice,
    Plus,
    Star,
    Par,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Leaf => "activity",
            Kind::Seq => "seq",
            Kind::Opt => "opt",
            Kind::Choice => "choice",
            Kind::Plus => "plus",
            Kind::Star => "star",
            Kind::Par => "par",
        }
    }
}

impl Program {
    /// Leaf for a named activity; panics on reserved or empty names.
    pub fn leaf(name: &str) -> Self {
        Program::Leaf(Activity::new(name).expect("valid activity name"))
    }

    /// Sequence; a single part collapses to the part itself.
    pub fn seq(parts: Vec<Program>) -> Self {
        Self::nary(parts, Program::Seq)
    }

    pub fn choice(branches: Vec<Program>) -> Self {
        Self::nary(branches, Program::Choice)
    }

    pub fn par(parts: Vec<Program>) -> Self {
        Self::nary(parts, Program::Par)
    }

    fn nary(mut parts: Vec<Program>, f: fn(Vec<Program>) -> Program) -> Self {
        assert!(!parts.is_empty(), "n-ary node needs at least one child");
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            f(parts)
        }
    }

    pub fn opt(body: Program) -> Self {
        Program::Opt(Box::new(body))
    }

    pub fn plus(body: Program) -> Self {
        Program::Plus(Box::new(body))
    }

    pub fn star(body: Program) -> Self {
        Program::Star(Box::new(body))
    }

    pub fn kind(&self) -> Kind {
        match self {
            Program::Leaf(_) => Kind::Leaf,
            Program::Seq(_) => Kind::Seq,
            Program::Opt(_) => Kind::Opt,
            Program::Choice(_) => Kind::Choice,
            Program::Plus(_) => Kind::Plus,
            Program::Star(_) => Kind::Star,
            Program::Par(_) => Kind::Par,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Program::Leaf(_))
    }

    pub fn children(&self) -> &[Program] {
        match self {
            Program::Leaf(_) => &[],
            Program::Seq(v) | Program::Choice(v) | Program::Par(v) => v,
            Program::Opt(b) | Program::Plus(b) | Program::Star(b) => std::slice::from_ref(&**b),
        }
    }

    /// Leaf activities in preorder, duplicates included.
    pub fn leaves(&self) -> Vec<&Activity> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Activity>) {
        match self {
            Program::Leaf(a) => out.push(a),
            _ => self.children().iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn activities(&self) -> BTreeSet<Activity> {
        self.leaves().into_iter().cloned().collect()
    }

    /// Number of leaves naming an activity that already appeared in an
    /// earlier leaf.
    pub fn duplicate_leaf_count(&self) -> usize {
        let mut counts: BTreeMap<&Activity, usize> = BTreeMap::new();
        for a in self.leaves() {
            *counts.entry(a).or_default() += 1;
        }
        counts.values().map(|c| c - 1).sum()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Program::node_count).sum::<usize>()
    }

    /// Height of the syntax tree; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Program::depth).max().unwrap_or(0)
    }

    /// Whether the empty trace belongs to the program's language.
    pub fn nullable(&self) -> bool {
        match self {
            Program::Leaf(_) => false,
            Program::Opt(_) | Program::Star(_) => true,
            Program::Plus(b) => b.nullable(),
            Program::Seq(v) | Program::Par(v) => v.iter().all(Program::nullable),
            Program::Choice(v) => v.iter().any(Program::nullable),
        }
    }

    /// Serialization tokens of the fully parenthesized expression.
    pub fn tokenize(&self) -> TokenStream {
        token::tokenize(self)
    }

    /// Sorts choice branches and parallel parts by their token strings,
    /// bottom-up. Expects a simplified program.
    pub fn canonicalize(&self) -> Program {
        match self {
            Program::Leaf(_) => self.clone(),
            Program::Seq(v) => Program::Seq(v.iter().map(Program::canonicalize).collect()),
            Program::Opt(b) => Program::opt(b.canonicalize()),
            Program::Plus(b) => Program::plus(b.canonicalize()),
            Program::Star(b) => Program::star(b.canonicalize()),
            Program::Choice(v) => Program::Choice(sorted_by_tokens(v)),
            Program::Par(v) => Program::Par(sorted_by_tokens(v)),
        }
    }

    /// Fully parenthesized expression form.
    pub fn to_expr(&self) -> String {
        render::expr(self)
    }
}

fn sorted_by_tokens(parts: &[Program]) -> Vec<Program> {
    let mut keyed: Vec<(Vec<String>, Program)> = parts
        .iter()
        .map(|p| {
            let c = p.canonicalize();
            (c.tokenize().strings(), c)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr())
    }
}

impl std::str::FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}
