//! Reference implementations that share no code with the library: the
//! bounded language of a program computed structurally from its syntax
//! tree, a full-matrix Levenshtein distance, and alignment by exhaustive
//! search over the bounded language.

use std::collections::BTreeSet;

use structmine::program::Program;

pub type Word = Vec<String>;

fn concat(xs: &BTreeSet<Word>, ys: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() <= max_len {
                out.insert(x.iter().chain(y).cloned().collect());
            }
        }
    }
    out
}

fn interleavings(x: &[String], y: &[String], prefix: &mut Word, out: &mut BTreeSet<Word>) {
    if x.is_empty() || y.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(x);
        w.extend_from_slice(y);
        out.insert(w);
        return;
    }
    prefix.push(x[0].clone());
    interleavings(&x[1..], y, prefix, out);
    prefix.pop();
    prefix.push(y[0].clone());
    interleavings(x, &y[1..], prefix, out);
    prefix.pop();
}

fn shuffle(xs: &BTreeSet<Word>, ys: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() <= max_len {
                interleavings(x, y, &mut Vec::new(), &mut out);
            }
        }
    }
    out
}

/// All traces of `p` with at most `max_len` events.
pub fn language(p: &Program, max_len: usize) -> BTreeSet<Word> {
    let epsilon: BTreeSet<Word> = [Vec::new()].into();
    match p {
        Program::Leaf(a) => {
            if max_len == 0 {
                BTreeSet::new()
            } else {
                [vec![a.name().to_string()]].into()
            }
        }
        Program::Seq(parts) => parts
            .iter()
            .fold(epsilon, |acc, q| concat(&acc, &language(q, max_len), max_len)),
        Program::Par(parts) => parts
            .iter()
            .fold(epsilon, |acc, q| shuffle(&acc, &language(q, max_len), max_len)),
        Program::Choice(branches) => branches.iter().flat_map(|q| language(q, max_len)).collect(),
        Program::Opt(body) => {
            let mut l = language(body, max_len);
            l.insert(Vec::new());
            l
        }
        Program::Plus(body) | Program::Star(body) => {
            let base = language(body, max_len);
            let mut all = base.clone();
            loop {
                let next = concat(&all, &base, max_len);
                let before = all.len();
                all.extend(next);
                if all.len() == before {
                    break;
                }
            }
            if matches!(p, Program::Star(_)) {
                all.insert(Vec::new());
            }
            all
        }
    }
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Shortest trace length of `p`, read off the syntax tree.
pub fn min_len(p: &Program) -> usize {
    match p {
        Program::Leaf(_) => 1,
        Program::Seq(v) | Program::Par(v) => v.iter().map(min_len).sum(),
        Program::Choice(v) => v.iter().map(min_len).min().unwrap(),
        Program::Opt(_) | Program::Star(_) => 0,
        Program::Plus(b) => min_len(b),
    }
}

/// Alignment cost by trying every model trace that could possibly be
/// optimal: a repair never needs more than `|t| + min_len` edits, so no
/// trace longer than `2|t| + min_len` can win.
pub fn align_cost(p: &Program, trace: &[String]) -> usize {
    let bound = 2 * trace.len() + min_len(p);
    language(p, bound)
        .iter()
        .map(|w| levenshtein(trace, w))
        .min()
        .expect("non-empty language")
}
