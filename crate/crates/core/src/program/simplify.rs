//! Language-preserving simplification of structured programs.
//!
//! Rewrites, with `S`, `S1`, `S2`, `S3` arbitrary sub-programs:
//!
//! ```text
//! ((S?)?) => (S?)        ((S+)?) => (S*)        ((S*)?) => (S*)
//! ((S+)+) => (S+)        ((S?)+) => (S*)        ((S*)+) => (S*)
//! ((S?)*) => (S*)        ((S+)*) => (S*)        ((S*)*) => (S*)
//! ((S1 S2) S3), (S1 (S2 S3))     => (S1 S2 S3)       likewise for | and &
//! ((S1?)|S2), (S1|(S2?))         => ((S1|S2)?)
//! (((S1+)|S2)+), ((S1|(S2+))+)   => ((S1|S2)+)
//! (((S1*)|S2)+), ((S1|(S2*))+)   => ((S1|S2)*)
//! (((S1+)|S2)*), (((S1*)|S2)*)   => ((S1|S2)*)       and mirrored
//! (((S1?)(S2?))+), (((S1*)(S2*))+), and their * forms => ((S1|S2)*)
//! (((S1+)(S2?))+) => ((S1(S2?))+)    (((S1?)(S2+))+) => (((S1?)S2)+)
//! (((S1+)(S2?))*) => ((S1(S2?))*)    (((S1?)(S2+))*) => (((S1?)S2)*)
//! ```
//!
//! Because sequence, choice and parallel nodes are n-ary, the rules act on
//! any number of children: every optional branch of a choice is hoisted at
//! once, a loop over a sequence of optional or starred parts becomes a
//! starred choice, and a loop over a sequence with exactly one `+` part and
//! otherwise optional or starred parts drops that `+`.

use super::Program;

/// Applies the rewrites bottom-up until none matches.
pub fn simplify(p: &Program) -> Program {
    let rebuilt = match p {
        Program::Leaf(_) => return p.clone(),
        Program::Seq(v) => Program::Seq(v.iter().map(simplify).collect()),
        Program::Choice(v) => Program::Choice(v.iter().map(simplify).collect()),
        Program::Par(v) => Program::Par(v.iter().map(simplify).collect()),
        Program::Opt(b) => Program::opt(simplify(b)),
        Program::Plus(b) => Program::plus(simplify(b)),
        Program::Star(b) => Program::star(simplify(b)),
    };
    normalize(rebuilt)
}

/// Rewrites the root of a program whose children are already simplified.
fn normalize(p: Program) -> Program {
    match p {
        Program::Leaf(_) => p,
        Program::Seq(v) => Program::seq(flatten(v, is_seq)),
        Program::Par(v) => Program::par(flatten(v, is_par)),
        Program::Choice(v) => normalize_choice(v),
        Program::Opt(b) => match *b {
            Program::Opt(_) | Program::Star(_) => *b,
            Program::Plus(x) => normalize(Program::Star(x)),
            other => Program::opt(other),
        },
        Program::Plus(b) => match *b {
            Program::Plus(_) | Program::Star(_) => *b,
            Program::Opt(x) => normalize(Program::Star(x)),
            body => normalize_loop(body, false),
        },
        Program::Star(b) => match *b {
            Program::Opt(x) | Program::Plus(x) | Program::Star(x) => normalize(Program::Star(x)),
            body => normalize_loop(body, true),
        },
    }
}

fn is_seq(p: &Program) -> bool {
    matches!(p, Program::Seq(_))
}

fn is_par(p: &Program) -> bool {
    matches!(p, Program::Par(_))
}

fn is_choice(p: &Program) -> bool {
    matches!(p, Program::Choice(_))
}

fn flatten(parts: Vec<Program>, same: fn(&Program) -> bool) -> Vec<Program> {
    if !parts.iter().any(same) {
        return parts;
    }
    let mut out = Vec::with_capacity(parts.len() + 2);
    for c in parts {
        if same(&c) {
            match c {
                Program::Seq(inner) | Program::Choice(inner) | Program::Par(inner) => {
                    out.extend(inner)
                }
                _ => unreachable!(),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn normalize_choice(branches: Vec<Program>) -> Program {
    let mut branches = flatten(branches, is_choice);
    let mut optional = false;
    if branches.iter().any(|b| matches!(b, Program::Opt(_))) {
        optional = true;
        branches = branches
            .into_iter()
            .map(|b| match b {
                Program::Opt(x) => *x,
                other => other,
            })
            .collect();
        branches = flatten(branches, is_choice);
    }
    let choice = Program::choice(branches);
    if optional {
        normalize(Program::opt(choice))
    } else {
        choice
    }
}

/// Loop bodies: `star` selects between `(body*)` and `(body+)`.
fn normalize_loop(body: Program, star: bool) -> Program {
    let wrap = |b: Program, star: bool| {
        if star {
            Program::star(b)
        } else {
            Program::plus(b)
        }
    };
    match body {
        Program::Choice(v) if v.iter().any(|b| matches!(b, Program::Plus(_) | Program::Star(_))) => {
            let mut starred = star;
            let stripped = v
                .into_iter()
                .map(|b| match b {
                    Program::Plus(x) => *x,
                    Program::Star(x) => {
                        starred = true;
                        *x
                    }
                    other => other,
                })
                .collect();
            normalize(wrap(normalize_choice(stripped), starred))
        }
        Program::Seq(v) if v.iter().all(is_skippable) => {
            let bodies = v
                .into_iter()
                .map(|p| match p {
                    Program::Opt(x) | Program::Star(x) => *x,
                    _ => unreachable!(),
                })
                .collect();
            normalize(Program::star(normalize_choice(bodies)))
        }
        Program::Seq(v) if single_plus_among_skippable(&v) => {
            let parts = v
                .into_iter()
                .map(|p| match p {
                    Program::Plus(x) => *x,
                    other => other,
                })
                .collect();
            normalize(wrap(normalize(Program::Seq(parts)), star))
        }
        other => wrap(other, star),
    }
}

fn is_skippable(p: &Program) -> bool {
    matches!(p, Program::Opt(_) | Program::Star(_))
}

fn single_plus_among_skippable(parts: &[Program]) -> bool {
    let plus = parts.iter().filter(|p| matches!(p, Program::Plus(_))).count();
    plus == 1 && parts.iter().all(|p| matches!(p, Program::Plus(_)) || is_skippable(p))
}
