use std::fmt::Write;
use std::str::FromStr;

use super::{Kind, Program};

/// Output formats for [`render`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Expr,
    Pseudocode,
    Dot,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expr" => Ok(Format::Expr),
            "pseudocode" => Ok(Format::Pseudocode),
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            other => Err(format!(
                "unknown format `{other}` (expected expr, pseudocode, dot or json)"
            )),
        }
    }
}

pub fn render(p: &Program, format: Format) -> String {
    match format {
        Format::Expr => expr(p),
        Format::Pseudocode => pseudocode(p),
        Format::Dot => dot(p),
        Format::Json => serde_json::to_string_pretty(p).expect("program serializes"),
    }
}

/// Activity names are written bare unless they contain whitespace, a quote
/// or an operator character.
pub(crate) fn quote_name(name: &str) -> String {
    let bare = !name.is_empty()
        && !name.chars().any(|c| c.is_whitespace() || "()?|+*&\"\\".contains(c));
    if bare {
        return name.to_string();
    }
    let mut out = String::with_capacity(name.len() + 2);
    out.push('"');
    for c in name.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub(super) fn expr(p: &Program) -> String {
    let mut out = String::new();
    write_expr(p, &mut out);
    out
}

fn write_expr(p: &Program, out: &mut String) {
    let join = |parts: &[Program], sep: &str, out: &mut String| {
        out.push('(');
        for (i, c) in parts.iter().enumerate() {
            if i > 0 {
                out.push_str(sep);
            }
            write_expr(c, out);
        }
        out.push(')');
    };
    let post = |body: &Program, op: char, out: &mut String| {
        out.push('(');
        write_expr(body, out);
        out.push(op);
        out.push(')');
    };
    match p {
        Program::Leaf(a) => out.push_str(&quote_name(a.name())),
        Program::Seq(v) => join(v, " ", out),
        Program::Choice(v) => join(v, "|", out),
        Program::Par(v) => join(v, "&", out),
        Program::Opt(b) => post(b, '?', out),
        Program::Plus(b) => post(b, '+', out),
        Program::Star(b) => post(b, '*', out),
    }
}

fn pseudocode(p: &Program) -> String {
    let mut lines = Vec::new();
    write_code(p, 0, &mut lines);
    lines.join("\n")
}

fn write_code(p: &Program, depth: usize, lines: &mut Vec<String>) {
    let pad = "  ".repeat(depth);
    match p {
        Program::Leaf(a) => lines.push(format!("{pad}{}", a.name())),
        Program::Seq(v) => v.iter().for_each(|c| write_code(c, depth, lines)),
        Program::Opt(b) => {
            lines.push(format!("{pad}if (.):"));
            write_code(b, depth + 1, lines);
        }
        Program::Choice(v) => {
            for (i, c) in v.iter().enumerate() {
                let head = match i {
                    0 => "if (.):",
                    _ if i + 1 == v.len() => "else:",
                    _ => "elif (.):",
                };
                lines.push(format!("{pad}{head}"));
                write_code(c, depth + 1, lines);
            }
        }
        Program::Plus(b) | Program::Star(b) => {
            lines.push(format!("{pad}while (.):"));
            write_code(b, depth + 1, lines);
        }
        Program::Par(v) => {
            lines.push(format!("{pad}para:"));
            for c in v {
                // a multi-statement branch needs its own block to stay distinct
                if let Program::Seq(_) = c {
                    lines.push(format!("{pad}  seq:"));
                    write_code(c, depth + 2, lines);
                } else {
                    write_code(c, depth + 1, lines);
                }
            }
        }
    }
}

fn dot(p: &Program) -> String {
    let mut out = String::from("digraph program {\n  node [fontname=\"Helvetica\"];\n");
    let mut next = 0usize;
    write_dot(p, &mut next, &mut out);
    out.push_str("}\n");
    out
}

fn write_dot(p: &Program, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    match p {
        Program::Leaf(a) => {
            let _ = writeln!(out, "  n{id} [shape=box, label={}];", dot_string(a.name()));
        }
        _ => {
            let symbol = match p.kind() {
                Kind::Seq => "seq",
                Kind::Opt => "?",
                Kind::Choice => "|",
                Kind::Plus => "+",
                Kind::Star => "*",
                Kind::Par => "&",
                Kind::Leaf => unreachable!(),
            };
            let _ = writeln!(out, "  n{id} [shape=ellipse, label={}];", dot_string(symbol));
            for c in p.children() {
                let child = write_dot(c, next, out);
                let _ = writeln!(out, "  n{id} -> n{child};");
            }
        }
    }
    id
}

pub(crate) fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}
