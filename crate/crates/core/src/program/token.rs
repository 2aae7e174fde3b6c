use std::fmt;

use thiserror::Error;

use super::Program;
use crate::event_log::Activity;

/// One program token. Activity tokens carry the raw activity name, so an
/// activity literally named `(` never collides with punctuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Open,
    Close,
    Opt,
    Choice,
    Plus,
    Star,
    Par,
    Activity(Activity),
}

impl Token {
    pub fn as_str(&self) -> &str {
        match self {
            Token::Open => "(",
            Token::Close => ")",
            Token::Opt => "?",
            Token::Choice => "|",
            Token::Plus => "+",
            Token::Star => "*",
            Token::Par => "&",
            Token::Activity(a) => a.name(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TokenStream(pub Vec<Token>);

impl TokenStream {
    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn strings(&self) -> Vec<String> {
        self.0.iter().map(|t| t.as_str().to_string()).collect()
    }

    /// Rebuilds the program the stream was produced from.
    pub fn parse(&self) -> Result<Program, ParseError> {
        let spanned: Vec<(Token, usize)> =
            self.0.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Parser { toks: &spanned, pos: 0, end: self.0.len() }.parse_all()
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match t {
                Token::Activity(a) => f.write_str(&super::render::quote_name(a.name()))?,
                _ => f.write_str(t.as_str())?,
            }
        }
        Ok(())
    }
}

pub(super) fn tokenize(p: &Program) -> TokenStream {
    let mut out = Vec::new();
    push_tokens(p, &mut out);
    TokenStream(out)
}

fn push_tokens(p: &Program, out: &mut Vec<Token>) {
    let infix = |parts: &[Program], sep: Option<Token>, out: &mut Vec<Token>| {
        out.push(Token::Open);
        for (i, c) in parts.iter().enumerate() {
            if i > 0 {
                if let Some(s) = &sep {
                    out.push(s.clone());
                }
            }
            push_tokens(c, out);
        }
        out.push(Token::Close);
    };
    let postfix = |body: &Program, op: Token, out: &mut Vec<Token>| {
        out.push(Token::Open);
        push_tokens(body, out);
        out.push(op);
        out.push(Token::Close);
    };
    match p {
        Program::Leaf(a) => out.push(Token::Activity(a.clone())),
        Program::Seq(v) => infix(v, None, out),
        Program::Choice(v) => infix(v, Some(Token::Choice), out),
        Program::Par(v) => infix(v, Some(Token::Par), out),
        Program::Opt(b) => postfix(b, Token::Opt, out),
        Program::Plus(b) => postfix(b, Token::Plus, out),
        Program::Star(b) => postfix(b, Token::Star, out),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { position, message: message.into() })
}

const SPECIAL: &[char] = &['(', ')', '?', '|', '+', '*', '&', '"'];

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '(' => Token::Open,
            ')' => Token::Close,
            '?' => Token::Opt,
            '|' => Token::Choice,
            '+' => Token::Plus,
            '*' => Token::Star,
            '&' => Token::Par,
            '"' => {
                chars.next();
                let mut name = String::new();
                loop {
                    match chars.next() {
                        None => return err(pos, "unterminated quoted activity"),
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, e)) => name.push(e),
                            None => return err(pos, "unterminated escape"),
                        },
                        Some((_, ch)) => name.push(ch),
                    }
                }
                out.push((activity_token(&name, pos)?, pos));
                continue;
            }
            _ => {
                let mut name = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_whitespace() || SPECIAL.contains(&ch) {
                        break;
                    }
                    name.push(ch);
                    chars.next();
                }
                out.push((activity_token(&name, pos)?, pos));
                continue;
            }
        };
        chars.next();
        out.push((tok, pos));
    }
    Ok(out)
}

fn activity_token(name: &str, pos: usize) -> Result<Token, ParseError> {
    Activity::new(name)
        .map(Token::Activity)
        .or_else(|_| err(pos, format!("`{name}` is not a valid activity name")))
}

/// Parses the expression grammar.
///
/// Parentheses group; a group holding several items is a sequence; `|` and
/// `&` separate branches (they cannot be mixed without parentheses);
/// `?`, `+` and `*` are postfix. Fully parenthesized output of
/// [`Program::to_expr`] parses back to the identical tree, and the looser
/// regular-expression style `(a ((b|c) d)* (e&f))` is accepted too.
pub fn parse_expr(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    Parser { toks: &toks, pos: 0, end: text.len() }.parse_all()
}

struct Parser<'a> {
    toks: &'a [(Token, usize)],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn parse_all(mut self) -> Result<Program, ParseError> {
        if self.toks.is_empty() {
            return err(0, "empty expression");
        }
        let p = self.alt()?;
        match self.peek() {
            None => Ok(p),
            Some(t) => err(self.here(), format!("unexpected `{t}`")),
        }
    }

    fn alt(&mut self) -> Result<Program, ParseError> {
        let first = self.cat()?;
        let sep = match self.peek() {
            Some(Token::Choice) => Token::Choice,
            Some(Token::Par) => Token::Par,
            _ => return Ok(first),
        };
        let mut parts = vec![first];
        while let Some(t) = self.peek() {
            if *t == sep {
                self.pos += 1;
                parts.push(self.cat()?);
            } else if matches!(t, Token::Choice | Token::Par) {
                return err(self.here(), "cannot mix `|` and `&` without parentheses");
            } else {
                break;
            }
        }
        Ok(if sep == Token::Choice { Program::Choice(parts) } else { Program::Par(parts) })
    }

    fn cat(&mut self) -> Result<Program, ParseError> {
        let mut parts = Vec::new();
        while let Some(t) = self.peek() {
            match t {
                Token::Close | Token::Choice | Token::Par => break,
                _ => parts.push(self.postfix()?),
            }
        }
        match parts.len() {
            0 => err(self.here(), "expected an activity or `(`"),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(Program::Seq(parts)),
        }
    }

    fn postfix(&mut self) -> Result<Program, ParseError> {
        let mut p = self.primary()?;
        loop {
            p = match self.peek() {
                Some(Token::Opt) => Program::opt(p),
                Some(Token::Plus) => Program::plus(p),
                Some(Token::Star) => Program::star(p),
                _ => return Ok(p),
            };
            self.pos += 1;
        }
    }

    fn primary(&mut self) -> Result<Program, ParseError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Token::Activity(a)) => {
                self.pos += 1;
                Ok(Program::Leaf(a))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.alt()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => err(self.here(), "expected `)`"),
                }
            }
            Some(t) => err(at, format!("unexpected `{t}`")),
            None => err(at, "unexpected end of input"),
        }
    }
}
