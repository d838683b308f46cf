//! Canonical s-expression text form, e.g. `(withoracle (query id) (const 3))`.
//!
//! A bare numeral anywhere a program is expected stands for the program with
//! that Gödel code, so `(comp 5 succ)` and `(comp (query id) succ)` parse to
//! the same tree.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use super::numbering::decode;
use super::program::{Prog, Program, Tag};
use crate::nat::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

pub fn print(program: &Program) -> String {
    let mut out = String::new();
    write_into(program, &mut out);
    out
}

fn write_into(program: &Program, out: &mut String) {
    match program {
        Program::Id | Program::Succ | Program::Pred | Program::Half => {
            out.push_str(program.tag().keyword())
        }
        Program::Const(k) => {
            let _ = write!(out, "(const {k})");
        }
        _ => {
            out.push('(');
            out.push_str(program.tag().keyword());
            for child in program.children() {
                out.push(' ');
                write_into(child, out);
            }
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token<'_>)>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'(' => {
                tokens.push((i, Token::Open));
                i += 1;
            }
            b')' => {
                tokens.push((i, Token::Close));
                i += 1;
            }
            _ if c.is_ascii_whitespace() => i += 1,
            _ if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'-')
                {
                    i += 1;
                }
                tokens.push((start, Token::Atom(&text[start..i])));
            }
            _ => {
                return Err(ParseError::new(
                    i,
                    format!("unexpected character {:?}", c as char),
                ))
            }
        }
    }
    Ok(tokens)
}

pub fn parse(text: &str) -> Result<Prog, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        at: 0,
        end: text.len(),
    };
    let program = parser.program()?;
    if let Some((pos, _)) = tokens.get(parser.at) {
        return Err(ParseError::new(*pos, "trailing input after program"));
    }
    Ok(program)
}

struct Parser<'t, 'a> {
    tokens: &'t [(usize, Token<'a>)],
    at: usize,
    end: usize,
}

impl<'t, 'a> Parser<'t, 'a> {
    fn next(&mut self) -> Result<(usize, Token<'a>), ParseError> {
        let tok = self
            .tokens
            .get(self.at)
            .cloned()
            .ok_or_else(|| ParseError::new(self.end, "unexpected end of input"))?;
        self.at += 1;
        Ok(tok)
    }

    fn program(&mut self) -> Result<Prog, ParseError> {
        match self.next()? {
            (pos, Token::Close) => Err(ParseError::new(pos, "unexpected ')'")),
            (pos, Token::Atom(word)) => atom(pos, word),
            (_, Token::Open) => {
                let (pos, head) = match self.next()? {
                    (pos, Token::Atom(word)) => (pos, word),
                    (pos, _) => return Err(ParseError::new(pos, "expected a constructor name")),
                };
                let tag = Tag::from_keyword(head)
                    .ok_or_else(|| ParseError::new(pos, format!("unknown constructor `{head}`")))?;
                let node = if tag == Tag::Const {
                    match self.next()? {
                        (npos, Token::Atom(word)) => {
                            let k: Nat = word.parse().map_err(|_| {
                                ParseError::new(npos, format!("`{word}` is not a natural number"))
                            })?;
                            Program::Const(k)
                        }
                        (npos, _) => {
                            return Err(ParseError::new(npos, "const expects a natural number"))
                        }
                    }
                } else if tag.arity() == 0 {
                    return Err(ParseError::new(
                        pos,
                        format!("`{head}` takes no arguments; write it bare"),
                    ));
                } else {
                    let mut kids = Vec::with_capacity(tag.arity());
                    for _ in 0..tag.arity() {
                        kids.push(self.program()?);
                    }
                    Program::from_parts(tag, kids)
                };
                match self.next()? {
                    (_, Token::Close) => Ok(Arc::new(node)),
                    (pos, _) => Err(ParseError::new(
                        pos,
                        format!("`{head}` takes {} argument(s)", tag.arity().max(1)),
                    )),
                }
            }
        }
    }
}

fn atom(pos: usize, word: &str) -> Result<Prog, ParseError> {
    if let Ok(code) = word.parse::<Nat>() {
        return Ok(Arc::new(decode(&code)));
    }
    match Tag::from_keyword(word) {
        Some(tag) if tag.arity() == 0 && tag != Tag::Const => {
            Ok(Arc::new(Program::from_parts(tag, vec![])))
        }
        Some(_) => Err(ParseError::new(
            pos,
            format!("`{word}` needs parentheses and arguments"),
        )),
        None => Err(ParseError::new(pos, format!("unknown atom `{word}`"))),
    }
}
