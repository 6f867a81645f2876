//! Text formats for foliation graphs and surface models, and DOT export.
//!
//! Both formats are line-oriented UTF-8 with `#` comments. Parsers report
//! every problem as a [`Diagnostic`] with a 1-based line and column.

mod dot;
mod graph_file;
mod surface_file;

use std::fmt;

use thiserror::Error;

use crate::graph::FoliationGraph;
use crate::surface::SurfaceModel;

pub use dot::to_dot;
pub use graph_file::{parse_graph, serialize_graph};
pub use surface_file::{parse_surface, serialize_surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Lexical,
    Syntactic,
    Semantic,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::Syntactic => "syntax",
            DiagnosticKind::Semantic => "semantic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(pos: Pos, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            line: pos.line,
            column: pos.column,
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} error: {}",
            self.line, self.column, self.kind, self.message
        )
    }
}

/// One or more diagnostics, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub(crate) fn one(d: Diagnostic) -> Self {
        ParseError {
            diagnostics: vec![d],
        }
    }

    pub fn kind(&self) -> DiagnosticKind {
        self.diagnostics[0].kind
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// What a file turned out to contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Graph(FoliationGraph),
    Surface(SurfaceModel),
}

/// Parses raw bytes as either format, chosen by the first keyword.
pub fn parse(bytes: &[u8]) -> Result<Document, ParseError> {
    let text = decode(bytes)?;
    let lines = lex(text)?;
    match lines.first().and_then(|l| l.tokens.first()) {
        Some(t) if t.text == "graph" => parse_graph(text).map(Document::Graph),
        Some(t) if t.text == "scalar" || t.text == "surface" => {
            parse_surface(text).map(Document::Surface)
        }
        Some(t) => Err(ParseError::one(Diagnostic::new(
            t.pos,
            DiagnosticKind::Syntactic,
            format!(
                "expected `graph`, `scalar` or `surface`, found `{}`",
                t.text
            ),
        ))),
        None => Err(ParseError::one(Diagnostic::new(
            Pos { line: 1, column: 1 },
            DiagnosticKind::Syntactic,
            "empty input: expected `graph`, `scalar` or `surface`",
        ))),
    }
}

pub(crate) fn decode(bytes: &[u8]) -> Result<&str, ParseError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let before = &bytes[..e.valid_up_to()];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = before
            .iter()
            .rposition(|&b| b == b'\n')
            .map_or(0, |i| i + 1);
        let column = String::from_utf8_lossy(&before[line_start..])
            .chars()
            .count()
            + 1;
        ParseError::one(Diagnostic::new(
            Pos { line, column },
            DiagnosticKind::Lexical,
            "input is not valid UTF-8",
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub pos: Pos,
    /// Byte offsets into the line.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Line<'a> {
    pub text: &'a str,
    pub number: usize,
    pub tokens: Vec<Token<'a>>,
}

impl Line<'_> {
    pub fn end_pos(&self) -> Pos {
        Pos {
            line: self.number,
            column: self.text.chars().count() + 1,
        }
    }
}

const PUNCT: &[char] = &['[', ']', '(', ')', ','];

fn word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_-'./>+*".contains(c)
}

/// Splits into non-blank lines of tokens: punctuation is a token by itself,
/// anything else runs to the next blank or punctuation.
pub(crate) fn lex(text: &str) -> Result<Vec<Line<'_>>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let body = raw.split_once('#').map_or(raw, |(b, _)| b);
        let mut tokens = Vec::new();
        let mut chars = body.char_indices().peekable();
        let column_of = |byte: usize| body[..byte].chars().count() + 1;
        while let Some(&(start, c)) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
                continue;
            }
            let mut end = start + c.len_utf8();
            chars.next();
            if !PUNCT.contains(&c) {
                if !word_char(c) {
                    return Err(ParseError::one(Diagnostic::new(
                        Pos {
                            line: number,
                            column: column_of(start),
                        },
                        DiagnosticKind::Lexical,
                        format!("unexpected character `{c}`"),
                    )));
                }
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_whitespace() || PUNCT.contains(&d) {
                        break;
                    }
                    if !word_char(d) {
                        return Err(ParseError::one(Diagnostic::new(
                            Pos {
                                line: number,
                                column: column_of(j),
                            },
                            DiagnosticKind::Lexical,
                            format!("unexpected character `{d}`"),
                        )));
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
            }
            tokens.push(Token {
                text: &body[start..end],
                pos: Pos {
                    line: number,
                    column: column_of(start),
                },
                start,
                end,
            });
        }
        if !tokens.is_empty() {
            out.push(Line {
                text: body,
                number,
                tokens,
            });
        }
    }
    Ok(out)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "_-'".contains(c))
}

/// Sequential reader over all tokens of a file.
pub(crate) struct Cursor<'a, 'l> {
    tokens: Vec<&'l Token<'a>>,
    next: usize,
    eof: Pos,
}

impl<'a, 'l> Cursor<'a, 'l> {
    pub fn new(lines: &'l [Line<'a>]) -> Self {
        let eof = lines
            .last()
            .map_or(Pos { line: 1, column: 1 }, |l| l.end_pos());
        Cursor {
            tokens: lines.iter().flat_map(|l| l.tokens.iter()).collect(),
            next: 0,
            eof,
        }
    }

    pub fn peek(&self) -> Option<&'l Token<'a>> {
        self.tokens.get(self.next).copied()
    }

    pub fn pos(&self) -> Pos {
        self.peek().map_or(self.eof, |t| t.pos)
    }

    pub fn next_token(&mut self, what: &str) -> Result<&'l Token<'a>, ParseError> {
        match self.peek() {
            Some(t) => {
                self.next += 1;
                Ok(t)
            }
            None => Err(ParseError::one(Diagnostic::new(
                self.eof,
                DiagnosticKind::Syntactic,
                format!("expected {what}, found end of input"),
            ))),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<&'l Token<'a>, ParseError> {
        let t = self.next_token(&format!("`{kw}`"))?;
        if t.text != kw {
            return Err(unexpected(t, &format!("`{kw}`")));
        }
        Ok(t)
    }

    pub fn identifier(&mut self, what: &str) -> Result<&'l Token<'a>, ParseError> {
        let t = self.next_token(what)?;
        if !is_identifier(t.text) {
            return Err(unexpected(t, what));
        }
        Ok(t)
    }
}

pub(crate) fn unexpected(t: &Token<'_>, expected: &str) -> ParseError {
    ParseError::one(Diagnostic::new(
        t.pos,
        DiagnosticKind::Syntactic,
        format!("expected {expected}, found `{}`", t.text),
    ))
}
