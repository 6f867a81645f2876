use std::fmt::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{lex, unexpected, Diagnostic, DiagnosticKind, Line, ParseError, Pos, Token};
use crate::scalar::{fmt_rational, parse_rational, Refinement, ScalarError, Symbol, SymbolTable};
use crate::surface::{Disk, Summand, SurfaceError, SurfaceModel, Tube, TubeKind};

/// Tokens of one line, consumed left to right.
struct LineCursor<'a, 'l> {
    line: &'l Line<'a>,
    next: usize,
}

impl<'a, 'l> LineCursor<'a, 'l> {
    fn next_token(&mut self, what: &str) -> Result<&'l Token<'a>, ParseError> {
        let t = self.line.tokens.get(self.next).ok_or_else(|| {
            ParseError::one(Diagnostic::new(
                self.line.end_pos(),
                DiagnosticKind::Syntactic,
                format!("expected {what}, found end of line"),
            ))
        })?;
        self.next += 1;
        Ok(t)
    }

    fn keyword(&mut self, kw: &str) -> Result<&'l Token<'a>, ParseError> {
        let t = self.next_token(&format!("`{kw}`"))?;
        if t.text != kw {
            return Err(unexpected(t, &format!("`{kw}`")));
        }
        Ok(t)
    }

    fn identifier(&mut self, what: &str) -> Result<&'l Token<'a>, ParseError> {
        let t = self.next_token(what)?;
        if !super::is_identifier(t.text) {
            return Err(unexpected(t, what));
        }
        Ok(t)
    }

    fn rational(&mut self, what: &str) -> Result<BigRational, ParseError> {
        let t = self.next_token(what)?;
        parse_rational(t.text).map_err(|_| unexpected(t, what))
    }

    /// Raw text up to (not including) the next of `stops`, which is consumed.
    fn raw_until(
        &mut self,
        stops: &[&str],
        what: &str,
    ) -> Result<(&'a str, Pos, &'l Token<'a>), ParseError> {
        let first = self.next;
        loop {
            let t = self.next_token(what)?;
            if stops.contains(&t.text) {
                if self.next - 1 == first {
                    return Err(unexpected(t, what));
                }
                let a = &self.line.tokens[first];
                let b = &self.line.tokens[self.next - 2];
                return Ok((&self.line.text[a.start..b.end], a.pos, t));
            }
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.line.tokens.get(self.next) {
            Some(t) => Err(unexpected(t, "end of line")),
            None => Ok(()),
        }
    }
}

struct SummandDecl<'a> {
    id: String,
    pos: Pos,
    periods: [(&'a str, Pos); 2],
}

struct TubeDecl {
    tube: Tube,
    pos: Pos,
    ends: [Pos; 2],
}

/// Parses a surface file:
///
/// ```text
/// scalar lambda irrational approx [1.414, 1.415]
/// surface example1
///   summand T1 periods (1, 0)
///   summand T2 periods (lambda, mu)
///   tube t1 T1 T2 kind A disks small ribbon(3)
/// end
/// ```
///
/// A `scalar` line may end in `refine root [c0, c1, ...]` (integer
/// polynomial, constant term first) or `refine digits <decimal>`.
pub fn parse_surface(text: &str) -> Result<SurfaceModel, ParseError> {
    let lines = lex(text)?;
    if lines.is_empty() {
        return Err(ParseError::one(Diagnostic::new(
            Pos { line: 1, column: 1 },
            DiagnosticKind::Syntactic,
            "empty input: expected `scalar` or `surface`",
        )));
    }
    let mut it = lines.iter().peekable();

    let mut symbols = Vec::new();
    let mut symbol_pos = Vec::new();
    while let Some(line) = it.next_if(|l| l.tokens[0].text == "scalar") {
        let mut c = LineCursor { line, next: 1 };
        let name = c.identifier("a symbol name")?;
        c.keyword("irrational")?;
        c.keyword("approx")?;
        c.keyword("[")?;
        let lo = c.rational("a decimal lower bound")?;
        c.keyword(",")?;
        let hi = c.rational("a decimal upper bound")?;
        c.keyword("]")?;
        let mut refine = Refinement::None;
        if c.line
            .tokens
            .get(c.next)
            .is_some_and(|t| t.text == "refine")
        {
            c.next += 1;
            let how = c.next_token("`root` or `digits`")?;
            refine = match how.text {
                "root" => {
                    c.keyword("[")?;
                    let mut coeffs = Vec::new();
                    loop {
                        let t = c.next_token("an integer coefficient")?;
                        coeffs.push(
                            t.text
                                .parse::<BigInt>()
                                .map_err(|_| unexpected(t, "an integer coefficient"))?,
                        );
                        let sep = c.next_token("`,` or `]`")?;
                        match sep.text {
                            "," => continue,
                            "]" => break,
                            _ => return Err(unexpected(sep, "`,` or `]`")),
                        }
                    }
                    Refinement::Root(coeffs)
                }
                "digits" => {
                    let t = c.next_token("a decimal expansion")?;
                    parse_rational(t.text).map_err(|_| unexpected(t, "a decimal expansion"))?;
                    Refinement::Digits(t.text.to_string())
                }
                _ => return Err(unexpected(how, "`root` or `digits`")),
            };
        }
        c.finish()?;
        symbols.push(Symbol::new(name.text, lo, hi).with_refinement(refine));
        symbol_pos.push(line.tokens[0].pos);
    }
    let table = SymbolTable::new(symbols.clone()).map_err(|e| {
        let name = match &e {
            ScalarError::DuplicateSymbol(n) | ScalarError::EmptyInterval(n) => n.clone(),
            ScalarError::BadRefinement { name, .. } => name.clone(),
            _ => String::new(),
        };
        // Point at the last declaration of the offending name.
        let pos = symbols
            .iter()
            .zip(&symbol_pos)
            .rev()
            .find(|(s, _)| s.name == name)
            .map_or(symbol_pos[0], |(_, p)| *p);
        ParseError::one(Diagnostic::new(
            pos,
            DiagnosticKind::Semantic,
            e.to_string(),
        ))
    })?;

    let Some(header) = it.next() else {
        let last = lines.last().expect("non-empty");
        return Err(ParseError::one(Diagnostic::new(
            last.end_pos(),
            DiagnosticKind::Syntactic,
            "expected `surface`, found end of input",
        )));
    };
    let mut c = LineCursor {
        line: header,
        next: 0,
    };
    let surface_pos = c.keyword("surface")?.pos;
    let name = c.identifier("a surface name")?.text.to_string();
    c.finish()?;

    let mut summands: Vec<SummandDecl<'_>> = Vec::new();
    let mut tubes: Vec<TubeDecl> = Vec::new();
    let mut closed = false;
    for line in it.by_ref() {
        let mut c = LineCursor { line, next: 0 };
        let t = c.next_token("a statement")?;
        match t.text {
            "summand" => {
                let id = c.identifier("a summand id")?;
                c.keyword("periods")?;
                c.keyword("(")?;
                let (p, ppos, _) = c.raw_until(&[","], "a scalar followed by `,`")?;
                let (q, qpos, _) = c.raw_until(&[")"], "a scalar followed by `)`")?;
                c.finish()?;
                summands.push(SummandDecl {
                    id: id.text.to_string(),
                    pos: t.pos,
                    periods: [(p, ppos), (q, qpos)],
                });
            }
            "tube" => {
                let id = c.identifier("a tube id")?;
                let l = c.identifier("a summand id")?;
                let r = c.identifier("a summand id")?;
                c.keyword("kind")?;
                let k = c.next_token("A, B or C")?;
                let kind = match k.text {
                    "A" => TubeKind::A,
                    "B" => TubeKind::B,
                    "C" => TubeKind::C,
                    _ => return Err(unexpected(k, "A, B or C")),
                };
                c.keyword("disks")?;
                let left_disk = disk(&mut c)?;
                let right_disk = disk(&mut c)?;
                c.finish()?;
                tubes.push(TubeDecl {
                    tube: Tube {
                        id: id.text.to_string(),
                        left: l.text.to_string(),
                        right: r.text.to_string(),
                        kind,
                        left_disk,
                        right_disk,
                    },
                    pos: t.pos,
                    ends: [l.pos, r.pos],
                });
            }
            "end" => {
                c.finish()?;
                closed = true;
                break;
            }
            _ => return Err(unexpected(t, "`summand`, `tube` or `end`")),
        }
    }
    if !closed {
        let last = lines.last().expect("non-empty");
        return Err(ParseError::one(Diagnostic::new(
            last.end_pos(),
            DiagnosticKind::Syntactic,
            "expected `end`, found end of input",
        )));
    }
    if let Some(extra) = it.next() {
        return Err(unexpected(&extra.tokens[0], "end of input after `end`"));
    }

    let mut built = Vec::new();
    for s in &summands {
        let mut parts = Vec::new();
        for (text, pos) in s.periods {
            let v = table.parse_scalar(text).map_err(|e| {
                ParseError::one(Diagnostic::new(
                    pos,
                    DiagnosticKind::Semantic,
                    e.to_string(),
                ))
            })?;
            parts.push(v);
        }
        let q = parts.pop().expect("two periods");
        let p = parts.pop().expect("two periods");
        built.push(Summand {
            id: s.id.clone(),
            p,
            q,
        });
    }
    let model = SurfaceModel::new(
        name,
        Arc::clone(&table),
        built,
        tubes.iter().map(|t| t.tube.clone()).collect(),
    );
    model.map_err(|e| {
        let summand_pos = |id: &str| summands.iter().find(|s| s.id == id).map(|s| s.pos);
        let pos = match &e {
            SurfaceError::ZeroForm(id) => summand_pos(id),
            SurfaceError::DuplicateId(id) => {
                let decls: Vec<Pos> = summands
                    .iter()
                    .filter(|s| &s.id == id)
                    .map(|s| s.pos)
                    .chain(tubes.iter().filter(|t| &t.tube.id == id).map(|t| t.pos))
                    .collect();
                decls.get(1).copied()
            }
            SurfaceError::UnknownSummand(id) => tubes.iter().find_map(|t| {
                [(&t.tube.left, t.ends[0]), (&t.tube.right, t.ends[1])]
                    .into_iter()
                    .find(|(s, _)| *s == id)
                    .map(|(_, p)| p)
            }),
            SurfaceError::Cycle(id) => tubes.iter().find(|t| &t.tube.id == id).map(|t| t.pos),
            _ => None,
        };
        ParseError::one(Diagnostic::new(
            pos.unwrap_or(surface_pos),
            DiagnosticKind::Semantic,
            e.to_string(),
        ))
    })
}

fn disk(c: &mut LineCursor<'_, '_>) -> Result<Disk, ParseError> {
    let t = c.next_token("`small` or `ribbon(<w>)`")?;
    match t.text {
        "small" => Ok(Disk::Small),
        "ribbon" => {
            c.keyword("(")?;
            let w = c.next_token("a winding")?;
            let n: u32 = w
                .text
                .parse()
                .map_err(|_| unexpected(w, "a natural number"))?;
            c.keyword(")")?;
            if n == 0 {
                return Err(ParseError::one(Diagnostic::new(
                    w.pos,
                    DiagnosticKind::Semantic,
                    "ribbon disks need winding >= 1",
                )));
            }
            Ok(Disk::Ribbon(n))
        }
        _ => Err(unexpected(t, "`small` or `ribbon(<w>)`")),
    }
}

/// Exact decimal when the denominator divides a power of ten, else `p/q`.
fn fmt_decimal(q: &BigRational) -> String {
    let ten = BigInt::from(10);
    let mut scale = BigInt::one();
    let mut digits = 0usize;
    let mut d = q.denom().clone();
    for f in [2, 5] {
        let f = BigInt::from(f);
        while d.is_multiple_of(&f) {
            d /= &f;
        }
    }
    if !d.is_one() {
        return fmt_rational(q);
    }
    while !scale.is_multiple_of(q.denom()) {
        scale *= &ten;
        digits += 1;
    }
    if digits == 0 {
        return q.numer().to_string();
    }
    let n = q.numer() * (&scale / q.denom());
    let sign = if n.is_negative() { "-" } else { "" };
    let s = n.abs().to_string();
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    format!("{sign}{int}.{frac}")
}

/// Canonical text for `m`; [`parse_surface`] reads it back unchanged.
pub fn serialize_surface(m: &SurfaceModel) -> String {
    let mut out = String::new();
    for s in m.table().symbols() {
        write!(
            out,
            "scalar {} irrational approx [{}, {}]",
            s.name,
            fmt_decimal(&s.lo),
            fmt_decimal(&s.hi)
        )
        .unwrap();
        match &s.refine {
            Refinement::None => {}
            Refinement::Digits(d) => write!(out, " refine digits {d}").unwrap(),
            Refinement::Root(c) => {
                let c: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(out, " refine root [{}]", c.join(", ")).unwrap();
            }
        }
        out.push('\n');
    }
    writeln!(out, "surface {}", m.name()).unwrap();
    for s in m.summands() {
        writeln!(out, "  summand {} periods ({}, {})", s.id, s.p, s.q).unwrap();
    }
    for t in m.tubes() {
        writeln!(
            out,
            "  tube {} {} {} kind {} disks {} {}",
            t.id, t.left, t.right, t.kind, t.left_disk, t.right_disk
        )
        .unwrap();
    }
    out.push_str("end\n");
    out
}
