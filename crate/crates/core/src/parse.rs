//! Readers for terms, `.2th` presentations and `.2map` morphisms.
//!
//! ```text
//! theory: mon_nounit
//! symbols:
//!   tensor/2
//! equations:
//!   plus(plus(1,2),3) -> plus(1,plus(2,3))
//!   tensor(1,2) <-> tensor(2,1)
//! cells:
//!   alpha : tensor(tensor(1,2),3) => tensor(1,tensor(2,3)) iso
//! relations:
//!   pentagon : tensor(tensor(tensor(1,2),3),4) : alpha ; alpha = alpha@1 ; alpha ; alpha@2
//! options:
//!   indiscrete
//! ```
//!
//! `#` starts a comment. Equations written `<->` are permutative.

use crate::error::{Error, Result};
use crate::presentation::{OperationSymbol, Relation, TermEquation, TheoryPresentation, TwoCellGenerator};
use crate::rewrite::path::{is_ident_char, parse_steps, RewriteStep};
use crate::term::{Symbol, Term};

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    offset: usize,
}

impl Cursor {
    fn new(src: &str, line: usize, offset: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            offset,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::syntax(self.line, self.offset + self.pos + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                let n: usize = text.parse().map_err(|_| self.err("bad leaf"))?;
                if n == 0 {
                    return Err(self.err("leaves are numbered from 1"));
                }
                Ok(Term::Leaf(n))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let mut children = Vec::new();
                if self.peek() == Some('(') {
                    self.pos += 1;
                    if self.peek() == Some(')') {
                        return Err(self.err("empty argument list; write nullary symbols bare"));
                    }
                    loop {
                        children.push(self.term()?);
                        match self.peek() {
                            Some(',') => self.pos += 1,
                            Some(')') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.err("expected `,` or `)`")),
                        }
                    }
                }
                Ok(Term::Node(Symbol::from(name.as_str()), children))
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of term")),
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.err(format!("trailing `{c}`"))),
        }
    }
}

/// Parses a term such as `tensor(tensor(1,2),3)`.
pub fn parse_term(s: &str) -> Result<Term> {
    parse_term_at(s, 1, 0)
}

fn parse_term_at(s: &str, line: usize, offset: usize) -> Result<Term> {
    let mut c = Cursor::new(s, line, offset);
    let t = c.term()?;
    c.finish()?;
    Ok(t)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Symbols,
    Equations,
    Cells,
    Relations,
    Options,
    Maps,
}

fn section_of(line: &str) -> Option<Section> {
    Some(match line {
        "symbols:" => Section::Symbols,
        "equations:" => Section::Equations,
        "cells:" => Section::Cells,
        "relations:" => Section::Relations,
        "options:" => Section::Options,
        "maps:" => Section::Maps,
        _ => return None,
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn ident(s: &str, line: usize) -> Result<String> {
    let s = s.trim();
    let ok = s
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && s.chars().all(is_ident_char);
    if ok {
        Ok(s.to_string())
    } else {
        Err(Error::syntax(line, 1, format!("bad identifier `{s}`")))
    }
}

/// Splits on a separator that must occur exactly once.
fn split_once_exact<'a>(s: &'a str, sep: &str, line: usize, what: &str) -> Result<(&'a str, &'a str)> {
    let count = s.matches(sep).count();
    if count != 1 {
        return Err(Error::syntax(
            line,
            1,
            format!("{what} needs exactly one `{sep}`, found {count}"),
        ));
    }
    Ok(s.split_once(sep).expect("counted"))
}

fn column_of(raw: &str, part: &str) -> usize {
    let base = raw.as_ptr() as usize;
    let p = part.as_ptr() as usize;
    p.saturating_sub(base)
}

/// Parses and fully validates a `.2th` source.
pub fn parse_presentation(text: &str) -> Result<TheoryPresentation> {
    let p = parse_presentation_unchecked(text)?;
    p.validate()?;
    crate::rewrite::Engine::new(&p)?;
    Ok(p)
}

/// Parses without replaying relation paths.
pub fn parse_presentation_unchecked(text: &str) -> Result<TheoryPresentation> {
    let mut p = TheoryPresentation::new("anonymous");
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("theory:") {
            p.name = ident(rest, line_no)?;
            continue;
        }
        if let Some(s) = section_of(line) {
            if s == Section::Maps {
                return Err(Error::syntax(line_no, 1, "`maps:` belongs in a morphism file"));
            }
            section = s;
            continue;
        }
        let col = column_of(raw, line);
        match section {
            Section::None | Section::Maps => {
                return Err(Error::syntax(line_no, 1, format!("line outside any section: `{line}`")))
            }
            Section::Symbols => {
                let (name, arity) = split_once_exact(line, "/", line_no, "symbol")?;
                let arity: usize = arity
                    .trim()
                    .parse()
                    .map_err(|_| Error::syntax(line_no, col + 1, format!("bad arity in `{line}`")))?;
                let name = ident(name, line_no)?;
                if p.symbol(&name).is_some() {
                    return Err(Error::DuplicateName(name));
                }
                p.symbols.push(OperationSymbol::user(&name, arity));
            }
            Section::Equations => {
                let (permutative, sep) = if line.contains("<->") {
                    (true, "<->")
                } else {
                    (false, "->")
                };
                let (l, r) = split_once_exact(line, sep, line_no, "equation")?;
                let lhs = parse_term_at(l, line_no, column_of(raw, l))?;
                let rhs = parse_term_at(r, line_no, column_of(raw, r))?;
                check_line_term(&p, &lhs, line_no)?;
                check_line_term(&p, &rhs, line_no)?;
                if lhs.arity() != rhs.arity() {
                    return Err(Error::UnequalArities {
                        lhs: lhs.to_string(),
                        rhs: rhs.to_string(),
                        left: lhs.arity(),
                        right: rhs.arity(),
                    });
                }
                p.equations.push(TermEquation { lhs, rhs, permutative });
            }
            Section::Cells => {
                let (name, rest) = split_once_exact(line, ":", line_no, "cell")?;
                let (s, t) = split_once_exact(rest, "=>", line_no, "cell")?;
                let t = t.trim();
                let (t, invertible) = if let Some(x) = t.strip_suffix("[iso]") {
                    (x, true)
                } else if let Some(x) = t.strip_suffix(" iso") {
                    (x, true)
                } else {
                    (t, false)
                };
                let source = parse_term_at(s, line_no, column_of(raw, s))?;
                let target = parse_term_at(t, line_no, column_of(raw, t))?;
                check_line_term(&p, &source, line_no)?;
                check_line_term(&p, &target, line_no)?;
                p.cells.push(TwoCellGenerator {
                    name: Symbol::from(ident(name, line_no)?.as_str()),
                    source,
                    target,
                    invertible,
                });
            }
            Section::Relations => {
                let parts: Vec<&str> = line.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::syntax(
                        line_no,
                        1,
                        "relation must read `name : source : path = path`",
                    ));
                }
                let name = ident(parts[0], line_no)?;
                let source = parse_term_at(parts[1], line_no, column_of(raw, parts[1]))?;
                check_line_term(&p, &source, line_no)?;
                let (l, r) = split_once_exact(parts[2], "=", line_no, "relation")?;
                let lhs = steps_at(l, line_no)?;
                let rhs = steps_at(r, line_no)?;
                p.relations.push(Relation {
                    name: Symbol::from(name.as_str()),
                    source,
                    lhs,
                    rhs,
                });
            }
            Section::Options => match line {
                "indiscrete" => p.indiscrete = true,
                "experimental" => p.experimental = true,
                other => {
                    return Err(Error::syntax(line_no, col + 1, format!("unknown option `{other}`")))
                }
            },
        }
    }
    Ok(p)
}

fn steps_at(s: &str, line: usize) -> Result<Vec<RewriteStep>> {
    parse_steps(s).map_err(|e| match e {
        Error::Syntax { message, .. } => Error::syntax(line, 1, message),
        other => other,
    })
}

fn check_line_term(p: &TheoryPresentation, t: &Term, line: usize) -> Result<()> {
    p.check_term(t).map_err(|e| match e {
        Error::ArityMismatch { what, expected, found } => Error::ArityMismatch {
            what: format!("{what} on line {line}"),
            expected,
            found,
        },
        other => other,
    })
}

/// Raw contents of a `.2map` file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MorphismSource {
    pub source: String,
    pub target: String,
    pub maps: Vec<(String, Term)>,
    pub cells: Vec<(String, Vec<RewriteStep>)>,
    pub lax: bool,
}

/// Parses a `.2map` file.
///
/// ```text
/// source: stdlib:mon_nounit
/// target: stdlib:smon_nounit
/// maps:
///   tensor -> tensor(1,2)
/// cells:
///   alpha -> id
/// ```
pub fn parse_morphism_source(text: &str) -> Result<MorphismSource> {
    let mut m = MorphismSource::default();
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("source:") {
            m.source = rest.trim().to_string();
            continue;
        }
        if let Some(rest) = line.strip_prefix("target:") {
            m.target = rest.trim().to_string();
            continue;
        }
        if let Some(s) = section_of(line) {
            section = s;
            continue;
        }
        match section {
            Section::Maps => {
                let (name, t) = split_once_exact(line, "->", line_no, "symbol map")?;
                let term = parse_term_at(t, line_no, column_of(raw, t))?;
                m.maps.push((ident(name, line_no)?, term));
            }
            Section::Cells => {
                let (name, path) = split_once_exact(line, "->", line_no, "cell map")?;
                m.cells.push((ident(name, line_no)?, steps_at(path, line_no)?));
            }
            Section::Options if line == "lax" => m.lax = true,
            _ => return Err(Error::syntax(line_no, 1, format!("unexpected line `{line}`"))),
        }
    }
    if m.source.is_empty() || m.target.is_empty() {
        return Err(Error::syntax(0, 0, "morphism needs `source:` and `target:`"));
    }
    Ok(m)
}
