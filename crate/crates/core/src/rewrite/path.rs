use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::term::{Position, Symbol, Term};

/// One whiskered generator application.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RewriteStep {
    pub cell: Symbol,
    pub inverse: bool,
    pub position: Position,
}

impl RewriteStep {
    pub fn new(cell: &str, inverse: bool, position: Position) -> Self {
        RewriteStep {
            cell: Symbol::from(cell),
            inverse,
            position,
        }
    }

    pub fn forward(cell: &str) -> Self {
        Self::new(cell, false, Position::root())
    }

    pub fn at(mut self, position: Position) -> Self {
        self.position = position;
        self
    }

    pub fn inverted(&self) -> Self {
        RewriteStep {
            inverse: !self.inverse,
            ..self.clone()
        }
    }

    /// The same step moved under `prefix`.
    pub fn whiskered(&self, prefix: &Position) -> Self {
        RewriteStep {
            position: prefix.join(&self.position),
            ..self.clone()
        }
    }

    /// Parses `name`, `name~`, `name@1.2` or `name~@1.2`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, pos) = match s.split_once('@') {
            Some((h, p)) => (h, Position::parse(p.trim())?),
            None => (s, Position::root()),
        };
        let head = head.trim();
        let (name, inverse) = match head.strip_suffix('~') {
            Some(n) => (n.trim(), true),
            None => (head, false),
        };
        if name.is_empty() || !name.chars().all(is_ident_char) {
            return Err(Error::syntax(0, 0, format!("bad step `{s}`")));
        }
        Ok(RewriteStep::new(name, inverse, pos))
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cell)?;
        if self.inverse {
            f.write_str("~")?;
        }
        if !self.position.is_root() {
            write!(f, "@{}", self.position)?;
        }
        Ok(())
    }
}

impl Serialize for RewriteStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses `id` or `step ; step ; ...`.
pub fn parse_steps(s: &str) -> Result<Vec<RewriteStep>> {
    let s = s.trim();
    if s == "id" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(RewriteStep::parse).collect()
}

pub fn render_steps(steps: &[RewriteStep]) -> String {
    if steps.is_empty() {
        return "id".to_string();
    }
    steps
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ; ")
}

/// A 2-cell: a composable sequence of steps between two normal forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TwoCellPath {
    pub source: Term,
    pub target: Term,
    pub steps: Vec<RewriteStep>,
}

impl TwoCellPath {
    pub fn identity(t: Term) -> Self {
        TwoCellPath {
            source: t.clone(),
            target: t,
            steps: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.source.arity()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Vertical composition: `self` then `next`.
    pub fn then(&self, next: &TwoCellPath) -> Result<TwoCellPath> {
        if self.target != next.source {
            return Err(Error::NotComposable(
                self.target.to_string(),
                next.source.to_string(),
            ));
        }
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().cloned());
        Ok(TwoCellPath {
            source: self.source.clone(),
            target: next.target.clone(),
            steps,
        })
    }

    /// Reversal without an invertibility check.
    pub fn reversed(&self) -> TwoCellPath {
        TwoCellPath {
            source: self.target.clone(),
            target: self.source.clone(),
            steps: self.steps.iter().rev().map(RewriteStep::inverted).collect(),
        }
    }

    pub fn render(&self) -> String {
        render_steps(&self.steps)
    }
}

impl fmt::Display for TwoCellPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} => {}", self.render(), self.source, self.target)
    }
}
