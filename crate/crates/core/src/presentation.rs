//! Finite presentations of 2-theories.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rewrite::path::{render_steps, RewriteStep};
use crate::term::{Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    User,
    Base,
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OperationSymbol {
    pub name: Symbol,
    pub arity: usize,
    pub origin: Origin,
}

impl OperationSymbol {
    pub fn user(name: &str, arity: usize) -> Self {
        OperationSymbol {
            name: Symbol::from(name),
            arity,
            origin: Origin::User,
        }
    }
}

/// An oriented 1-cell equation. Permutative equations relate two terms of
/// the same shape and are applied only when the result is smaller in the
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TermEquation {
    pub lhs: Term,
    pub rhs: Term,
    pub permutative: bool,
}

impl TermEquation {
    pub fn oriented(lhs: Term, rhs: Term) -> Self {
        TermEquation {
            lhs,
            rhs,
            permutative: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TwoCellGenerator {
    pub name: Symbol,
    pub source: Term,
    pub target: Term,
    pub invertible: bool,
}

impl TwoCellGenerator {
    pub fn iso(name: &str, source: Term, target: Term) -> Self {
        TwoCellGenerator {
            name: Symbol::from(name),
            source,
            target,
            invertible: true,
        }
    }
}

/// Two parallel paths out of `source`, whose steps are placed relative to
/// the normal form of `source`. Leaves of `source` act as variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Relation {
    pub name: Symbol,
    pub source: Term,
    pub lhs: Vec<RewriteStep>,
    pub rhs: Vec<RewriteStep>,
}

/// Bookkeeping attached to Kronecker products.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KroneckerData {
    pub left: String,
    pub right: String,
    pub left_symbols: Vec<Symbol>,
    pub right_symbols: Vec<Symbol>,
    pub left_cells: Vec<Symbol>,
    pub right_cells: Vec<Symbol>,
    pub deltas: Vec<DeltaCell>,
    pub instances: Vec<ConditionInstance>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DeltaCell {
    pub left: Symbol,
    pub right: Symbol,
    pub cell: Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ConditionInstance {
    pub condition: u8,
    pub relation: Relation,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TheoryPresentation {
    pub name: String,
    pub symbols: Vec<OperationSymbol>,
    pub equations: Vec<TermEquation>,
    pub cells: Vec<TwoCellGenerator>,
    pub relations: Vec<Relation>,
    /// All parallel 2-cells are identified.
    pub indiscrete: bool,
    pub experimental: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kronecker: Option<KroneckerData>,
}

impl TheoryPresentation {
    pub fn new(name: &str) -> Self {
        TheoryPresentation {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn all_invertible(&self) -> bool {
        self.cells.iter().all(|c| c.invertible)
    }

    pub fn symbol(&self, name: &str) -> Option<&OperationSymbol> {
        self.symbols.iter().find(|s| &*s.name == name)
    }

    pub fn cell(&self, name: &str) -> Option<&TwoCellGenerator> {
        self.cells.iter().find(|c| &*c.name == name)
    }

    pub fn signature(&self) -> Vec<(Symbol, usize)> {
        self.symbols
            .iter()
            .map(|s| (s.name.clone(), s.arity))
            .collect()
    }

    /// Every name used by a symbol, cell or relation.
    pub fn names(&self) -> BTreeSet<String> {
        self.symbols
            .iter()
            .map(|s| s.name.to_string())
            .chain(self.cells.iter().map(|c| c.name.to_string()))
            .chain(self.relations.iter().map(|r| r.name.to_string()))
            .collect()
    }

    /// Checks that a term is linear and uses declared symbols at their arity.
    pub fn check_term(&self, t: &Term) -> Result<()> {
        fn walk(p: &TheoryPresentation, t: &Term) -> Result<()> {
            if let Term::Node(s, cs) = t {
                let sym = p
                    .symbol(s)
                    .ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
                if sym.arity != cs.len() {
                    return Err(Error::ArityMismatch {
                        what: format!("symbol `{s}`"),
                        expected: sym.arity,
                        found: cs.len(),
                    });
                }
                for c in cs {
                    walk(p, c)?;
                }
            }
            Ok(())
        }
        walk(self, t)?;
        if !t.is_linear() {
            return Err(Error::NonLinear(t.to_string()));
        }
        Ok(())
    }

    /// Structural validation: names, arities, linearity, cell references.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in &self.symbols {
            if !seen.insert(s.name.to_string()) {
                return Err(Error::DuplicateName(s.name.to_string()));
            }
        }
        for c in &self.cells {
            if !seen.insert(c.name.to_string()) {
                return Err(Error::DuplicateName(c.name.to_string()));
            }
        }
        for r in &self.relations {
            if !seen.insert(r.name.to_string()) {
                return Err(Error::DuplicateName(r.name.to_string()));
            }
        }
        for e in &self.equations {
            self.check_term(&e.lhs)?;
            self.check_term(&e.rhs)?;
            if e.lhs.arity() != e.rhs.arity() {
                return Err(Error::UnequalArities {
                    lhs: e.lhs.to_string(),
                    rhs: e.rhs.to_string(),
                    left: e.lhs.arity(),
                    right: e.rhs.arity(),
                });
            }
            if e.lhs == e.rhs {
                return Err(Error::syntax(0, 0, format!("trivial equation `{}`", e.lhs)));
            }
        }
        for c in &self.cells {
            self.check_term(&c.source)?;
            self.check_term(&c.target)?;
            if c.source.arity() != c.target.arity() {
                return Err(Error::UnequalArities {
                    lhs: c.source.to_string(),
                    rhs: c.target.to_string(),
                    left: c.source.arity(),
                    right: c.target.arity(),
                });
            }
        }
        for r in &self.relations {
            self.check_term(&r.source)?;
            for step in r.lhs.iter().chain(&r.rhs) {
                let cell = self
                    .cell(&step.cell)
                    .ok_or_else(|| Error::UnknownCell(step.cell.to_string()))?;
                if step.inverse && !cell.invertible {
                    return Err(Error::NotInvertible(step.cell.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Renders in the `.2th` source format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theory: {}", self.name);
        if let Some(k) = &self.kronecker {
            let _ = writeln!(out, "# kronecker product of {} and {}", k.left, k.right);
            for d in &k.deltas {
                let _ = writeln!(out, "#   delta {} : {} x {}", d.cell, d.left, d.right);
            }
            for i in &k.instances {
                let _ = writeln!(out, "#   condition {} : {}", i.condition, i.relation.name);
            }
        }
        out.push_str("symbols:\n");
        for s in &self.symbols {
            let _ = writeln!(out, "  {}/{}", s.name, s.arity);
        }
        if !self.equations.is_empty() {
            out.push_str("equations:\n");
            for e in &self.equations {
                let arrow = if e.permutative { "<->" } else { "->" };
                let _ = writeln!(out, "  {} {} {}", e.lhs, arrow, e.rhs);
            }
        }
        if !self.cells.is_empty() {
            out.push_str("cells:\n");
            for c in &self.cells {
                let iso = if c.invertible { " iso" } else { "" };
                let _ = writeln!(out, "  {} : {} => {}{}", c.name, c.source, c.target, iso);
            }
        }
        if !self.relations.is_empty() {
            out.push_str("relations:\n");
            for r in &self.relations {
                let _ = writeln!(
                    out,
                    "  {} : {} : {} = {}",
                    r.name,
                    r.source,
                    render_steps(&r.lhs),
                    render_steps(&r.rhs)
                );
            }
        }
        if self.indiscrete || self.experimental {
            out.push_str("options:\n");
            if self.indiscrete {
                out.push_str("  indiscrete\n");
            }
            if self.experimental {
                out.push_str("  experimental\n");
            }
        }
        out
    }

    /// Same generators and equations, ignoring the name and bookkeeping.
    pub fn same_structure(&self, other: &TheoryPresentation) -> bool {
        let syms = |p: &TheoryPresentation| {
            p.symbols
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect::<BTreeSet<_>>()
        };
        let eqs = |p: &TheoryPresentation| {
            p.equations
                .iter()
                .map(|e| (e.lhs.to_string(), e.rhs.to_string(), e.permutative))
                .collect::<BTreeSet<_>>()
        };
        let cells = |p: &TheoryPresentation| {
            p.cells
                .iter()
                .map(|c| (c.name.clone(), c.source.to_string(), c.target.to_string(), c.invertible))
                .collect::<BTreeSet<_>>()
        };
        let rels = |p: &TheoryPresentation| {
            p.relations
                .iter()
                .map(|r| (r.name.clone(), r.source.to_string(), render_steps(&r.lhs), render_steps(&r.rhs)))
                .collect::<BTreeSet<_>>()
        };
        syms(self) == syms(other)
            && eqs(self) == eqs(other)
            && cells(self) == cells(other)
            && rels(self) == rels(other)
            && self.indiscrete == other.indiscrete
    }
}
