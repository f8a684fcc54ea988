//! Theory-morphisms: generator maps and their action on terms and paths.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parse::parse_morphism_source;
use crate::presentation::TheoryPresentation;
use crate::rewrite::{render_steps, Engine, RewriteStep, TwoCellPath, DEFAULT_BUDGET};
use crate::term::{Position, Symbol, Term};
use crate::verdict::{Certificate, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoryMorphism {
    pub name: String,
    pub source: TheoryPresentation,
    pub target: TheoryPresentation,
    pub symbol_map: Vec<(Symbol, Term)>,
    /// Each cell's image, written from the normal form of the image of its source.
    pub cell_map: Vec<(Symbol, Vec<RewriteStep>)>,
    /// Equations of the source hold in the target only up to a 2-cell.
    pub lax: bool,
}

impl TheoryMorphism {
    pub fn from_source(text: &str, resolve: &dyn Fn(&str) -> Result<TheoryPresentation>) -> Result<Self> {
        let m = parse_morphism_source(text)?;
        let source = resolve(&m.source)?;
        let target = resolve(&m.target)?;
        let mut f = TheoryMorphism {
            name: format!("{}_to_{}", source.name, target.name),
            source,
            target,
            symbol_map: m.maps.into_iter().map(|(n, t)| (Symbol::from(n.as_str()), t)).collect(),
            cell_map: m.cells.into_iter().map(|(n, p)| (Symbol::from(n.as_str()), p)).collect(),
            lax: m.lax,
        };
        // symbols and cells left out map to the same names in the target
        for s in &f.source.symbols {
            if f.symbol_image(&s.name).is_none() && f.target.symbol(&s.name).is_some() {
                f.symbol_map.push((s.name.clone(), Term::generator(&s.name, s.arity)));
            }
        }
        for c in &f.source.cells {
            if f.cell_image(&c.name).is_none() && f.target.cell(&c.name).is_some() {
                f.cell_map.push((c.name.clone(), vec![RewriteStep::forward(&c.name)]));
            }
        }
        Ok(f)
    }

    pub fn identity(p: &TheoryPresentation) -> Self {
        TheoryMorphism {
            name: format!("id_{}", p.name),
            source: p.clone(),
            target: p.clone(),
            symbol_map: p
                .symbols
                .iter()
                .map(|s| (s.name.clone(), Term::generator(&s.name, s.arity)))
                .collect(),
            cell_map: p
                .cells
                .iter()
                .map(|c| (c.name.clone(), vec![RewriteStep::forward(&c.name)]))
                .collect(),
            lax: false,
        }
    }

    pub fn symbol_image(&self, name: &str) -> Option<&Term> {
        self.symbol_map.iter().find(|(s, _)| &**s == name).map(|(_, t)| t)
    }

    pub fn cell_image(&self, name: &str) -> Option<&Vec<RewriteStep>> {
        self.cell_map.iter().find(|(s, _)| &**s == name).map(|(_, p)| p)
    }

    pub fn functor(&self) -> Result<Functor<'_>> {
        Functor::new(self)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TheoryMorphism) -> Result<TheoryMorphism> {
        if !self.target.same_structure(&next.source) {
            return Err(Error::InvalidMorphism(format!(
                "cannot compose {} with {}: target and source differ",
                self.name, next.name
            )));
        }
        let f = self.functor()?;
        let g = next.functor()?;
        let mut symbol_map = Vec::new();
        for (s, t) in &self.symbol_map {
            symbol_map.push((s.clone(), g.term(t)?));
        }
        let mut cell_map = Vec::new();
        for c in &self.source.cells {
            let from = f.image(&c.source)?;
            let fc = f.cell_path(&c.name)?;
            let path = TwoCellPath {
                source: from.clone(),
                target: f.image(&c.target)?,
                steps: fc,
            };
            let mut steps = g.connector(&g.image(&f.term(&c.source)?)?, &g.image(&from)?)?;
            steps.extend(g.path(&path)?.steps);
            cell_map.push((c.name.clone(), steps));
        }
        Ok(TheoryMorphism {
            name: format!("{};{}", self.name, next.name),
            source: self.source.clone(),
            target: next.target.clone(),
            symbol_map,
            cell_map,
            lax: self.lax || next.lax,
        })
    }

    /// `.2map` text with stdlib-style references to the theory names.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "source: {}", self.source.name);
        let _ = writeln!(out, "target: {}", self.target.name);
        if !self.symbol_map.is_empty() {
            out.push_str("maps:\n");
            for (s, t) in &self.symbol_map {
                let _ = writeln!(out, "  {s} -> {t}");
            }
        }
        if !self.cell_map.is_empty() {
            out.push_str("cells:\n");
            for (c, p) in &self.cell_map {
                let _ = writeln!(out, "  {c} -> {}", render_steps(p));
            }
        }
        if self.lax {
            out.push_str("options:\n  lax\n");
        }
        out
    }

    /// Distinct symbols go to distinct generators of the target.
    pub fn injective_on_generators(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.symbol_map.iter().all(|(_, t)| match t {
            Term::Node(s, cs) if cs.iter().enumerate().all(|(i, c)| *c == Term::Leaf(i + 1)) => {
                seen.insert(s.clone())
            }
            _ => false,
        })
    }
}

/// A morphism together with the engines of both sides.
pub struct Functor<'a> {
    pub morphism: &'a TheoryMorphism,
    pub src: Engine,
    pub tgt: Engine,
    symbols: HashMap<Symbol, Term>,
    forward: HashMap<Symbol, Vec<RewriteStep>>,
    backward: HashMap<Symbol, Vec<RewriteStep>>,
}

/// Vertices explored when joining two terms in a lax morphism.
const CONNECTOR_BUDGET: usize = 20_000;

impl<'a> Functor<'a> {
    pub fn new(m: &'a TheoryMorphism) -> Result<Functor<'a>> {
        let src = Engine::new(&m.source)?;
        let tgt = Engine::new(&m.target)?;
        let symbols: HashMap<Symbol, Term> = m.symbol_map.iter().cloned().collect();
        let mut f = Functor {
            morphism: m,
            src,
            tgt,
            symbols,
            forward: HashMap::new(),
            backward: HashMap::new(),
        };
        for c in f.src.cells.clone() {
            let Some(steps) = m.cell_image(&c.name) else { continue };
            f.forward.insert(c.name.clone(), steps.clone());
            if let Ok(from) = f.term(&c.source) {
                if let Ok(p) = f.tgt.replay(&from, steps) {
                    if let Ok(inv) = f.tgt.invert(&p) {
                        f.backward.insert(c.name.clone(), inv.steps);
                    }
                }
            }
        }
        Ok(f)
    }

    /// The image of a term before normalization.
    pub fn term(&self, t: &Term) -> Result<Term> {
        match t {
            Term::Leaf(i) => Ok(Term::Leaf(*i)),
            Term::Node(s, cs) => {
                let img = self
                    .symbols
                    .get(s)
                    .ok_or_else(|| Error::InvalidMorphism(format!("symbol `{s}` is not mapped")))?;
                let kids = cs.iter().map(|c| self.term(c)).collect::<Result<Vec<_>>>()?;
                Ok(img.plug(&|i| kids[i - 1].clone()))
            }
        }
    }

    /// Normal form of the image of a term.
    pub fn image(&self, t: &Term) -> Result<Term> {
        self.tgt.normalize(&self.term(t)?)
    }

    pub fn cell_path(&self, name: &str) -> Result<Vec<RewriteStep>> {
        self.forward
            .get(name)
            .cloned()
            .ok_or_else(|| Error::InvalidMorphism(format!("cell `{name}` is not mapped")))
    }

    /// Position in the raw image of `t` of the image of the subterm at `p`.
    pub fn position(&self, t: &Term, p: &Position) -> Result<Position> {
        let mut out = Vec::new();
        let mut cur = t;
        for &i in &p.0 {
            let Term::Node(s, cs) = cur else {
                return Err(Error::StepMismatch {
                    step: format!("@{p}"),
                    term: t.to_string(),
                });
            };
            let img = &self.symbols[s];
            let lp = img.leaf_position(i + 1).ok_or_else(|| {
                Error::InvalidMorphism(format!("image of `{s}` drops input {}", i + 1))
            })?;
            out.extend(lp.0);
            cur = &cs[i];
        }
        Ok(Position(out))
    }

    /// Image steps of one step taken at the source normal form `x`, and the
    /// source normal form reached.
    pub fn step(&self, x: &Term, s: &RewriteStep) -> Result<(Vec<RewriteStep>, Term)> {
        let (raw, binding) = self.src.apply_raw(x, s)?;
        let y = self.src.normalize(&raw)?;
        let c = self.src.cell(&s.cell)?;
        let (local, steps) = if s.inverse {
            let back = self
                .backward
                .get(&s.cell)
                .ok_or_else(|| Error::NotInvertible(format!("image of {}", s.cell)))?;
            (self.term(&c.target)?, back.clone())
        } else {
            (self.term(&c.source)?, self.cell_path(&s.cell)?)
        };
        let ambient = self.term(x)?;
        let at = self.position(x, &s.position)?;
        let fb = binding
            .iter()
            .map(|b| b.as_ref().map(|t| self.term(t)).transpose())
            .collect::<Result<Vec<_>>>()?;
        let (mut out, end) = self.tgt.transport(&ambient, &at, &fb, &local, &steps)?;
        let want = self.image(&y)?;
        if end != want {
            if !self.morphism.lax {
                return Err(Error::InvalidMorphism(format!(
                    "image of {s} at {x} ends in {end}, expected {want}"
                )));
            }
            out.extend(self.connector(&end, &want)?);
        }
        Ok((out, y))
    }

    pub fn path(&self, p: &TwoCellPath) -> Result<TwoCellPath> {
        let mut cur = self.src.normalize(&p.source)?;
        let source = self.image(&cur)?;
        let mut steps = Vec::new();
        for s in &p.steps {
            let (img, next) = self.step(&cur, s)?;
            steps.extend(img);
            cur = next;
        }
        Ok(TwoCellPath {
            source,
            target: self.image(&cur)?,
            steps,
        })
    }

    /// A shortest path of invertible steps between two target normal forms.
    pub fn connector(&self, a: &Term, b: &Term) -> Result<Vec<RewriteStep>> {
        connect(&self.tgt, a, b)
    }
}

/// Breadth-first search for a path from `a` to `b` through terms no larger
/// than either end.
pub fn connect(e: &Engine, a: &Term, b: &Term) -> Result<Vec<RewriteStep>> {
    if a == b {
        return Ok(Vec::new());
    }
    let limit = a.size().max(b.size());
    let mut parent: HashMap<Term, Option<(Term, RewriteStep)>> = HashMap::new();
    parent.insert(a.clone(), None);
    let mut queue = VecDeque::from([a.clone()]);
    while let Some(t) = queue.pop_front() {
        if parent.len() > CONNECTOR_BUDGET {
            break;
        }
        for s in e.enumerate_rewrites(&t) {
            let u = e.apply(&t, &s)?;
            if u.size() > limit || parent.contains_key(&u) {
                continue;
            }
            parent.insert(u.clone(), Some((t.clone(), s)));
            if &u == b {
                let mut steps = Vec::new();
                let mut cur = u;
                while let Some(Some((prev, s))) = parent.get(&cur) {
                    steps.push(s.clone());
                    cur = prev.clone();
                }
                steps.reverse();
                return Ok(steps);
            }
            queue.push_back(u);
        }
    }
    Err(Error::NoLift(format!("no 2-cell from {a} to {b}")))
}

fn invalid(what: &str, detail: String) -> Verdict {
    Verdict::fails_with(
        format!("{what} not preserved"),
        Certificate::Instance {
            name: what.to_string(),
            detail,
        },
    )
}

/// Checks that `f` is a theory-morphism: arities, equations, cell
/// endpoints and relations.
pub fn check_morphism(f: &TheoryMorphism) -> Verdict {
    match check_inner(f) {
        Ok(v) => v,
        Err(e) => invalid("morphism data", e.to_string()),
    }
}

fn check_inner(f: &TheoryMorphism) -> Result<Verdict> {
    for s in &f.source.symbols {
        let Some(t) = f.symbol_image(&s.name) else {
            return Ok(invalid(&format!("symbol {}", s.name), "unmapped".into()));
        };
        if t.arity() != s.arity || !t.is_linear() {
            return Ok(invalid(
                &format!("symbol {}", s.name),
                format!("image {t} is not a linear term of arity {}", s.arity),
            ));
        }
        if let Err(e) = f.target.check_term(t) {
            return Ok(invalid(&format!("symbol {}", s.name), e.to_string()));
        }
    }
    let func = f.functor()?;
    for eq in &f.source.equations {
        let l = func.image(&eq.lhs)?;
        let r = func.image(&eq.rhs)?;
        if l != r {
            if f.lax && func.connector(&l, &r).is_ok() {
                continue;
            }
            return Ok(invalid(
                &format!("equation {} -> {}", eq.lhs, eq.rhs),
                format!("images {l} and {r} differ"),
            ));
        }
    }
    for c in &f.source.cells {
        let Some(steps) = f.cell_image(&c.name) else {
            return Ok(invalid(&format!("cell {}", c.name), "unmapped".into()));
        };
        let from = func.image(&c.source)?;
        let to = func.image(&c.target)?;
        match func.tgt.replay(&from, steps) {
            Ok(p) if p.target == to => {}
            Ok(p) => {
                return Ok(invalid(
                    &format!("cell {}", c.name),
                    format!("image ends in {} instead of {to}", p.target),
                ))
            }
            Err(e) => return Ok(invalid(&format!("cell {}", c.name), e.to_string())),
        }
        if c.invertible && !func.backward.contains_key(&c.name) {
            return Ok(invalid(&format!("cell {}", c.name), "image is not invertible".into()));
        }
    }
    let mut verdicts = Vec::new();
    for r in &f.source.relations {
        let src = func.src.normalize(&r.source)?;
        let (lhs, rhs) = (func.src.replay(&src, &r.lhs)?, func.src.replay(&src, &r.rhs)?);
        // an image instance need not be a single step on target normal forms
        let (lhs, rhs) = match (func.path(&lhs), func.path(&rhs)) {
            (Ok(l), Ok(r)) => (l, r),
            (Err(e), _) | (_, Err(e)) => {
                verdicts.push(Verdict::unknown(format!("relation {}: image not replayable: {e}", r.name), 0));
                continue;
            }
        };
        let v = func.tgt.equal(&lhs, &rhs, DEFAULT_BUDGET)?;
        if v.is_fails() {
            return Ok(invalid(&format!("relation {}", r.name), v.to_string()));
        }
        verdicts.push(v);
    }
    Ok(Verdict::all(verdicts, "generators, equations and relations preserved"))
}
