//! Step application on normal forms.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::normalize::Rewriter;
use crate::presentation::TheoryPresentation;
use crate::rewrite::path::{RewriteStep, TwoCellPath};
use crate::term::{Binding, Position, Symbol, Term};

#[derive(Clone, Debug)]
pub struct CellRule {
    pub name: Symbol,
    pub source: Term,
    pub target: Term,
    pub invertible: bool,
}

#[derive(Clone, Debug)]
pub struct RelationRule {
    pub name: Symbol,
    pub source: Term,
    pub target: Term,
    pub lhs: Vec<RewriteStep>,
    pub rhs: Vec<RewriteStep>,
}

/// A commuting square of two independent steps out of `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Square {
    pub v: Term,
    pub v1: Term,
    pub v2: Term,
    pub w: Term,
    pub s1: RewriteStep,
    pub s2: RewriteStep,
    /// `s2` as seen from `v1`.
    pub s2_after: RewriteStep,
    /// `s1` as seen from `v2`.
    pub s1_after: RewriteStep,
}

/// Applies cells and relations of one presentation to normal-form terms.
#[derive(Clone, Debug)]
pub struct Engine {
    pub presentation: TheoryPresentation,
    pub rewriter: Rewriter,
    pub cells: Vec<CellRule>,
    pub relations: Vec<RelationRule>,
    index: HashMap<Symbol, usize>,
}

impl Engine {
    pub fn new(p: &TheoryPresentation) -> Result<Engine> {
        let rewriter = Rewriter::for_presentation(p);
        let mut cells = Vec::with_capacity(p.cells.len());
        let mut index = HashMap::new();
        for (i, c) in p.cells.iter().enumerate() {
            index.insert(c.name.clone(), i);
            cells.push(CellRule {
                name: c.name.clone(),
                source: rewriter.normalize(&c.source)?,
                target: rewriter.normalize(&c.target)?,
                invertible: c.invertible,
            });
        }
        let mut engine = Engine {
            presentation: p.clone(),
            rewriter,
            cells,
            relations: Vec::new(),
            index,
        };
        for r in &p.relations {
            let source = engine.normalize(&r.source)?;
            let l = engine.replay(&source, &r.lhs)?;
            let rr = engine.replay(&source, &r.rhs)?;
            if l.target != rr.target {
                return Err(Error::NotParallel(format!(
                    "relation `{}` ends in `{}` and `{}`",
                    r.name, l.target, rr.target
                )));
            }
            engine.relations.push(RelationRule {
                name: r.name.clone(),
                source,
                target: l.target,
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
            });
        }
        Ok(engine)
    }

    pub fn normalize(&self, t: &Term) -> Result<Term> {
        self.rewriter.normalize(t)
    }

    pub fn has_equations(&self) -> bool {
        !self.rewriter.is_empty()
    }

    pub fn cell(&self, name: &str) -> Result<&CellRule> {
        self.index
            .get(name)
            .map(|&i| &self.cells[i])
            .ok_or_else(|| Error::UnknownCell(name.to_string()))
    }

    pub fn cell_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// The two sides of a step: pattern matched and replacement.
    fn sides<'a>(&'a self, step: &RewriteStep) -> Result<(&'a Term, &'a Term)> {
        let c = self.cell(&step.cell)?;
        if step.inverse {
            if !c.invertible {
                return Err(Error::NotInvertible(step.cell.to_string()));
            }
            Ok((&c.target, &c.source))
        } else {
            Ok((&c.source, &c.target))
        }
    }

    /// Applies a step without normalizing the result.
    pub fn apply_raw(&self, t: &Term, step: &RewriteStep) -> Result<(Term, Binding)> {
        let (from, to) = self.sides(step)?;
        let mismatch = || Error::StepMismatch {
            step: step.to_string(),
            term: t.to_string(),
        };
        let sub = t.subterm(&step.position).ok_or_else(mismatch)?;
        let b = from.match_pattern(sub).ok_or_else(mismatch)?;
        let replaced = t
            .replace(&step.position, to.instantiate(&b))
            .ok_or_else(mismatch)?;
        Ok((replaced, b))
    }

    pub fn apply(&self, t: &Term, step: &RewriteStep) -> Result<Term> {
        let (raw, _) = self.apply_raw(t, step)?;
        self.normalize(&raw)
    }

    pub fn try_apply(&self, t: &Term, step: &RewriteStep) -> Option<Term> {
        self.apply(t, step).ok()
    }

    /// All applicable steps in preorder position order; per position, cells
    /// in declaration order, forward before inverse.
    pub fn enumerate_rewrites(&self, t: &Term) -> Vec<RewriteStep> {
        let mut out = Vec::new();
        for p in t.node_positions() {
            let sub = t.subterm(&p).expect("node position");
            for c in &self.cells {
                if c.source.match_pattern(sub).is_some() {
                    out.push(RewriteStep {
                        cell: c.name.clone(),
                        inverse: false,
                        position: p.clone(),
                    });
                }
                if c.invertible && c.target.match_pattern(sub).is_some() {
                    out.push(RewriteStep {
                        cell: c.name.clone(),
                        inverse: true,
                        position: p.clone(),
                    });
                }
            }
        }
        out
    }

    /// Forward steps with their normalized results.
    pub fn forward_steps(&self, t: &Term) -> Result<Vec<(RewriteStep, Term)>> {
        self.enumerate_rewrites(t)
            .into_iter()
            .filter(|s| !s.inverse)
            .map(|s| {
                let r = self.apply(t, &s)?;
                Ok((s, r))
            })
            .collect()
    }

    /// Steps in either direction, including inverses of non-invertible
    /// cells, used to discover the terms connected to `t`.
    pub fn neighbours(&self, t: &Term) -> Result<Vec<(RewriteStep, Term)>> {
        let mut out = Vec::new();
        for p in t.node_positions() {
            let sub = t.subterm(&p).expect("node position");
            for c in &self.cells {
                for (inverse, from, to) in [(false, &c.source, &c.target), (true, &c.target, &c.source)] {
                    if let Some(b) = from.match_pattern(sub) {
                        let raw = t.replace(&p, to.instantiate(&b)).expect("node position");
                        out.push((
                            RewriteStep {
                                cell: c.name.clone(),
                                inverse,
                                position: p.clone(),
                            },
                            self.normalize(&raw)?,
                        ));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Replays steps from (the normal form of) `source`.
    pub fn replay(&self, source: &Term, steps: &[RewriteStep]) -> Result<TwoCellPath> {
        let start = self.normalize(source)?;
        let mut cur = start.clone();
        for s in steps {
            cur = self.apply(&cur, s)?;
        }
        Ok(TwoCellPath {
            source: start,
            target: cur,
            steps: steps.to_vec(),
        })
    }

    /// Terms visited by a path, starting with its source.
    pub fn trajectory(&self, source: &Term, steps: &[RewriteStep]) -> Result<Vec<Term>> {
        let mut cur = self.normalize(source)?;
        let mut out = vec![cur.clone()];
        for s in steps {
            cur = self.apply(&cur, s)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Finds the step of `cell` in direction `inverse` leading from `from`
    /// to `to`, preferring `preferred`.
    pub fn trace(
        &self,
        from: &Term,
        cell: &Symbol,
        inverse: bool,
        to: &Term,
        preferred: &Position,
    ) -> Option<RewriteStep> {
        let first = RewriteStep {
            cell: cell.clone(),
            inverse,
            position: preferred.clone(),
        };
        if self.try_apply(from, &first).as_ref() == Some(to) {
            return Some(first);
        }
        self.enumerate_rewrites(from)
            .into_iter()
            .filter(|s| &s.cell == cell && s.inverse == inverse)
            .find(|s| self.try_apply(from, s).as_ref() == Some(to))
    }

    /// Replays `steps`, written relative to `local` (a pattern whose leaves
    /// are variables), inside `ambient` at `at` under `binding`. Returns the
    /// steps as seen on the ambient normal forms and the final normal form.
    pub fn transport(
        &self,
        ambient: &Term,
        at: &Position,
        binding: &Binding,
        local: &Term,
        steps: &[RewriteStep],
    ) -> Result<(Vec<RewriteStep>, Term)> {
        let mut local_cur = self.normalize(local)?;
        let start_raw = ambient
            .replace(at, local_cur.instantiate(binding))
            .ok_or_else(|| Error::StepMismatch {
                step: format!("@{at}"),
                term: ambient.to_string(),
            })?;
        let mut cur = self.normalize(&start_raw)?;
        let mut out = Vec::with_capacity(steps.len());
        for s in steps {
            let next_local = self.apply(&local_cur, s)?;
            let raw = ambient
                .replace(at, next_local.instantiate(binding))
                .expect("position checked");
            let next = self.normalize(&raw)?;
            let traced = self
                .trace(&cur, &s.cell, s.inverse, &next, &at.join(&s.position))
                .ok_or_else(|| Error::StepMismatch {
                    step: s.whiskered(at).to_string(),
                    term: cur.to_string(),
                })?;
            out.push(traced);
            local_cur = next_local;
            cur = next;
        }
        Ok((out, cur))
    }

    /// Where position `q` of `t` ends up after `step`, on raw terms.
    /// `None` when `q` lies inside the rewritten part of the redex.
    pub fn track(&self, step: &RewriteStep, q: &Position) -> Result<Option<Position>> {
        let p = &step.position;
        if q.disjoint(p) || (q.is_prefix_of(p) && q != p) {
            return Ok(Some(q.clone()));
        }
        let Some(rel) = q.strip_prefix(p) else {
            return Ok(None);
        };
        let (from, to) = self.sides(step)?;
        // the variable whose subtree contains `rel`
        for leaf in from.leaves() {
            let lp = from.leaf_position(leaf).expect("leaf");
            if let Some(rest) = rel.strip_prefix(&lp) {
                let tp = to.leaf_position(leaf).expect("linear cell");
                return Ok(Some(p.join(&tp).join(&rest)));
            }
        }
        Ok(None)
    }

    /// The square formed by two independent steps out of `v`, if any.
    pub fn interchange(&self, v: &Term, s1: &RewriteStep, s2: &RewriteStep) -> Result<Option<Square>> {
        if s1 == s2 {
            return Ok(None);
        }
        let Some(q2) = self.track(s1, &s2.position)? else {
            return Ok(None);
        };
        let Some(q1) = self.track(s2, &s1.position)? else {
            return Ok(None);
        };
        let (raw1, _) = self.apply_raw(v, s1)?;
        let (raw2, _) = self.apply_raw(v, s2)?;
        let s2_raw = RewriteStep {
            position: q2.clone(),
            ..s2.clone()
        };
        let s1_raw = RewriteStep {
            position: q1.clone(),
            ..s1.clone()
        };
        let Ok((raw12, _)) = self.apply_raw(&raw1, &s2_raw) else {
            return Ok(None);
        };
        let Ok((raw21, _)) = self.apply_raw(&raw2, &s1_raw) else {
            return Ok(None);
        };
        let w = self.normalize(&raw12)?;
        if self.normalize(&raw21)? != w {
            return Ok(None);
        }
        let v1 = self.normalize(&raw1)?;
        let v2 = self.normalize(&raw2)?;
        let s1 = self
            .trace(v, &s1.cell, s1.inverse, &v1, &s1.position)
            .ok_or_else(|| Error::Inconsistent(format!("untraceable step {s1}")))?;
        let s2 = self
            .trace(v, &s2.cell, s2.inverse, &v2, &s2.position)
            .ok_or_else(|| Error::Inconsistent(format!("untraceable step {s2}")))?;
        let Some(s2_after) = self.trace(&v1, &s2.cell, s2.inverse, &w, &q2) else {
            return Ok(None);
        };
        let Some(s1_after) = self.trace(&v2, &s1.cell, s1.inverse, &w, &q1) else {
            return Ok(None);
        };
        Ok(Some(Square {
            v: v.clone(),
            v1,
            v2,
            w,
            s1,
            s2,
            s2_after,
            s1_after,
        }))
    }

    /// Instances of relations whose source matches inside `v`, as pairs of
    /// ambient step sequences (lhs, rhs).
    pub fn relation_instances(&self, v: &Term) -> Vec<(Symbol, Position, Vec<RewriteStep>, Vec<RewriteStep>)> {
        let mut out = Vec::new();
        for p in v.node_positions() {
            let sub = v.subterm(&p).expect("node position");
            for r in &self.relations {
                let Some(b) = r.source.match_pattern(sub) else { continue };
                let l = self.transport(v, &p, &b, &r.source, &r.lhs);
                let rr = self.transport(v, &p, &b, &r.source, &r.rhs);
                if let (Ok((ls, lt)), Ok((rs, rt))) = (l, rr) {
                    if lt == rt {
                        out.push((r.name.clone(), p.clone(), ls, rs));
                    }
                }
            }
        }
        out
    }
}
