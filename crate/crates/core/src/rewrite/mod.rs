//! 2-cells as rewrite paths and their equality.

pub mod complex;
pub mod engine;
pub mod moves;
pub mod path;
pub mod tietze;

pub use complex::Complex;
pub use engine::Engine;
pub use path::{parse_steps, render_steps, RewriteStep, TwoCellPath};
pub use tietze::Homotopy;

use crate::error::{Error, Result};
use crate::presentation::TheoryPresentation;
use crate::term::Term;
use crate::verdict::{Certificate, Verdict};
use moves::SearchOutcome;

/// States explored per equality query.
pub const DEFAULT_BUDGET: usize = 100_000;

/// Vertices allowed in the complex behind a separating certificate.
const CERTIFICATE_VERTICES: usize = 50_000;

pub fn enumerate_rewrites(p: &TheoryPresentation, t: &Term) -> Result<Vec<RewriteStep>> {
    let e = Engine::new(p)?;
    let t = e.normalize(t)?;
    Ok(e.enumerate_rewrites(&t))
}

pub fn compose_paths(p: &TwoCellPath, q: &TwoCellPath) -> Result<TwoCellPath> {
    p.then(q)
}

pub fn invert_path(p: &TheoryPresentation, path: &TwoCellPath) -> Result<TwoCellPath> {
    Engine::new(p)?.invert(path)
}

pub fn equal_paths(p: &TheoryPresentation, a: &TwoCellPath, b: &TwoCellPath, budget: usize) -> Result<Verdict> {
    Engine::new(p)?.equal(a, b, budget)
}

impl Engine {
    /// The inverse path, with every step re-anchored on the normal forms
    /// it now starts from.
    pub fn invert(&self, path: &TwoCellPath) -> Result<TwoCellPath> {
        let terms = self.trajectory(&path.source, &path.steps)?;
        let mut steps = Vec::with_capacity(path.steps.len());
        for (i, s) in path.steps.iter().enumerate().rev() {
            if !s.inverse && !self.cell(&s.cell)?.invertible {
                return Err(Error::NotInvertible(s.cell.to_string()));
            }
            let back = self
                .trace(&terms[i + 1], &s.cell, !s.inverse, &terms[i], &s.position)
                .ok_or_else(|| Error::Inconsistent(format!("cannot reverse step {s}")))?;
            steps.push(back);
        }
        Ok(TwoCellPath {
            source: terms[terms.len() - 1].clone(),
            target: terms[0].clone(),
            steps,
        })
    }

    /// A path replayed from its source, checked against its recorded target.
    pub fn check_path(&self, path: &TwoCellPath) -> Result<TwoCellPath> {
        let r = self.replay(&path.source, &path.steps)?;
        if r.target != self.normalize(&path.target)? {
            return Err(Error::StepMismatch {
                step: path.render(),
                term: format!("ends in {} not {}", r.target, path.target),
            });
        }
        Ok(r)
    }

    /// Equality of parallel paths modulo interchange, relations and
    /// cancellation.
    pub fn equal(&self, a: &TwoCellPath, b: &TwoCellPath, budget: usize) -> Result<Verdict> {
        let a = self.check_path(a)?;
        let b = self.check_path(b)?;
        if a.source != b.source || a.target != b.target {
            return Err(Error::NotParallel(format!("{a} vs {b}")));
        }
        if a.steps == b.steps {
            return Ok(Verdict::holds("syntactically equal"));
        }
        if self.presentation.indiscrete {
            return Ok(Verdict::holds("indiscrete theory"));
        }
        if let SearchOutcome::Found(moves) = moves::search(self, &a, &b, budget)? {
            return Ok(Verdict::holds_with("homotopy search", moves));
        }
        self.loop_certificate(&a, &b, budget)
    }

    /// Decides equality in the fundamental groupoid of the closed component
    /// containing both paths, when that groupoid is free.
    fn loop_certificate(&self, a: &TwoCellPath, b: &TwoCellPath, budget: usize) -> Result<Verdict> {
        let max_size = self
            .trajectory(&a.source, &a.steps)?
            .iter()
            .chain(self.trajectory(&b.source, &b.steps)?.iter())
            .map(Term::size)
            .max()
            .unwrap_or(0);
        let unknown = |why: &str| Ok(Verdict::unknown(why, budget));
        let cx = Complex::build(self, &[a.source.clone()], max_size, CERTIFICATE_VERTICES, true)?;
        if cx.truncated {
            return unknown("search exhausted; rewrite complex too large");
        }
        let mut h = Homotopy::new(&cx);
        let v = cx.vertex(&a.source).expect("seed vertex");
        let c = h.component[v];
        if h.components[c].iter().any(|&u| cx.open[u]) {
            return unknown("search exhausted; component not closed at this term size");
        }
        h.resolve_all();
        let end = cx.vertex(&a.target);
        let (Some(wa), Some(wb)) = (cx.word_between(self, v, end, &a.steps), cx.word_between(self, v, end, &b.steps)) else {
            return unknown("search exhausted; path leaves the complex");
        };
        let ea = h.element(&wa);
        let eb = h.element(&wb);
        if ea == eb {
            return Ok(Verdict::holds("equal homotopy class in the rewrite complex"));
        }
        if !h.is_free(c) {
            return unknown("search exhausted; fundamental group not free");
        }
        let root = h.components[c][0];
        let gens: Vec<String> = h.generator_names(&cx);
        Ok(Verdict::fails_with(
            "paths lie in different classes of a free fundamental groupoid",
            Certificate::LoopClass {
                basepoint: cx.vertices[root].to_string(),
                generators: gens,
                left: tietze::render_word(&ea),
                right: tietze::render_word(&eb),
            },
        ))
    }
}
