//! The change-of-level functors d, c, U and π₀ between 1-theories and
//! 2-theories, on presentations.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::homcat::Bound;
use crate::normalize::{complete, orient, permutations, Rewriter};
use crate::presentation::{TheoryPresentation, TwoCellGenerator};
use crate::term::{enumerate_planar, Term};

/// Rule budget for completing the equations produced by π₀.
pub const COMPLETION_RULES: usize = 64;

fn require_one_theory(p: &TheoryPresentation, what: &str) -> Result<()> {
    if !p.cells.is_empty() || !p.relations.is_empty() {
        return Err(Error::Hypothesis(format!(
            "{what} expects a 1-theory but {} has 2-cell generators",
            p.name
        )));
    }
    Ok(())
}

/// The discrete 2-theory: same 1-cells, identity 2-cells only.
pub fn apply_d(p: &TheoryPresentation) -> Result<TheoryPresentation> {
    require_one_theory(p, "d")?;
    Ok(TheoryPresentation {
        name: format!("d({})", p.name),
        symbols: p.symbols.clone(),
        equations: p.equations.clone(),
        ..TheoryPresentation::default()
    })
}

/// Every non-identity term of arity `n` within the bound, in normal form.
fn nontrivial_terms(p: &TheoryPresentation, rw: &Rewriter, n: usize, b: &Bound) -> Result<Vec<Term>> {
    let mut out = BTreeSet::new();
    let perms = permutations(n);
    for t in enumerate_planar(&p.signature(), n, b.max_term_size) {
        if t.is_leaf() {
            continue;
        }
        for perm in &perms {
            out.insert(rw.normalize(&t.relabel(|v| perm[v - 1]))?);
        }
    }
    Ok(out.into_iter().filter(|t| !t.is_leaf()).collect())
}

/// The codiscrete 2-theory, materialized up to the bound: one invertible
/// cell from the least term of each arity to every other, and all
/// parallel composites identified.
pub fn apply_c(p: &TheoryPresentation, b: &Bound) -> Result<TheoryPresentation> {
    require_one_theory(p, "c")?;
    let rw = Rewriter::for_presentation(p);
    let mut cells = Vec::new();
    for n in 0..=b.max_arity {
        let terms = nontrivial_terms(p, &rw, n, b)?;
        let Some((first, rest)) = terms.split_first() else { continue };
        for (k, t) in rest.iter().enumerate() {
            cells.push(TwoCellGenerator::iso(&format!("c{n}_{}", k + 1), first.clone(), t.clone()));
        }
    }
    Ok(TheoryPresentation {
        name: format!("c({})", p.name),
        symbols: p.symbols.clone(),
        equations: p.equations.clone(),
        cells,
        indiscrete: true,
        ..TheoryPresentation::default()
    })
}

/// Forgets the 2-cells.
pub fn apply_u(p: &TheoryPresentation) -> TheoryPresentation {
    TheoryPresentation {
        name: format!("U({})", p.name),
        symbols: p.symbols.clone(),
        equations: p.equations.clone(),
        ..TheoryPresentation::default()
    }
}

/// Identifies the two ends of every 2-cell generator and completes.
pub fn apply_pi0(p: &TheoryPresentation) -> Result<TheoryPresentation> {
    let mut equations = p.equations.clone();
    for c in &p.cells {
        let rw = Rewriter::new(&equations);
        let (s, t) = (rw.normalize(&c.source)?, rw.normalize(&c.target)?);
        if let Some(eq) = orient(s, t) {
            equations.push(eq);
        }
    }
    let equations = complete(&equations, COMPLETION_RULES)
        .map_err(|e| Error::Completion(format!("pi0({}): {e}", p.name)))?;
    Ok(TheoryPresentation {
        name: format!("pi0({})", p.name),
        symbols: p.symbols.clone(),
        equations: reduce(equations)?,
        ..TheoryPresentation::default()
    })
}

/// Drops rules whose sides already join under the others.
fn reduce(mut rules: Vec<crate::presentation::TermEquation>) -> Result<Vec<crate::presentation::TermEquation>> {
    let mut i = rules.len();
    while i > 0 {
        i -= 1;
        let mut rest = rules.clone();
        let r = rest.remove(i);
        let rw = Rewriter::new(&rest);
        if rw.normalize(&r.lhs)? == rw.normalize(&r.rhs)? {
            rules = rest;
        }
    }
    Ok(rules)
}
