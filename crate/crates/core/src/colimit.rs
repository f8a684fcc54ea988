//! Coproducts and pushouts of presentations, and the initial and terminal
//! theories.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::levels::COMPLETION_RULES;
use crate::morphism::TheoryMorphism;
use crate::normalize::{complete, orient, Rewriter};
use crate::presentation::{OperationSymbol, Relation, TermEquation, TheoryPresentation, TwoCellGenerator};
use crate::rewrite::RewriteStep;
use crate::term::{Symbol, Term};

/// A presentation with its two injections.
#[derive(Clone, Debug)]
pub struct Cospan {
    pub presentation: TheoryPresentation,
    pub left: TheoryMorphism,
    pub right: TheoryMorphism,
}

/// No operations: every hom-category is a point.
pub fn initial() -> TheoryPresentation {
    TheoryPresentation::new("fin")
}

/// Commutative monoids, discretely: exactly one term of each arity.
pub fn terminal() -> Result<TheoryPresentation> {
    let t = |s: &str| crate::parse::parse_term(s);
    let mut p = TheoryPresentation::new("terminal");
    p.symbols = vec![OperationSymbol::user("e", 0), OperationSymbol::user("m", 2)];
    let raw = vec![
        TermEquation::oriented(t("m(m(1,2),3)")?, t("m(1,m(2,3))")?),
        TermEquation::oriented(t("m(e,1)")?, t("1")?),
        TermEquation::oriented(t("m(1,e)")?, t("1")?),
        TermEquation {
            lhs: t("m(2,1)")?,
            rhs: t("m(1,2)")?,
            permutative: true,
        },
    ];
    p.equations = complete(&raw, COMPLETION_RULES)?;
    Ok(p)
}

/// `p` with symbols and cells renamed.
pub fn rename(p: &TheoryPresentation, names: &BTreeMap<String, String>) -> TheoryPresentation {
    let get = |s: &str| names.get(s).map(|n| Symbol::from(n.as_str()));
    let term = |t: &Term| t.rename_symbols(get);
    let name = |s: &Symbol| get(s).unwrap_or_else(|| s.clone());
    let steps = |ps: &[RewriteStep]| {
        ps.iter()
            .map(|s| RewriteStep {
                cell: name(&s.cell),
                ..s.clone()
            })
            .collect::<Vec<_>>()
    };
    TheoryPresentation {
        name: p.name.clone(),
        symbols: p
            .symbols
            .iter()
            .map(|s| OperationSymbol {
                name: name(&s.name),
                ..s.clone()
            })
            .collect(),
        equations: p
            .equations
            .iter()
            .map(|e| TermEquation {
                lhs: term(&e.lhs),
                rhs: term(&e.rhs),
                permutative: e.permutative,
            })
            .collect(),
        cells: p
            .cells
            .iter()
            .map(|c| TwoCellGenerator {
                name: name(&c.name),
                source: term(&c.source),
                target: term(&c.target),
                invertible: c.invertible,
            })
            .collect(),
        relations: p
            .relations
            .iter()
            .map(|r| Relation {
                name: name(&r.name),
                source: term(&r.source),
                lhs: steps(&r.lhs),
                rhs: steps(&r.rhs),
            })
            .collect(),
        indiscrete: p.indiscrete,
        experimental: p.experimental,
        kronecker: None,
    }
}

/// The relations of each presentation carried along its map, with steps
/// re-placed against the target's normal forms.
pub fn transport_relations(parts: &[(&TheoryPresentation, &TheoryMorphism)]) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for (p, i) in parts {
        let engine = crate::rewrite::Engine::new(p)?;
        let functor = i.functor()?;
        for r in &p.relations {
            let source = engine.normalize(&r.source)?;
            let lhs = functor.path(&engine.replay(&source, &r.lhs)?)?;
            let rhs = functor.path(&engine.replay(&source, &r.rhs)?)?;
            out.push(Relation {
                name: r.name.clone(),
                source: lhs.source,
                lhs: lhs.steps,
                rhs: rhs.steps,
            });
        }
    }
    Ok(out)
}

pub(crate) fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut k = 2;
    loop {
        let n = format!("{base}_{k}");
        if used.insert(n.clone()) {
            return n;
        }
        k += 1;
    }
}

/// The map sending generators of `p` to the generators of `target` with
/// the renamed names.
fn injection(p: &TheoryPresentation, target: &TheoryPresentation, names: &BTreeMap<String, String>) -> TheoryMorphism {
    let new = |s: &Symbol| names.get(&**s).cloned().unwrap_or_else(|| s.to_string());
    TheoryMorphism {
        name: format!("{}_into_{}", p.name, target.name),
        source: p.clone(),
        target: target.clone(),
        symbol_map: p
            .symbols
            .iter()
            .map(|s| (s.name.clone(), Term::generator(&new(&s.name), s.arity)))
            .collect(),
        cell_map: p
            .cells
            .iter()
            .map(|c| (c.name.clone(), vec![RewriteStep::forward(&new(&c.name))]))
            .collect(),
        lax: false,
    }
}

/// Disjoint union over the shared base; clashing names on the right get a
/// numeric suffix.
pub fn coproduct(p1: &TheoryPresentation, p2: &TheoryPresentation) -> Cospan {
    let mut used: BTreeSet<String> = p1.names().into_iter().chain(p2.names()).collect();
    let left_names = p1.names();
    let mut names = BTreeMap::new();
    for n in p2.names() {
        if left_names.contains(&n) {
            names.insert(n.clone(), fresh(&n, &mut used));
        }
    }
    let r = rename(p2, &names);
    let presentation = TheoryPresentation {
        name: format!("{}+{}", p1.name, p2.name),
        symbols: p1.symbols.iter().chain(&r.symbols).cloned().collect(),
        equations: p1.equations.iter().chain(&r.equations).cloned().collect(),
        cells: p1.cells.iter().chain(&r.cells).cloned().collect(),
        relations: p1.relations.iter().chain(&r.relations).cloned().collect(),
        indiscrete: p1.indiscrete && p2.indiscrete,
        experimental: p1.experimental || p2.experimental,
        kronecker: None,
    };
    Cospan {
        left: injection(p1, &presentation, &BTreeMap::new()),
        right: injection(p2, &presentation, &names),
        presentation,
    }
}

/// The coproduct of the targets with `F(x) = G(x)` imposed for every
/// symbol and cell `x` of the common source.
pub fn pushout(f: &TheoryMorphism, g: &TheoryMorphism) -> Result<Cospan> {
    if !f.source.same_structure(&g.source) {
        return Err(Error::Hypothesis(format!(
            "{} and {} have different sources",
            f.name, g.name
        )));
    }
    let base = coproduct(&f.target, &g.target);
    let mut q = base.presentation.clone();
    q.name = format!("{}+_{}{}", f.target.name, f.source.name, g.target.name);
    let via = |m: &TheoryMorphism, i: &TheoryMorphism, x: &Term| -> Result<Term> {
        let fx = m.functor()?.term(x)?;
        i.functor()?.term(&fx)
    };
    for s in &f.source.symbols {
        let x = Term::generator(&s.name, s.arity);
        let rw = Rewriter::new(&q.equations);
        let a = rw.normalize(&via(f, &base.left, &x)?)?;
        let b = rw.normalize(&via(g, &base.right, &x)?)?;
        if let Some(eq) = orient(a, b) {
            q.equations.push(eq);
        }
    }
    q.equations = complete(&q.equations, COMPLETION_RULES)?;
    // relations are re-placed against the new normal forms below
    q.relations.clear();
    let left = TheoryMorphism {
        target: q.clone(),
        ..base.left.clone()
    };
    let right = TheoryMorphism {
        target: q.clone(),
        ..base.right.clone()
    };
    let fl = f.then(&left)?;
    let gr = g.then(&right)?;
    let fq = fl.functor()?;
    let mut relations = transport_relations(&[(&f.target, &left), (&g.target, &right)])?;
    let renamed = base.presentation.relations.clone();
    for (r, named) in relations.iter_mut().zip(&renamed) {
        r.name = named.name.clone();
    }
    let mut used = base.presentation.names();
    for c in &f.source.cells {
        let lhs = fl.cell_image(&c.name).cloned().unwrap_or_default();
        let rhs = gr.cell_image(&c.name).cloned().unwrap_or_default();
        if lhs == rhs {
            continue;
        }
        q.relations.push(Relation {
            name: Symbol::from(fresh(&format!("glue_{}", c.name), &mut used).as_str()),
            source: fq.image(&c.source)?,
            lhs,
            rhs,
        });
    }
    let glue = std::mem::take(&mut q.relations);
    q.relations = relations.into_iter().chain(glue).collect();
    q.validate()?;
    Ok(Cospan {
        left: TheoryMorphism {
            target: q.clone(),
            ..base.left
        },
        right: TheoryMorphism {
            target: q.clone(),
            ..base.right
        },
        presentation: q,
    })
}
