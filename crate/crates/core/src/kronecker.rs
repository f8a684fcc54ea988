//! Kronecker products: the coproduct of two presentations with an
//! interchange cell for every pair of operations, one from each side.

use std::collections::{BTreeMap, BTreeSet};

use crate::colimit::{coproduct, fresh, transport_relations};
use crate::error::{Error, Result};
use crate::homcat::Bound;
use crate::morphism::TheoryMorphism;
use crate::presentation::{
    ConditionInstance, DeltaCell, KroneckerData, Relation, TheoryPresentation, TwoCellGenerator,
};
use crate::rewrite::{Engine, RewriteStep, TwoCellPath, DEFAULT_BUDGET};
use crate::term::{Position, Symbol, Term};
use crate::verdict::{Certificate, Verdict};

/// Steps allowed when expanding an interchange of composite terms.
pub const EXPANSION_LIMIT: usize = 256;

/// `k` with every input replaced by a copy of `h`, and `h` with every
/// input replaced by a copy of `k`. Input `i` of the `j`-th copy of `h`
/// is variable `(j-1)·arity(h) + i` on both sides.
pub fn interchange(h: &Term, k: &Term) -> (Term, Term) {
    let p = h.arity();
    let source = k.plug(&|j| h.relabel(|i| (j - 1) * p + i));
    let target = h.plug(&|i| k.relabel(|j| (j - 1) * p + i));
    (source, target)
}

fn pos(i: usize) -> Position {
    Position(vec![i])
}

/// The interchange of `h` past `k` built from generator cells in
/// `deltas`, always firing the outermost leftmost redex.
pub fn expand(engine: &Engine, deltas: &BTreeSet<Symbol>, h: &Term, k: &Term) -> Result<TwoCellPath> {
    let (s, t) = interchange(h, k);
    let source = engine.normalize(&s)?;
    let target = engine.normalize(&t)?;
    let mut cur = source.clone();
    let mut steps = Vec::new();
    while cur != target {
        if steps.len() >= EXPANSION_LIMIT {
            return Err(Error::BoundExceeded(format!(
                "interchange of {h} and {k} needs more than {EXPANSION_LIMIT} steps"
            )));
        }
        let next = engine
            .forward_steps(&cur)?
            .into_iter()
            .filter(|(st, _)| deltas.contains(&st.cell))
            .min_by(|a, b| a.0.position.0.cmp(&b.0.position.0));
        let Some((step, after)) = next else {
            return Err(Error::Inconsistent(format!("interchange of {h} and {k} is stuck at {cur}")));
        };
        steps.push(step);
        cur = after;
    }
    Ok(TwoCellPath { source, target, steps })
}

fn delta_names(data: &KroneckerData) -> BTreeSet<Symbol> {
    data.deltas.iter().map(|d| d.cell.clone()).collect()
}

fn concat(engine: &Engine, source: &Term, parts: &[&[RewriteStep]]) -> Result<TwoCellPath> {
    let steps: Vec<RewriteStep> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    engine.replay(source, &steps)
}

/// A relation when both sides replay to the same end.
fn instance(engine: &Engine, name: String, source: &Term, lhs: TwoCellPath, rhs: TwoCellPath) -> Option<Relation> {
    let source = engine.normalize(source).ok()?;
    let l = engine.replay(&source, &lhs.steps).ok()?;
    let r = engine.replay(&source, &rhs.steps).ok()?;
    (l.target == r.target).then(|| Relation {
        name: Symbol::from(name.as_str()),
        source,
        lhs: lhs.steps,
        rhs: rhs.steps,
    })
}

pub fn kronecker(p1: &TheoryPresentation, p2: &TheoryPresentation) -> Result<TheoryPresentation> {
    let co = coproduct(p1, p2);
    let mut q = co.presentation.clone();
    q.name = format!("{}_x_{}", p1.name, p2.name);
    let left: Vec<(Symbol, usize)> = p1.signature();
    let right: Vec<(Symbol, usize)> = p2
        .symbols
        .iter()
        .map(|s| (root(co.right.symbol_image(&s.name).expect("injected")), s.arity))
        .collect();
    let right_cells: Vec<Symbol> = p2
        .cells
        .iter()
        .map(|c| co.right.cell_image(&c.name).expect("injected")[0].cell.clone())
        .collect();

    let mut used = q.names();
    let mut deltas = Vec::new();
    for (f, a) in left.iter().filter(|s| s.1 > 0) {
        for (g, b) in right.iter().filter(|s| s.1 > 0) {
            let (s, t) = interchange(&Term::generator(f, *a), &Term::generator(g, *b));
            let name = format!("delta_{f}_{g}");
            let name = if used.insert(name.clone()) { name } else { fresh(&name, &mut used) };
            q.cells.push(TwoCellGenerator::iso(&name, s, t));
            deltas.push(DeltaCell {
                left: f.clone(),
                right: g.clone(),
                cell: Symbol::from(name.as_str()),
            });
        }
    }

    // relations of the factors, re-placed against the new normal forms
    let named = q.relations.clone();
    q.relations.clear();
    let into = |m: &TheoryMorphism| TheoryMorphism {
        target: q.clone(),
        ..m.clone()
    };
    let mut relations = transport_relations(&[(p1, &into(&co.left)), (p2, &into(&co.right))])?;
    for (r, n) in relations.iter_mut().zip(&named) {
        r.name = n.name.clone();
    }

    let engine = Engine::new(&q)?;
    let ds: BTreeSet<Symbol> = deltas.iter().map(|d| d.cell.clone()).collect();
    let delta = |f: &Symbol, g: &Symbol| {
        deltas
            .iter()
            .find(|d| &d.left == f && &d.right == g)
            .map(|d| d.cell.clone())
            .expect("delta exists")
    };
    let mut instances = Vec::new();

    // condition 3: interchange of a composite is the composite of interchanges
    for (f, a) in left.iter().filter(|s| s.1 > 0) {
        for (f2, a2) in left.iter().filter(|s| s.1 > 0) {
            for (g, b) in right.iter().filter(|s| s.1 > 0) {
                for i in 1..=*a {
                    let h = Term::generator(f, *a).substitute(i, &Term::generator(f2, *a2))?;
                    let src = interchange(&h, &Term::generator(g, *b)).0;
                    let Ok(lhs) = expand(&engine, &ds, &h, &Term::generator(g, *b)) else { continue };
                    let first = [RewriteStep::forward(&delta(f, g)), RewriteStep::forward(&delta(f2, g)).at(pos(i - 1))];
                    let Ok(rhs) = concat(&engine, &lhs.source, &[&first]) else { continue };
                    if let Some(r) = instance(&engine, format!("comp_{f}_{i}_{f2}_{g}"), &src, lhs, rhs) {
                        instances.push(ConditionInstance { condition: 3, relation: r });
                    }
                }
            }
        }
    }
    for (g, b) in right.iter().filter(|s| s.1 > 0) {
        for (g2, b2) in right.iter().filter(|s| s.1 > 0) {
            for (f, a) in left.iter().filter(|s| s.1 > 0) {
                for j in 1..=*b {
                    let k = Term::generator(g, *b).substitute(j, &Term::generator(g2, *b2))?;
                    let fx = Term::generator(f, *a);
                    let src = interchange(&fx, &k).0;
                    let Ok(lhs) = expand(&engine, &ds, &fx, &k) else { continue };
                    let first = [RewriteStep::forward(&delta(f, g2)).at(pos(j - 1)), RewriteStep::forward(&delta(f, g))];
                    let Ok(rhs) = concat(&engine, &lhs.source, &[&first]) else { continue };
                    if let Some(r) = instance(&engine, format!("comp_{f}_{g}_{j}_{g2}"), &src, lhs, rhs) {
                        instances.push(ConditionInstance { condition: 3, relation: r });
                    }
                }
            }
        }
    }

    // condition 4: interchange is natural in the 2-cells of either side
    let mut natural = Vec::new();
    for c in &p1.cells {
        let rule = engine.cell(&c.name)?.clone();
        for (g, b) in right.iter().filter(|s| s.1 > 0) {
            let gx = Term::generator(g, *b);
            let src = interchange(&rule.source, &gx).0;
            let at_children: Vec<RewriteStep> = (0..*b).map(|j| RewriteStep::forward(&c.name).at(pos(j))).collect();
            let Ok(before) = expand(&engine, &ds, &rule.source, &gx) else { continue };
            let Ok(after) = expand(&engine, &ds, &rule.target, &gx) else { continue };
            let (Ok(lhs), Ok(rhs)) = (
                concat(&engine, &before.source, &[&at_children, &after.steps]),
                concat(&engine, &before.source, &[&before.steps, &[RewriteStep::forward(&c.name)]]),
            ) else {
                continue;
            };
            if let Some(r) = instance(&engine, format!("nat_{}_{g}", c.name), &src, lhs, rhs) {
                natural.push(r);
            }
        }
    }
    for c in &right_cells {
        let rule = engine.cell(c)?.clone();
        for (f, a) in left.iter().filter(|s| s.1 > 0) {
            let fx = Term::generator(f, *a);
            let src = interchange(&fx, &rule.source).0;
            let at_children: Vec<RewriteStep> = (0..*a).map(|i| RewriteStep::forward(c).at(pos(i))).collect();
            let Ok(before) = expand(&engine, &ds, &fx, &rule.source) else { continue };
            let Ok(after) = expand(&engine, &ds, &fx, &rule.target) else { continue };
            let (Ok(lhs), Ok(rhs)) = (
                concat(&engine, &before.source, &[&[RewriteStep::forward(c)], &after.steps]),
                concat(&engine, &before.source, &[&before.steps, &at_children]),
            ) else {
                continue;
            };
            if let Some(r) = instance(&engine, format!("nat_{f}_{c}"), &src, lhs, rhs) {
                natural.push(r);
            }
        }
    }
    for r in &mut natural {
        let name = r.name.to_string();
        if !used.insert(name.clone()) {
            r.name = Symbol::from(fresh(&name, &mut used).as_str());
        }
        instances.push(ConditionInstance {
            condition: 4,
            relation: r.clone(),
        });
    }
    relations.extend(natural);
    q.relations = relations;
    q.kronecker = Some(KroneckerData {
        left: p1.name.clone(),
        right: p2.name.clone(),
        left_symbols: left.iter().map(|s| s.0.clone()).collect(),
        right_symbols: right.iter().map(|s| s.0.clone()).collect(),
        left_cells: p1.cells.iter().map(|c| c.name.clone()).collect(),
        right_cells,
        deltas,
        instances,
    });
    q.validate()?;
    Ok(q)
}

fn root(t: &Term) -> Symbol {
    match t {
        Term::Node(s, _) => s.clone(),
        Term::Leaf(_) => unreachable!("generators are nodes"),
    }
}

fn data(p: &TheoryPresentation) -> Result<&KroneckerData> {
    p.kronecker
        .as_ref()
        .ok_or_else(|| Error::Hypothesis(format!("{} is not a Kronecker product", p.name)))
}

/// Checks every δ-cell's shape and every recorded condition instance.
pub fn check_delta_coherence(p: &TheoryPresentation, b: &Bound) -> Verdict {
    let Ok(d) = data(p) else {
        return Verdict::unknown(format!("{} carries no Kronecker data", p.name), 0);
    };
    let engine = match Engine::new(p) {
        Ok(e) => e,
        Err(e) => return Verdict::fails_with("presentation does not build", instance_failure("presentation", e.to_string())),
    };
    for delta in &d.deltas {
        let arity = |s: &Symbol| p.symbol(s).map(|x| x.arity);
        let (Some(a), Some(c)) = (arity(&delta.left), arity(&delta.right)) else {
            return Verdict::fails_with("undeclared symbol", instance_failure(&delta.cell, "undeclared symbol".into()));
        };
        let (s, t) = interchange(&Term::generator(&delta.left, a), &Term::generator(&delta.right, c));
        let ok = engine
            .cell(&delta.cell)
            .ok()
            .zip(engine.normalize(&s).ok().zip(engine.normalize(&t).ok()))
            .is_some_and(|(rule, (s, t))| rule.source == s && rule.target == t && rule.invertible);
        if !ok {
            return Verdict::fails_with(
                format!("{} is not the interchange of {} and {}", delta.cell, delta.left, delta.right),
                instance_failure(&delta.cell, "wrong endpoints".into()),
            );
        }
    }
    let mut verdicts = Vec::new();
    for inst in &d.instances {
        let r = &inst.relation;
        let name = format!("condition {} instance {}", inst.condition, r.name);
        if r.lhs.len().max(r.rhs.len()) > b.max_path_length {
            verdicts.push(Verdict::unknown(format!("{name} exceeds the path length bound"), b.max_path_length));
            continue;
        }
        let paths = engine
            .normalize(&r.source)
            .and_then(|s| Ok((engine.replay(&s, &r.lhs)?, engine.replay(&s, &r.rhs)?)));
        let v = match paths.and_then(|(l, r)| engine.equal(&l, &r, DEFAULT_BUDGET)) {
            Ok(v) => v,
            Err(e) => Verdict::fails_with(format!("{name} fails"), instance_failure(&r.name, e.to_string())),
        };
        if v.is_fails() {
            return Verdict::fails_with(format!("{name} fails"), instance_failure(&r.name, v.to_string()));
        }
        verdicts.push(v);
    }
    Verdict::all(verdicts, "interchange cells and condition instances verified")
}

fn instance_failure(name: &str, detail: String) -> Certificate {
    Certificate::Instance {
        name: name.to_string(),
        detail,
    }
}

/// The renaming applied to the right factor inside the coproduct.
fn right_names(p1: &TheoryPresentation, p2: &TheoryPresentation) -> BTreeMap<String, String> {
    let co = coproduct(p1, p2);
    let mut out = BTreeMap::new();
    for (s, t) in &co.right.symbol_map {
        out.insert(s.to_string(), root(t).to_string());
    }
    for (c, p) in &co.right.cell_map {
        out.insert(c.to_string(), p[0].cell.to_string());
    }
    out
}

/// `F1 ⊗ F2`: the coproduct map on generators, with each interchange cell
/// sent to the interchange of the images.
pub fn kronecker_morphism(f1: &TheoryMorphism, f2: &TheoryMorphism) -> Result<TheoryMorphism> {
    let source = kronecker(&f1.source, &f2.source)?;
    let target = kronecker(&f1.target, &f2.target)?;
    let src_names = right_names(&f1.source, &f2.source);
    let tgt_names = right_names(&f1.target, &f2.target);
    let rn = |m: &BTreeMap<String, String>, s: &str| Symbol::from(m.get(s).map_or(s, |x| x.as_str()));
    let to_tgt = |t: &Term| t.rename_symbols(|s| tgt_names.get(s).map(|x| Symbol::from(x.as_str())));

    let mut symbol_map = f1.symbol_map.clone();
    for (s, t) in &f2.symbol_map {
        symbol_map.push((rn(&src_names, s), to_tgt(t)));
    }

    let co = coproduct(&f1.target, &f2.target);
    let inj = |m: &TheoryMorphism| TheoryMorphism {
        target: target.clone(),
        ..m.clone()
    };
    let (left, right) = (inj(&co.left), inj(&co.right));
    let mut cell_map = Vec::new();
    for (f, i, first) in [(f1, &left, true), (f2, &right, false)] {
        let engine = Engine::new(&f.target)?;
        let func = f.functor()?;
        let into = i.functor()?;
        for c in &f.source.cells {
            let from = func.image(&c.source)?;
            let steps = f
                .cell_image(&c.name)
                .ok_or_else(|| Error::InvalidMorphism(format!("cell {} unmapped", c.name)))?;
            let path = into.path(&engine.replay(&from, steps)?)?;
            let name = if first { c.name.clone() } else { rn(&src_names, &c.name) };
            cell_map.push((name, path.steps));
        }
    }
    let engine = Engine::new(&target)?;
    let ds = delta_names(data(&target)?);
    let img1 = f1.functor()?;
    let img2 = f2.functor()?;
    for d in &data(&source)?.deltas {
        let g = src_names
            .iter()
            .find(|(_, v)| v.as_str() == &*d.right)
            .map_or(d.right.to_string(), |(k, _)| k.clone());
        let arity = |p: &TheoryPresentation, s: &str| p.symbol(s).map(|x| x.arity).unwrap_or(0);
        let h = img1.term(&Term::generator(&d.left, arity(&f1.source, &d.left)))?;
        let k = to_tgt(&img2.term(&Term::generator(&g, arity(&f2.source, &g)))?);
        let path = expand(&engine, &ds, &h, &k)?;
        cell_map.push((d.cell.clone(), path.steps));
    }
    Ok(TheoryMorphism {
        name: format!("{}_x_{}", f1.name, f2.name),
        source,
        target,
        symbol_map,
        cell_map,
        lax: f1.lax || f2.lax,
    })
}

/// The isomorphism `P1 ⊗ P2 → P2 ⊗ P1` exchanging the factors and
/// inverting the interchange cells.
pub fn swap(k12: &TheoryPresentation, k21: &TheoryPresentation) -> Result<TheoryMorphism> {
    let (a, b) = (data(k12)?, data(k21)?);
    if a.left != b.right || a.right != b.left {
        return Err(Error::Hypothesis(format!("{} and {} are not swapped factors", k12.name, k21.name)));
    }
    let mut names: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    names.extend(a.left_symbols.iter().cloned().zip(b.right_symbols.iter().cloned()));
    names.extend(a.right_symbols.iter().cloned().zip(b.left_symbols.iter().cloned()));
    let mut cells: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    cells.extend(a.left_cells.iter().cloned().zip(b.right_cells.iter().cloned()));
    cells.extend(a.right_cells.iter().cloned().zip(b.left_cells.iter().cloned()));
    let symbol_map = k12
        .symbols
        .iter()
        .map(|s| {
            let n = names.get(&s.name).cloned().ok_or_else(|| Error::UnknownSymbol(s.name.to_string()))?;
            Ok((s.name.clone(), Term::generator(&n, s.arity)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cell_map = Vec::new();
    for (from, to) in &cells {
        cell_map.push((from.clone(), vec![RewriteStep::forward(to)]));
    }
    for d in &a.deltas {
        let other = b
            .deltas
            .iter()
            .find(|e| names.get(&d.left) == Some(&e.right) && names.get(&d.right) == Some(&e.left))
            .ok_or_else(|| Error::Inconsistent(format!("no partner for {}", d.cell)))?;
        cell_map.push((d.cell.clone(), vec![RewriteStep::new(&other.cell, true, Position::root())]));
    }
    Ok(TheoryMorphism {
        name: format!("swap_{}", k12.name),
        source: k12.clone(),
        target: k21.clone(),
        symbol_map,
        cell_map,
        lax: false,
    })
}
