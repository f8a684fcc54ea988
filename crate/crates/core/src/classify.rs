//! Weak equivalences, fibrations and cofibrations, decided per arity on
//! truncated hom-categories.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::category::{ArrowId, FiniteCategory, Functor, Structure};
use crate::cells::CellMap;
use crate::equivalence::witness_for;
use crate::error::{Error, Result};
use crate::homcat::{hom_category, restrict, Bound};
use crate::morphism::TheoryMorphism;
use crate::rewrite::TwoCellPath;
use crate::term::Term;
use crate::verdict::{Certificate, Verdict};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ArityDetail {
    pub source_objects: usize,
    pub target_objects: usize,
    pub weak_equivalence: Verdict,
    pub fibration: Verdict,
    pub cofibration: Verdict,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassificationReport {
    pub morphism: String,
    pub weak_equivalence: Verdict,
    pub fibration: Verdict,
    pub cofibration: Verdict,
    pub trivial_fibration: Verdict,
    pub trivial_cofibration: Verdict,
    pub per_arity: BTreeMap<usize, ArityDetail>,
    pub bound: Bound,
}

fn fails_at(n: usize, what: &str, detail: String) -> Verdict {
    Verdict::fails_with(
        format!("{what} fails at arity {n}"),
        Certificate::Instance {
            name: format!("arity {n}"),
            detail,
        },
    )
}

pub fn classify(f: &TheoryMorphism, b: &Bound) -> Result<ClassificationReport> {
    Ok(classify_cells(&CellMap::of_morphism(f, b)?))
}

pub fn classify_cells(f: &CellMap) -> ClassificationReport {
    let arities: Vec<usize> = f.source.arities().collect();
    let details = crate::parallel::map_ordered(&arities, |&n| {
        let (c, d) = (f.source.at(n), f.target.at(n));
        match f.functor(n) {
            None => {
                let why = f.missing.get(&n).cloned().unwrap_or_default();
                let u = Verdict::unknown(format!("arity {n}: {why}"), 0);
                ArityDetail {
                    source_objects: c.len(),
                    target_objects: d.len(),
                    weak_equivalence: u.clone(),
                    fibration: u.clone(),
                    cofibration: u,
                }
            }
            Some(functor) => classify_arity(n, c, d, functor),
        }
    });
    let per_arity: BTreeMap<usize, ArityDetail> = arities.into_iter().zip(details).collect();
    let fold = |pick: fn(&ArityDetail) -> &Verdict, note: &str| {
        per_arity
            .values()
            .map(pick)
            .cloned()
            .fold(Verdict::holds(note), Verdict::and)
    };
    let weak_equivalence = fold(|d| &d.weak_equivalence, "equivalence at every arity");
    let fibration = fold(|d| &d.fibration, "every isomorphism lifts");
    let cofibration = fold(|d| &d.cofibration, "injective on objects at every arity");
    ClassificationReport {
        morphism: f.label.clone(),
        trivial_fibration: weak_equivalence.clone().and(fibration.clone()),
        trivial_cofibration: weak_equivalence.clone().and(cofibration.clone()),
        weak_equivalence,
        fibration,
        cofibration,
        per_arity,
        bound: f.source.bound,
    }
}

fn classify_arity(n: usize, c: &FiniteCategory, d: &FiniteCategory, f: &Functor) -> ArityDetail {
    let undecided = c.unknown || c.partial || d.unknown || d.partial;
    let cofibration = match first_collision(c, f) {
        None => Verdict::holds("injective on objects"),
        Some((a, b)) => fails_at(
            n,
            "cofibration",
            format!("{} and {} have the same image", c.objects[a], c.objects[b]),
        ),
    };
    let weak_equivalence = match witness_for(c, d, f.clone()) {
        _ if undecided => Verdict::unknown(format!("arity {n}: hom-categories not decided within the bound"), 0),
        Ok(_) => Verdict::holds("equivalence of hom-categories"),
        Err(why) => fails_at(n, "weak equivalence", why),
    };
    let fibration = match unliftable(c, d, f) {
        _ if undecided => Verdict::unknown(format!("arity {n}: hom-categories not decided within the bound"), 0),
        None => Verdict::holds("isomorphisms lift"),
        Some((a, beta)) => fails_at(
            n,
            "fibration",
            format!("{} from the image of {} has no lift", d.label(beta), c.objects[a]),
        ),
    };
    ArityDetail {
        source_objects: c.len(),
        target_objects: d.len(),
        weak_equivalence,
        fibration,
        cofibration,
    }
}

fn first_collision(c: &FiniteCategory, f: &Functor) -> Option<(usize, usize)> {
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for a in 0..c.len() {
        if let Some(&b) = seen.get(&f.objects[a]) {
            return Some((b, a));
        }
        seen.insert(f.objects[a], a);
    }
    None
}

/// An object and an isomorphism out of its image with no lift.
fn unliftable(c: &FiniteCategory, d: &FiniteCategory, f: &Functor) -> Option<(usize, ArrowId)> {
    if let (Structure::Thin { component: cc }, Structure::Thin { component: dc }) = (&c.structure, &d.structure) {
        let mut images: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for a in 0..c.len() {
            images.entry(cc[a]).or_default().insert(f.objects[a]);
        }
        for a in 0..c.len() {
            let fa = f.objects[a];
            let reach = &images[&cc[a]];
            if let Some(y) = (0..d.len()).find(|&y| dc[y] == dc[fa] && !reach.contains(&y)) {
                return Some((a, d.hom(fa, y)[0]));
            }
        }
        return None;
    }
    for a in 0..c.len() {
        let lifted: HashSet<ArrowId> = (0..c.len())
            .flat_map(|x| c.hom(a, x))
            .filter(|&x| c.is_iso(x))
            .filter_map(|x| f.arrow(x, c, d))
            .collect();
        let fa = f.objects[a];
        for y in 0..d.len() {
            for beta in d.hom(fa, y) {
                if d.is_iso(beta) && !lifted.contains(&beta) {
                    return Some((a, beta));
                }
            }
        }
    }
    None
}

/// Isomorphisms out of `a`: the identity first, then by target and class.
pub fn isos_from(c: &FiniteCategory, a: usize) -> Vec<ArrowId> {
    let id = c.identity(a);
    let mut out = vec![id];
    for x in 0..c.len() {
        for f in c.hom(a, x) {
            if f != id && c.is_iso(f) {
                out.push(f);
            }
        }
    }
    out
}

/// The first isomorphism out of `a` whose image is `beta`.
pub fn lift_arrow(c: &FiniteCategory, d: &FiniteCategory, f: &Functor, a: usize, beta: ArrowId) -> Option<ArrowId> {
    isos_from(c, a)
        .into_iter()
        .find(|&x| f.arrow(x, c, d) == Some(beta))
}

/// A path out of `t` whose image is in the class of `beta`.
pub fn lift_iso(f: &TheoryMorphism, t: &Term, beta: &TwoCellPath, b: &Bound) -> Result<TwoCellPath> {
    let n = t.arity();
    let src = hom_category(&f.source, n, b)?;
    let tgt = hom_category(&f.target, n, b)?;
    let functor = f.functor()?;
    let restricted = restrict(&functor, &src, &tgt)?;
    let a = src
        .object(&src.engine.normalize(t)?)
        .ok_or_else(|| Error::BoundExceeded(format!("{t} lies outside the truncation")))?;
    let image = functor.image(t)?;
    if tgt.engine.normalize(&beta.source)? != image {
        return Err(Error::Hypothesis(format!("{} does not start at {image}", beta)));
    }
    let class = tgt
        .classify_path(beta)
        .ok_or_else(|| Error::BoundExceeded(format!("{beta} lies outside the truncation")))?;
    if !tgt.category.is_iso(class) {
        return Err(Error::Hypothesis(format!("{beta} is not invertible")));
    }
    let alpha = lift_arrow(&src.category, &tgt.category, &restricted, a, class)
        .ok_or_else(|| Error::NoLift(format!("{beta} from the image of {t}")))?;
    Ok(src.representative(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stdlib;

    #[test]
    fn strictification() {
        let r = classify(&stdlib::morphism("mon_to_smon").unwrap(), &Bound::default()).unwrap();
        assert!(r.weak_equivalence.is_holds());
        assert!(r.fibration.is_holds());
        assert!(r.cofibration.is_fails());
        assert!(r.trivial_fibration.is_holds());
        assert!(r.trivial_cofibration.is_fails());
    }

    #[test]
    fn free_inclusion() {
        let r = classify(&stdlib::morphism("bin_to_mon").unwrap(), &Bound::default()).unwrap();
        assert!(r.cofibration.is_holds());
        assert!(r.weak_equivalence.is_fails());
    }

    #[test]
    fn identity_lift() {
        let m = stdlib::morphism("mon_to_smon").unwrap();
        let t = crate::parse::parse_term("tensor(tensor(1,2),3)").unwrap();
        let image = m.functor().unwrap().image(&t).unwrap();
        let beta = TwoCellPath {
            source: image.clone(),
            target: image,
            steps: Vec::new(),
        };
        let alpha = lift_iso(&m, &t, &beta, &Bound::default()).unwrap();
        assert!(alpha.steps.is_empty());
    }
}
