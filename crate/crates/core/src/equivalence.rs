//! Equivalences of finite categories and the per-arity biequivalence calculus.

use std::collections::{BTreeMap, HashMap};

use serde_json::json;

use crate::category::{ArrowId, FiniteCategory, Functor};
use crate::error::{Error, Result};
use crate::homcat::{hom_category, restrict, Bound};
use crate::morphism::TheoryMorphism;
use crate::verdict::{Certificate, Verdict};

/// Search nodes allowed when matching arrows between skeleta.
const SEARCH_BUDGET: usize = 200_000;

/// `forward: source -> target`, `backward: target -> source`,
/// `unit[a]: a -> GFa` and `counit[b]: FGb -> b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub source: FiniteCategory,
    pub target: FiniteCategory,
    pub forward: Functor,
    pub backward: Functor,
    pub unit: Vec<ArrowId>,
    pub counit: Vec<ArrowId>,
    pub adjoint: bool,
}

#[derive(Clone, Debug)]
pub struct BiequivalenceCertificate {
    pub morphism: TheoryMorphism,
    pub per_arity: BTreeMap<usize, EquivalenceWitness>,
    pub bound: Bound,
}

#[derive(Clone, Debug)]
pub enum Certified {
    Found(BiequivalenceCertificate),
    Absent {
        arity: usize,
        reason: String,
        /// The hom-categories were too truncated to decide.
        unknown: bool,
    },
}

fn arrow(f: &Functor, x: ArrowId, from: &FiniteCategory, to: &FiniteCategory) -> Option<ArrowId> {
    f.arrow(x, from, to)
}

fn square(name: &str, detail: String) -> Verdict {
    Verdict::fails_with(
        format!("{name} fails"),
        Certificate::Instance {
            name: name.to_string(),
            detail,
        },
    )
}

impl EquivalenceWitness {
    pub fn identity(c: &FiniteCategory) -> Self {
        let ids: Vec<ArrowId> = (0..c.len()).map(|a| c.identity(a)).collect();
        EquivalenceWitness {
            source: c.clone(),
            target: c.clone(),
            forward: Functor::identity(c),
            backward: Functor::identity(c),
            unit: ids.clone(),
            counit: ids,
            adjoint: true,
        }
    }

    fn f(&self, x: ArrowId) -> Option<ArrowId> {
        arrow(&self.forward, x, &self.source, &self.target)
    }

    fn g(&self, x: ArrowId) -> Option<ArrowId> {
        arrow(&self.backward, x, &self.target, &self.source)
    }

    fn fo(&self, a: usize) -> usize {
        self.forward.objects[a]
    }

    fn go(&self, b: usize) -> usize {
        self.backward.objects[b]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let functor = |f: &Functor, from: &FiniteCategory, to: &FiniteCategory| {
            let arrows: Vec<serde_json::Value> = from
                .arrows()
                .into_iter()
                .filter_map(|x| f.arrow(x, from, to).map(|y| json!([from.label(x), to.label(y)])))
                .collect();
            json!({"objects": f.objects, "arrows": arrows})
        };
        json!({
            "source": self.source.objects,
            "target": self.target.objects,
            "forward": functor(&self.forward, &self.source, &self.target),
            "backward": functor(&self.backward, &self.target, &self.source),
            "unit": self.unit.iter().map(|&u| json!({"arrow": u, "label": self.source.label(u)})).collect::<Vec<_>>(),
            "counit": self.counit.iter().map(|&u| json!({"arrow": u, "label": self.target.label(u)})).collect::<Vec<_>>(),
            "adjoint": self.adjoint,
        })
    }
}

/// Functors, invertible components, naturality and, for adjoint
/// witnesses, the triangle identities.
pub fn check_witness(w: &EquivalenceWitness) -> Verdict {
    let (c, d) = (&w.source, &w.target);
    if let Err(e) = w.forward.check(c, d) {
        return square("forward functor", e.to_string());
    }
    if let Err(e) = w.backward.check(d, c) {
        return square("backward functor", e.to_string());
    }
    if w.unit.len() != c.len() || w.counit.len() != d.len() {
        return square("components", "one component per object required".into());
    }
    let mut undefined = false;
    for a in 0..c.len() {
        let u = w.unit[a];
        if c.src(u) != a || c.dst(u) != w.go(w.fo(a)) {
            return square("unit endpoints", c.objects[a].clone());
        }
        if !c.is_iso(u) {
            return square("unit invertibility", c.objects[a].clone());
        }
    }
    for b in 0..d.len() {
        let e = w.counit[b];
        if d.dst(e) != b || d.src(e) != w.fo(w.go(b)) {
            return square("counit endpoints", d.objects[b].clone());
        }
        if !d.is_iso(e) {
            return square("counit invertibility", d.objects[b].clone());
        }
    }
    if !c.is_thin() {
        for f in c.arrows() {
            let (a, b) = (c.src(f), c.dst(f));
            let gff = w.f(f).and_then(|x| w.g(x));
            let l = gff.and_then(|x| c.then(w.unit[a], x));
            let r = c.then(f, w.unit[b]);
            match (l, r) {
                (Some(l), Some(r)) if l != r => {
                    return square("unit naturality", format!("square at {}", c.label(f)));
                }
                (Some(_), Some(_)) => {}
                _ => undefined = true,
            }
        }
    }
    if !d.is_thin() {
        for g in d.arrows() {
            let (a, b) = (d.src(g), d.dst(g));
            let fgg = w.g(g).and_then(|x| w.f(x));
            let l = fgg.and_then(|x| d.then(x, w.counit[b]));
            let r = d.then(w.counit[a], g);
            match (l, r) {
                (Some(l), Some(r)) if l != r => {
                    return square("counit naturality", format!("square at {}", d.label(g)));
                }
                (Some(_), Some(_)) => {}
                _ => undefined = true,
            }
        }
    }
    if w.adjoint {
        for a in 0..c.len() {
            let t = w.f(w.unit[a]).and_then(|x| d.then(x, w.counit[w.fo(a)]));
            match t {
                Some(t) if t != d.identity(w.fo(a)) => {
                    return square("first triangle identity", c.objects[a].clone());
                }
                Some(_) => {}
                None => undefined = true,
            }
        }
        for b in 0..d.len() {
            let t = w.g(w.counit[b]).and_then(|x| c.then(w.unit[w.go(b)], x));
            match t {
                Some(t) if t != c.identity(w.go(b)) => {
                    return square("second triangle identity", d.objects[b].clone());
                }
                Some(_) => {}
                None => undefined = true,
            }
        }
    }
    if undefined {
        return Verdict::unknown("some composites fall outside the truncation", 0);
    }
    Verdict::holds("equivalence data verified on the tables")
}

/// The same equivalence read backwards.
pub fn flip(w: &EquivalenceWitness) -> EquivalenceWitness {
    let inv = |c: &FiniteCategory, xs: &[ArrowId]| -> Vec<ArrowId> {
        xs.iter().map(|&x| c.inverse(x).expect("invertible component")).collect()
    };
    EquivalenceWitness {
        source: w.target.clone(),
        target: w.source.clone(),
        forward: w.backward.clone(),
        backward: w.forward.clone(),
        unit: inv(&w.target, &w.counit),
        counit: inv(&w.source, &w.unit),
        adjoint: w.adjoint,
    }
}

/// `w1: A -> B` followed by `w2: B -> C`.
pub fn compose(w1: &EquivalenceWitness, w2: &EquivalenceWitness) -> Result<EquivalenceWitness> {
    if w1.target != w2.source {
        return Err(Error::Hypothesis("middle categories differ".into()));
    }
    let (a, b, c) = (&w1.source, &w1.target, &w2.target);
    let forward = w1.forward.then(&w2.forward, a, b, c);
    let backward = w2.backward.then(&w1.backward, c, b, a);
    let missing = || Error::Inconsistent("composite component outside the tables".into());
    let unit = (0..a.len())
        .map(|x| {
            let inner = w2.unit[w1.fo(x)];
            let g = w1.g(inner).ok_or_else(missing)?;
            a.then(w1.unit[x], g).ok_or_else(missing)
        })
        .collect::<Result<Vec<_>>>()?;
    let counit = (0..c.len())
        .map(|z| {
            let inner = w1.counit[w2.go(z)];
            let f = w2.f(inner).ok_or_else(missing)?;
            c.then(f, w2.counit[z]).ok_or_else(missing)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceWitness {
        source: a.clone(),
        target: c.clone(),
        forward,
        backward,
        unit,
        counit,
        adjoint: w1.adjoint && w2.adjoint,
    })
}

fn sum_functor(
    f1: &Functor,
    f2: &Functor,
    cats: (&FiniteCategory, &FiniteCategory, &FiniteCategory, &FiniteCategory),
    maps: (&BTreeMap<ArrowId, ArrowId>, &BTreeMap<ArrowId, ArrowId>),
    targets: (&BTreeMap<ArrowId, ArrowId>, &BTreeMap<ArrowId, ArrowId>),
    shifts: (usize, usize),
    thin: bool,
) -> Functor {
    let (a1, a2, b1, b2) = cats;
    let objects: Vec<usize> = f1
        .objects
        .iter()
        .copied()
        .chain(f2.objects.iter().map(|o| o + shifts.1))
        .collect();
    if thin {
        return Functor::induced(objects);
    }
    let mut arrows = BTreeMap::new();
    for x in a1.arrows() {
        if let Some(y) = f1.arrow(x, a1, b1) {
            arrows.insert(maps.0[&x], targets.0[&y]);
        }
    }
    for x in a2.arrows() {
        if let Some(y) = f2.arrow(x, a2, b2) {
            arrows.insert(maps.1[&x], targets.1[&y]);
        }
    }
    Functor::new(objects, arrows)
}

/// Disjoint union of two equivalences.
pub fn coproduct_witness(w1: &EquivalenceWitness, w2: &EquivalenceWitness) -> EquivalenceWitness {
    let (a, ia1, ia2) = FiniteCategory::coproduct_with_injections(&w1.source, &w2.source);
    let (b, ib1, ib2) = FiniteCategory::coproduct_with_injections(&w1.target, &w2.target);
    let forward = sum_functor(
        &w1.forward,
        &w2.forward,
        (&w1.source, &w2.source, &w1.target, &w2.target),
        (&ia1, &ia2),
        (&ib1, &ib2),
        (0, w1.target.len()),
        b.is_thin(),
    );
    let backward = sum_functor(
        &w1.backward,
        &w2.backward,
        (&w1.target, &w2.target, &w1.source, &w2.source),
        (&ib1, &ib2),
        (&ia1, &ia2),
        (0, w1.source.len()),
        a.is_thin(),
    );
    let unit = w1.unit.iter().map(|u| ia1[u]).chain(w2.unit.iter().map(|u| ia2[u])).collect();
    let counit = w1
        .counit
        .iter()
        .map(|u| ib1[u])
        .chain(w2.counit.iter().map(|u| ib2[u]))
        .collect();
    EquivalenceWitness {
        source: a,
        target: b,
        forward,
        backward,
        unit,
        counit,
        adjoint: w1.adjoint && w2.adjoint,
    }
}

/// Components `p(x) -> q(x)` of a natural isomorphism between functors
/// `c -> d`, found by backtracking.
pub fn find_natural_iso(c: &FiniteCategory, p: &Functor, q: &Functor, d: &FiniteCategory) -> Option<Vec<ArrowId>> {
    let n = c.len();
    let order = connected_order(c);
    let mut theta: Vec<Option<ArrowId>> = vec![None; n];
    let mut budget = SEARCH_BUDGET;
    if assign(c, p, q, d, &order, 0, &mut theta, &mut budget) {
        Some(theta.into_iter().map(|t| t.expect("assigned")).collect())
    } else {
        None
    }
}

fn connected_order(c: &FiniteCategory) -> Vec<usize> {
    let n = c.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for y in 0..n {
                if !seen[y] && (!c.hom(x, y).is_empty() || !c.hom(y, x).is_empty()) {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn assign(
    c: &FiniteCategory,
    p: &Functor,
    q: &Functor,
    d: &FiniteCategory,
    order: &[usize],
    i: usize,
    theta: &mut Vec<Option<ArrowId>>,
    budget: &mut usize,
) -> bool {
    let Some(&x) = order.get(i) else { return true };
    let (px, qx) = (p.objects[x], q.objects[x]);
    for t in d.hom(px, qx) {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if !d.is_iso(t) {
            continue;
        }
        theta[x] = Some(t);
        if natural_at(c, p, q, d, x, theta) && assign(c, p, q, d, order, i + 1, theta, budget) {
            return true;
        }
        theta[x] = None;
    }
    false
}

fn natural_at(c: &FiniteCategory, p: &Functor, q: &Functor, d: &FiniteCategory, x: usize, theta: &[Option<ArrowId>]) -> bool {
    if d.is_thin() {
        return true;
    }
    for y in 0..c.len() {
        let Some(ty) = theta[y] else { continue };
        let tx = theta[x].expect("assigned");
        let check = |f: ArrowId, ts: ArrowId, tt: ArrowId| {
            let (Some(qf), Some(pf)) = (q.arrow(f, c, d), p.arrow(f, c, d)) else {
                return false;
            };
            match (d.then(ts, qf), d.then(pf, tt)) {
                (Some(l), Some(r)) => l == r,
                _ => true,
            }
        };
        for f in c.hom(x, y) {
            if !check(f, tx, ty) {
                return false;
            }
        }
        if y != x {
            for f in c.hom(y, x) {
                if !check(f, ty, tx) {
                    return false;
                }
            }
        }
    }
    true
}

fn strictly_identity(f: &Functor, g: &Functor, a: &FiniteCategory, b: &FiniteCategory) -> bool {
    let gf = f.then(g, a, b, a);
    (0..a.len()).all(|x| gf.objects[x] == x) && a.arrows().into_iter().all(|x| gf.arrow(x, a, a) == Some(x))
}

/// A witness for a pair of functors satisfying one of the four
/// section/retraction hypotheses:
/// 1. `G∘F = id`, 2. `F∘G = id`, 3. `G∘F ≅ id`, 4. `F∘G ≅ id`.
pub fn witness_from_section(
    source: &FiniteCategory,
    target: &FiniteCategory,
    forward: Functor,
    backward: Functor,
    case: u8,
) -> Result<EquivalenceWitness> {
    forward.check(source, target)?;
    backward.check(target, source)?;
    let (c, d) = (source, target);
    let gf = forward.then(&backward, c, d, c);
    let fg = backward.then(&forward, d, c, d);
    let id_c = Functor::identity(c);
    let id_d = Functor::identity(d);
    let fail = |m: &str| Error::Hypothesis(m.to_string());
    let (unit, counit) = match case {
        1 => {
            if !strictly_identity(&forward, &backward, c, d) {
                return Err(fail("G∘F = id does not hold"));
            }
            let unit = (0..c.len()).map(|a| c.identity(a)).collect();
            let counit = find_natural_iso(d, &fg, &id_d, d).ok_or_else(|| fail("no natural isomorphism F∘G ≅ id"))?;
            (unit, counit)
        }
        2 => {
            if !strictly_identity(&backward, &forward, d, c) {
                return Err(fail("F∘G = id does not hold"));
            }
            let counit = (0..d.len()).map(|b| d.identity(b)).collect();
            let unit = find_natural_iso(c, &id_c, &gf, c).ok_or_else(|| fail("no natural isomorphism G∘F ≅ id"))?;
            (unit, counit)
        }
        3 => {
            let unit = find_natural_iso(c, &id_c, &gf, c).ok_or_else(|| fail("G∘F ≅ id does not hold"))?;
            let counit = find_natural_iso(d, &fg, &id_d, d).ok_or_else(|| fail("no natural isomorphism F∘G ≅ id"))?;
            (unit, counit)
        }
        4 => {
            let counit = find_natural_iso(d, &fg, &id_d, d).ok_or_else(|| fail("F∘G ≅ id does not hold"))?;
            let unit = find_natural_iso(c, &id_c, &gf, c).ok_or_else(|| fail("no natural isomorphism G∘F ≅ id"))?;
            (unit, counit)
        }
        k => return Err(fail(&format!("case {k} is not one of 1..4"))),
    };
    Ok(EquivalenceWitness {
        source: c.clone(),
        target: d.clone(),
        forward,
        backward,
        unit,
        counit,
        adjoint: false,
    })
}

/// Replaces the unit so that both triangle identities hold.
pub fn adjointify(w: &EquivalenceWitness) -> EquivalenceWitness {
    let (c, d) = (&w.source, &w.target);
    let unit = (0..c.len())
        .map(|a| {
            let fa = w.fo(a);
            let gfa = w.go(fa);
            let corrected = d
                .inverse(w.counit[fa])
                .and_then(|e| w.g(e))
                .and_then(|ge| c.then(w.unit[a], ge))
                .zip(c.inverse(w.unit[gfa]))
                .and_then(|(x, back)| c.then(x, back));
            corrected.unwrap_or(w.unit[a])
        })
        .collect();
    EquivalenceWitness {
        unit,
        adjoint: true,
        ..w.clone()
    }
}

/// Completes a fully faithful, essentially surjective functor to an
/// equivalence; the error names the first obstruction. Objects with a
/// preimage are sent back to their first preimage with identity counit.
pub fn witness_for(c: &FiniteCategory, d: &FiniteCategory, forward: Functor) -> std::result::Result<EquivalenceWitness, String> {
    forward.check(c, d).map_err(|e| e.to_string())?;
    let fo = |a: usize| forward.objects[a];
    // Fullness and faithfulness, with the inverse hom maps.
    let mut preimage: HashMap<(usize, usize, ArrowId), ArrowId> = HashMap::new();
    let both_thin = c.is_thin() && d.is_thin();
    for a in 0..c.len() {
        for b in 0..c.len() {
            let src = c.hom(a, b);
            let dst = d.hom(fo(a), fo(b));
            if src.len() != dst.len() {
                let what = if src.len() < dst.len() { "full" } else { "faithful" };
                return Err(format!("not {what} on {} -> {}", c.objects[a], c.objects[b]));
            }
            if both_thin {
                continue;
            }
            for &x in &src {
                let y = forward.arrow(x, c, d).ok_or("missing arrow image")?;
                if preimage.insert((a, b, y), x).is_some() {
                    return Err(format!("not faithful on {} -> {}", c.objects[a], c.objects[b]));
                }
            }
        }
    }
    let classes = d.iso_classes();
    let mut class_of = vec![0; d.len()];
    for (i, cl) in classes.iter().enumerate() {
        for &b in cl {
            class_of[b] = i;
        }
    }
    let mut hit: Vec<Option<usize>> = vec![None; classes.len()];
    for a in 0..c.len() {
        let k = class_of[fo(a)];
        if hit[k].is_none() {
            hit[k] = Some(a);
        }
    }
    let mut exact: Vec<Option<usize>> = vec![None; d.len()];
    for a in (0..c.len()).rev() {
        exact[fo(a)] = Some(a);
    }
    let mut back_objects = Vec::with_capacity(d.len());
    let mut counit = Vec::with_capacity(d.len());
    for b in 0..d.len() {
        if let Some(a) = exact[b] {
            back_objects.push(a);
            counit.push(d.identity(b));
            continue;
        }
        let Some(a) = hit[class_of[b]] else {
            return Err(format!("object {} is not in the essential image", d.objects[b]));
        };
        let e = d
            .hom(fo(a), b)
            .into_iter()
            .find(|&e| d.is_iso(e))
            .ok_or("isomorphism classes inconsistent")?;
        back_objects.push(a);
        counit.push(e);
    }
    // The arrow `a -> b` of `c` over `y`.
    let lift = |a: usize, b: usize, y: ArrowId| -> Option<ArrowId> {
        if both_thin {
            return c.hom(a, b).first().copied();
        }
        preimage.get(&(a, b, y)).copied()
    };
    let backward = if c.is_thin() {
        Functor::induced(back_objects.clone())
    } else {
        let mut arrows = BTreeMap::new();
        for g in d.arrows() {
            let (b, b2) = (d.src(g), d.dst(g));
            let y = d
                .then(counit[b], g)
                .zip(d.inverse(counit[b2]))
                .and_then(|(x, ei)| d.then(x, ei))
                .ok_or("composite outside the tables")?;
            arrows.insert(g, lift(back_objects[b], back_objects[b2], y).ok_or("composite outside the tables")?);
        }
        Functor::new(back_objects.clone(), arrows)
    };
    let mut unit = Vec::with_capacity(c.len());
    for a in 0..c.len() {
        let target = back_objects[fo(a)];
        let u = if c.is_thin() {
            c.hom(a, target).first().copied()
        } else {
            d.inverse(counit[fo(a)]).and_then(|y| lift(a, target, y))
        };
        unit.push(u.ok_or("unit component outside the tables")?);
    }
    Ok(EquivalenceWitness {
        source: c.clone(),
        target: d.clone(),
        forward,
        backward,
        unit,
        counit,
        adjoint: false,
    })
}

/// Searches for an equivalence, matching isomorphism classes by
/// (class size, canonical order) and backtracking over hom bijections.
pub fn find_equivalence(c: &FiniteCategory, d: &FiniteCategory) -> Option<EquivalenceWitness> {
    if c == d {
        return Some(EquivalenceWitness::identity(c));
    }
    let cc = c.iso_classes();
    let dc = d.iso_classes();
    if cc.len() != dc.len() {
        return None;
    }
    let creps: Vec<usize> = cc.iter().map(|k| k[0]).collect();
    let dreps: Vec<usize> = dc.iter().map(|k| k[0]).collect();
    let mut order: Vec<usize> = (0..dc.len()).collect();
    order.sort_by_key(|&j| (dc[j].len(), j));
    let mut matching = vec![usize::MAX; cc.len()];
    let mut used = vec![false; dc.len()];
    let mut budget = SEARCH_BUDGET;
    let map = match_classes(c, d, &creps, &dreps, &order, 0, &mut matching, &mut used, &mut budget)?;
    let forward = extend(c, d, &cc, &creps, &dreps, &matching, &map)?;
    witness_for(c, d, forward).ok()
}

/// Skeleton arrow map as `(c arrow) -> (d arrow)` on representatives.
type SkeletonMap = HashMap<ArrowId, ArrowId>;

#[allow(clippy::too_many_arguments)]
fn match_classes(
    c: &FiniteCategory,
    d: &FiniteCategory,
    creps: &[usize],
    dreps: &[usize],
    order: &[usize],
    i: usize,
    matching: &mut Vec<usize>,
    used: &mut Vec<bool>,
    budget: &mut usize,
) -> Option<SkeletonMap> {
    if i == creps.len() {
        let mut map = SkeletonMap::new();
        return match_arrows(c, d, creps, dreps, matching, &homs(creps.len()), 0, &mut map, budget).then_some(map);
    }
    for &j in order {
        if used[j] || *budget == 0 {
            continue;
        }
        *budget -= 1;
        let (x, y) = (creps[i], dreps[j]);
        if c.hom(x, x).len() != d.hom(y, y).len() {
            continue;
        }
        let compatible = (0..i).all(|k| {
            let (xk, yk) = (creps[k], dreps[matching[k]]);
            c.hom(x, xk).len() == d.hom(y, yk).len() && c.hom(xk, x).len() == d.hom(yk, y).len()
        });
        if !compatible {
            continue;
        }
        matching[i] = j;
        used[j] = true;
        if let Some(m) = match_classes(c, d, creps, dreps, order, i + 1, matching, used, budget) {
            return Some(m);
        }
        used[j] = false;
        matching[i] = usize::MAX;
    }
    None
}

fn homs(n: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push((i, j));
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn match_arrows(
    c: &FiniteCategory,
    d: &FiniteCategory,
    creps: &[usize],
    dreps: &[usize],
    matching: &[usize],
    pairs: &[(usize, usize)],
    k: usize,
    map: &mut SkeletonMap,
    budget: &mut usize,
) -> bool {
    let Some(&(i, j)) = pairs.get(k) else { return true };
    let src = c.hom(creps[i], creps[j]);
    let dst = d.hom(dreps[matching[i]], dreps[matching[j]]);
    let mut perm: Vec<usize> = (0..dst.len()).collect();
    loop {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let assigned: Vec<(ArrowId, ArrowId)> = src.iter().zip(&perm).map(|(&x, &p)| (x, dst[p])).collect();
        let ok = assigned.iter().all(|&(x, y)| {
            if x == c.identity(c.src(x)) && c.src(x) == c.dst(x) {
                y == d.identity(d.src(y))
            } else {
                true
            }
        });
        if ok {
            for &(x, y) in &assigned {
                map.insert(x, y);
            }
            if consistent(c, d, map, &assigned) && match_arrows(c, d, creps, dreps, matching, pairs, k + 1, map, budget) {
                return true;
            }
            for (x, _) in &assigned {
                map.remove(x);
            }
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn consistent(c: &FiniteCategory, d: &FiniteCategory, map: &SkeletonMap, fresh: &[(ArrowId, ArrowId)]) -> bool {
    let entries: Vec<(ArrowId, ArrowId)> = map.iter().map(|(&x, &y)| (x, y)).collect();
    for &(x, y) in fresh {
        for &(u, v) in &entries {
            for (f, g, ff, gg) in [(x, u, y, v), (u, x, v, y)] {
                if c.dst(f) != c.src(g) {
                    continue;
                }
                let Some(h) = c.then(f, g) else { continue };
                let Some(&hh) = map.get(&h) else { continue };
                if let Some(k) = d.then(ff, gg) {
                    if k != hh {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Extends a skeleton isomorphism to a functor on all of `c`.
fn extend(
    c: &FiniteCategory,
    d: &FiniteCategory,
    classes: &[Vec<usize>],
    creps: &[usize],
    dreps: &[usize],
    matching: &[usize],
    map: &SkeletonMap,
) -> Option<Functor> {
    let mut objects = vec![0; c.len()];
    let mut phi = vec![0; c.len()];
    let mut rep_of = vec![0; c.len()];
    for (i, class) in classes.iter().enumerate() {
        for &a in class {
            objects[a] = dreps[matching[i]];
            rep_of[a] = creps[i];
            phi[a] = if a == creps[i] {
                c.identity(a)
            } else {
                c.hom(creps[i], a).into_iter().find(|&f| c.is_iso(f))?
            };
        }
    }
    if d.is_thin() {
        return Some(Functor::induced(objects));
    }
    let mut arrows = BTreeMap::new();
    for f in c.arrows() {
        let (a, b) = (c.src(f), c.dst(f));
        let conj = c.then(phi[a], f).and_then(|x| c.then(x, c.inverse(phi[b])?))?;
        debug_assert_eq!((c.src(conj), c.dst(conj)), (rep_of[a], rep_of[b]));
        arrows.insert(f, *map.get(&conj)?);
    }
    Some(Functor::new(objects, arrows))
}

/// Per-arity equivalences whose forward functors are the restrictions of `f`.
pub fn certify(f: &TheoryMorphism, b: &Bound) -> Result<Certified> {
    let functor = f.functor()?;
    let mut per_arity = BTreeMap::new();
    for n in (0..=b.max_arity).rev() {
        let src = hom_category(&f.source, n, b)?;
        let tgt = hom_category(&f.target, n, b)?;
        if src.category.unknown || tgt.category.unknown || src.category.partial || tgt.category.partial {
            return Ok(Certified::Absent {
                arity: n,
                reason: "hom-categories not decided within the bound".into(),
                unknown: true,
            });
        }
        let restricted = match restrict(&functor, &src, &tgt) {
            Ok(r) => r,
            Err(e) => {
                return Ok(Certified::Absent {
                    arity: n,
                    reason: e.to_string(),
                    unknown: true,
                })
            }
        };
        match witness_for(&src.category, &tgt.category, restricted) {
            Ok(w) => {
                per_arity.insert(n, w);
            }
            Err(reason) => {
                return Ok(Certified::Absent {
                    arity: n,
                    reason,
                    unknown: false,
                })
            }
        }
    }
    Ok(Certified::Found(BiequivalenceCertificate {
        morphism: f.clone(),
        per_arity,
        bound: *b,
    }))
}
