//! Lifts in commutative squares of cell maps, and lifts through retracts.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::category::{ArrowId, FiniteCategory, Functor};
use crate::cells::CellMap;
use crate::classify::lift_arrow;
use crate::equivalence::witness_for;
use crate::error::{Error, Result};

/// ```text
///  T1 --u--> T3
///  |         |
///  f         g
///  v         v
///  T2 --v--> T4
/// ```
#[derive(Clone, Copy, Debug)]
pub struct Square<'a> {
    pub f: &'a CellMap,
    pub g: &'a CellMap,
    pub u: &'a CellMap,
    pub v: &'a CellMap,
}

impl Square<'_> {
    /// Matching boundaries and `f ; v = u ; g` on every cell.
    pub fn check(&self) -> Result<()> {
        let fv = self.f.then(self.v)?;
        let ug = self.u.then(self.g)?;
        fv.agrees_with(&ug)
            .map_err(|m| Error::Hypothesis(format!("square does not commute: {m}")))
    }
}

struct Arity<'a> {
    c1: &'a FiniteCategory,
    c2: &'a FiniteCategory,
    c3: &'a FiniteCategory,
    c4: &'a FiniteCategory,
    f: &'a Functor,
    g: &'a Functor,
    u: &'a Functor,
    v: &'a Functor,
}

fn arity<'a>(s: &Square<'a>, n: usize) -> Result<Arity<'a>> {
    let get = |m: &'a CellMap| {
        m.functor(n)
            .ok_or_else(|| Error::BoundExceeded(format!("{} undetermined at arity {n}", m.label)))
    };
    Ok(Arity {
        c1: s.f.source.at(n),
        c2: s.f.target.at(n),
        c3: s.g.source.at(n),
        c4: s.g.target.at(n),
        f: get(s.f)?,
        g: get(s.g)?,
        u: get(s.u)?,
        v: get(s.v)?,
    })
}

fn finish(s: &Square, per_arity: BTreeMap<usize, Functor>, label: &str) -> Result<CellMap> {
    let h = CellMap {
        label: label.to_string(),
        source: s.f.target.clone(),
        target: s.g.source.clone(),
        per_arity,
        missing: BTreeMap::new(),
    };
    s.f.then(&h)?
        .agrees_with(s.u)
        .map_err(|m| Error::Inconsistent(format!("upper triangle: {m}")))?;
    h.then(s.g)?
        .agrees_with(s.v)
        .map_err(|m| Error::Inconsistent(format!("lower triangle: {m}")))?;
    Ok(h)
}

fn arrow_map(
    from: &FiniteCategory,
    to: &FiniteCategory,
    objects: Vec<usize>,
    image: impl Fn(ArrowId) -> Option<ArrowId>,
) -> Result<Functor> {
    if to.is_thin() {
        return Ok(Functor::induced(objects));
    }
    let mut arrows = BTreeMap::new();
    for x in from.arrows() {
        let y = image(x).ok_or_else(|| Error::NoLift(format!("no image for {}", from.label(x))))?;
        arrows.insert(x, y);
    }
    Ok(Functor::new(objects, arrows))
}

/// A diagonal for a trivial cofibration `f` against a fibration `g`.
pub fn lift_square_first(s: &Square) -> Result<CellMap> {
    s.check()?;
    let mut per_arity = BTreeMap::new();
    for n in s.f.source.arities() {
        let a = arity(s, n)?;
        // The retraction f' with f' ; f-inverse data.
        let w = witness_for(a.c1, a.c2, a.f.clone())
            .map_err(|m| Error::Hypothesis(format!("f is not a trivial cofibration at arity {n}: {m}")))?;
        if !a.f.injective_on_objects() {
            return Err(Error::Hypothesis(format!("f is not injective on objects at arity {n}")));
        }
        let retract = &w.backward;
        let mut delta = Vec::with_capacity(a.c2.len());
        let mut objects = Vec::with_capacity(a.c2.len());
        for y in 0..a.c2.len() {
            let start = a.u.objects[retract.objects[y]];
            let gamma = a
                .v
                .arrow(w.counit[y], a.c2, a.c4)
                .ok_or_else(|| Error::Inconsistent("counit has no image".into()))?;
            let d = lift_arrow(a.c3, a.c4, a.g, start, gamma).ok_or_else(|| {
                Error::NoLift(format!("{} at arity {n} does not lift through g", a.c4.label(gamma)))
            })?;
            objects.push(a.c3.dst(d));
            delta.push(d);
        }
        let functor = arrow_map(a.c2, a.c3, objects, |x| {
            let (y, y2) = (a.c2.src(x), a.c2.dst(x));
            let r = retract.arrow(x, a.c2, a.c1)?;
            let ur = a.u.arrow(r, a.c1, a.c3)?;
            let back = a.c3.inverse(delta[y])?;
            a.c3.then(back, ur).and_then(|z| a.c3.then(z, delta[y2]))
        })?;
        per_arity.insert(n, functor);
    }
    finish(s, per_arity, "H")
}

/// Order in which unforced objects try their preimages. Preimages outside
/// the image of `u` always come first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preference {
    Canonical,
    Reversed,
    Seeded(u64),
}

/// A diagonal for a cofibration `f` against a trivial fibration `g`.
pub fn lift_square_second(s: &Square, order: Preference) -> Result<CellMap> {
    s.check()?;
    let mut per_arity = BTreeMap::new();
    for n in s.f.source.arities() {
        let a = arity(s, n)?;
        if !a.f.injective_on_objects() {
            return Err(Error::Hypothesis(format!("f is not injective on objects at arity {n}")));
        }
        let mut preimage: Vec<Option<usize>> = vec![None; a.c2.len()];
        for x in 0..a.c1.len() {
            preimage[a.f.objects[x]] = Some(x);
        }
        let in_u: Vec<bool> = {
            let mut v = vec![false; a.c3.len()];
            for &z in &a.u.objects {
                v[z] = true;
            }
            v
        };
        let mut objects = Vec::with_capacity(a.c2.len());
        for y in 0..a.c2.len() {
            if let Some(x) = preimage[y] {
                objects.push(a.u.objects[x]);
                continue;
            }
            let want = a.v.objects[y];
            let mut candidates: Vec<usize> = (0..a.c3.len()).filter(|&z| a.g.objects[z] == want).collect();
            candidates.sort_by_key(|&z| in_u[z]);
            let outside = candidates.iter().filter(|&&z| !in_u[z]).count();
            let (l, r) = candidates.split_at_mut(outside);
            match order {
                Preference::Canonical => {}
                Preference::Reversed => {
                    l.reverse();
                    r.reverse();
                }
                Preference::Seeded(seed) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32 | y as u64));
                    l.shuffle(&mut rng);
                    r.shuffle(&mut rng);
                }
            }
            let z = *candidates.first().ok_or_else(|| {
                Error::NoLift(format!("no preimage of {} at arity {n}", a.c4.objects[want]))
            })?;
            objects.push(z);
        }
        let mut over: HashMap<(usize, usize, ArrowId), ArrowId> = HashMap::new();
        if !a.c3.is_thin() {
            for x in a.c3.arrows() {
                let (p, q) = (a.c3.src(x), a.c3.dst(x));
                if let Some(y) = a.g.arrow(x, a.c3, a.c4) {
                    if over.insert((p, q, y), x).is_some() {
                        return Err(Error::Hypothesis(format!("g is not faithful at arity {n}")));
                    }
                }
            }
        }
        let functor = arrow_map(a.c2, a.c3, objects.clone(), |x| {
            let vx = a.v.arrow(x, a.c2, a.c4)?;
            over.get(&(objects[a.c2.src(x)], objects[a.c2.dst(x)], vx)).copied()
        })?;
        per_arity.insert(n, functor);
    }
    finish(s, per_arity, if order == Preference::Canonical { "H" } else { "H'" })
}

/// ```text
///  T1 --h--> T3 --j--> T1
///  |f        |g        |f
///  T2 --h'-> T4 --j'-> T2
/// ```
#[derive(Clone, Copy, Debug)]
pub struct Retract<'a> {
    pub f: &'a CellMap,
    pub g: &'a CellMap,
    pub h: &'a CellMap,
    pub j: &'a CellMap,
    pub h2: &'a CellMap,
    pub j2: &'a CellMap,
}

impl Retract<'_> {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Error::Hypothesis(format!("retract diagram: {m}"));
        self.h
            .then(self.j)?
            .agrees_with(&CellMap::identity(self.f.source.clone()))
            .map_err(bad)?;
        self.h2
            .then(self.j2)?
            .agrees_with(&CellMap::identity(self.f.target.clone()))
            .map_err(bad)?;
        Square {
            f: self.f,
            g: self.g,
            u: self.h,
            v: self.h2,
        }
        .check()?;
        Square {
            f: self.g,
            g: self.f,
            u: self.j,
            v: self.j2,
        }
        .check()
    }
}

/// `j` applied to the lift through `g` of `h(x)` along `h'(beta)`.
pub fn retract_lift(r: &Retract, n: usize, x: usize, beta: ArrowId) -> Result<ArrowId> {
    r.check()?;
    let get = |m: &CellMap| {
        m.functor(n)
            .cloned()
            .ok_or_else(|| Error::BoundExceeded(format!("{} undetermined at arity {n}", m.label)))
    };
    let (c1, c2, c3, c4) = (r.f.source.at(n), r.f.target.at(n), r.g.source.at(n), r.g.target.at(n));
    let (f, g, h, j, h2) = (get(r.f)?, get(r.g)?, get(r.h)?, get(r.j)?, get(r.h2)?);
    let b2 = h2
        .arrow(beta, c2, c4)
        .ok_or_else(|| Error::Inconsistent("h' has no image for the isomorphism".into()))?;
    let inner = lift_arrow(c3, c4, &g, h.objects[x], b2).ok_or_else(|| Error::NoLift("inner lift through g".into()))?;
    let out = j
        .arrow(inner, c3, c1)
        .ok_or_else(|| Error::Inconsistent("j has no image for the lift".into()))?;
    if c1.src(out) != x || f.arrow(out, c1, c2) != Some(beta) {
        return Err(Error::Inconsistent("retract lift does not replay".into()));
    }
    Ok(out)
}
