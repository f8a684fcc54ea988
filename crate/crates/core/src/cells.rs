//! Theories and morphisms seen only through their truncated hom-categories.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::category::{ArrowId, FiniteCategory, Functor};
use crate::error::{Error, Result};
use crate::homcat::{hom_category, restrict, Bound, HomCategory};
use crate::morphism::TheoryMorphism;
use crate::presentation::TheoryPresentation;
use crate::rewrite::Engine;

/// How the objects of a truncated theory were built.
#[derive(Clone, Debug)]
pub enum Origin {
    Presented {
        presentation: TheoryPresentation,
        engine: Engine,
        homs: BTreeMap<usize, HomCategory>,
    },
    /// Objects `(f, alpha, g)` with `alpha: F f -> g` invertible.
    PathObject {
        map: CellMap,
        triples: BTreeMap<usize, Vec<(usize, ArrowId, usize)>>,
    },
    /// Objects of the source first, then of the target.
    Cylinder { map: CellMap },
    Derived,
}

/// Per-arity hom-categories T(1,n) together with a partial operadic
/// substitution on objects.
#[derive(Clone, Debug)]
pub struct TruncatedTheory {
    pub label: String,
    pub bound: Bound,
    pub per_arity: BTreeMap<usize, FiniteCategory>,
    pub origin: Origin,
}

impl PartialEq for TruncatedTheory {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.per_arity == other.per_arity
    }
}

impl TruncatedTheory {
    pub fn presented(p: &TheoryPresentation, b: &Bound) -> Result<Self> {
        let mut homs = BTreeMap::new();
        let mut per_arity = BTreeMap::new();
        let arities: Vec<usize> = (0..=b.max_arity).collect();
        let built = crate::parallel::map_ordered(&arities, |&n| hom_category(p, n, b));
        for (n, h) in arities.into_iter().zip(built) {
            let h = h?;
            let mut c = h.category.clone();
            if h.truncated {
                c.unknown = true;
            }
            per_arity.insert(n, c);
            homs.insert(n, h);
        }
        Ok(TruncatedTheory {
            label: p.name.clone(),
            bound: *b,
            per_arity,
            origin: Origin::Presented {
                presentation: p.clone(),
                engine: Engine::new(p)?,
                homs,
            },
        })
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_arity.keys().copied()
    }

    pub fn at(&self, n: usize) -> &FiniteCategory {
        &self.per_arity[&n]
    }

    pub fn hom(&self, n: usize) -> Option<&HomCategory> {
        match &self.origin {
            Origin::Presented { homs, .. } => homs.get(&n),
            _ => None,
        }
    }

    /// Some hom-category could not be decided within the bound.
    pub fn contaminated(&self) -> bool {
        self.per_arity.values().any(|c| c.unknown || c.partial)
    }

    /// T(m,n) as the m-fold product of T(1,n).
    pub fn hom_mn(&self, m: usize, n: usize) -> Option<FiniteCategory> {
        let c = self.per_arity.get(&n)?;
        let parts: Vec<&FiniteCategory> = (0..m).map(|_| c).collect();
        Some(FiniteCategory::product(&parts))
    }

    /// Object `a` of arity `n` with object `b` of arity `m` substituted
    /// at `slot` (1-based), when defined within the bound.
    pub fn substitute(&self, n: usize, a: usize, slot: usize, m: usize, b: usize) -> Option<usize> {
        if slot == 0 || slot > n {
            return None;
        }
        let k = n + m - 1;
        self.per_arity.get(&k)?;
        match &self.origin {
            Origin::Presented { engine, homs, .. } => {
                let t = homs.get(&n)?.terms.get(a)?;
                let u = homs.get(&m)?.terms.get(b)?;
                let s = engine.normalize(&t.substitute(slot, u).ok()?).ok()?;
                homs.get(&k)?.object(&s)
            }
            Origin::Cylinder { map } => {
                let (n1, m1) = (map.source.at(n).len(), map.source.at(m).len());
                let k1 = map.source.at(k).len();
                if a < n1 && b < m1 {
                    return map.source.substitute(n, a, slot, m, b);
                }
                let ga = if a < n1 { map.object(n, a)? } else { a - n1 };
                let gb = if b < m1 { map.object(m, b)? } else { b - m1 };
                map.target.substitute(n, ga, slot, m, gb).map(|x| x + k1)
            }
            Origin::PathObject { map, triples } => {
                let (f, alpha, g) = *triples.get(&n)?.get(a)?;
                let (f2, alpha2, g2) = *triples.get(&m)?.get(b)?;
                let f3 = map.source.substitute(n, f, slot, m, f2)?;
                let g3 = map.target.substitute(n, g, slot, m, g2)?;
                let t = map.target.at(k);
                let ff3 = map.object(k, f3)?;
                let identities = |ar: usize, x: ArrowId| map.target.at(ar).identity(map.target.at(ar).src(x)) == x;
                let hom = t.hom(ff3, g3);
                let alpha3 = if identities(n, alpha) && identities(m, alpha2) && ff3 == g3 {
                    t.identity(g3)
                } else {
                    let isos: Vec<ArrowId> = hom.into_iter().filter(|&x| t.is_iso(x)).collect();
                    if isos.len() != 1 {
                        return None;
                    }
                    isos[0]
                };
                triples
                    .get(&k)?
                    .iter()
                    .position(|&x| x == (f3, alpha3, g3))
            }
            Origin::Derived => None,
        }
    }
}

/// A morphism of truncated theories: one functor per arity.
#[derive(Clone, Debug)]
pub struct CellMap {
    pub label: String,
    pub source: Arc<TruncatedTheory>,
    pub target: Arc<TruncatedTheory>,
    pub per_arity: BTreeMap<usize, Functor>,
    /// Arities whose functor could not be computed, with the reason.
    pub missing: BTreeMap<usize, String>,
}

impl CellMap {
    /// The restriction of a theory-morphism to the given truncations.
    pub fn from_morphism(f: &TheoryMorphism, source: Arc<TruncatedTheory>, target: Arc<TruncatedTheory>) -> Result<Self> {
        let functor = f.functor()?;
        let mut per_arity = BTreeMap::new();
        let mut missing = BTreeMap::new();
        for n in source.arities().collect::<Vec<_>>() {
            let (Some(s), Some(t)) = (source.hom(n), target.hom(n)) else {
                return Err(Error::Hypothesis("theories must come from presentations".into()));
            };
            match restrict(&functor, s, t) {
                Ok(r) => {
                    per_arity.insert(n, r);
                }
                Err(e) => {
                    missing.insert(n, e.to_string());
                }
            }
        }
        Ok(CellMap {
            label: f.name.clone(),
            source,
            target,
            per_arity,
            missing,
        })
    }

    /// Truncates both ends of `f` at `b` and restricts.
    pub fn of_morphism(f: &TheoryMorphism, b: &Bound) -> Result<Self> {
        let s = Arc::new(TruncatedTheory::presented(&f.source, b)?);
        let t = Arc::new(TruncatedTheory::presented(&f.target, b)?);
        Self::from_morphism(f, s, t)
    }

    pub fn identity(t: Arc<TruncatedTheory>) -> Self {
        let per_arity = t.per_arity.iter().map(|(&n, c)| (n, Functor::identity(c))).collect();
        CellMap {
            label: format!("id({})", t.label),
            source: t.clone(),
            target: t,
            per_arity,
            missing: BTreeMap::new(),
        }
    }

    pub fn functor(&self, n: usize) -> Option<&Functor> {
        self.per_arity.get(&n)
    }

    pub fn object(&self, n: usize, a: usize) -> Option<usize> {
        self.per_arity.get(&n).map(|f| f.objects[a])
    }

    pub fn arrow(&self, n: usize, x: ArrowId) -> Option<ArrowId> {
        self.per_arity.get(&n)?.arrow(x, self.source.at(n), self.target.at(n))
    }

    /// `self` then `next`.
    pub fn then(&self, next: &CellMap) -> Result<CellMap> {
        if *self.target != *next.source {
            return Err(Error::Hypothesis(format!(
                "{} ends in {} but {} starts in {}",
                self.label, self.target.label, next.label, next.source.label
            )));
        }
        let mut per_arity = BTreeMap::new();
        let mut missing = self.missing.clone();
        missing.extend(next.missing.clone());
        for (&n, f) in &self.per_arity {
            if let Some(g) = next.per_arity.get(&n) {
                per_arity.insert(n, f.then(g, self.source.at(n), self.target.at(n), next.target.at(n)));
            }
        }
        Ok(CellMap {
            label: format!("{} ; {}", self.label, next.label),
            source: self.source.clone(),
            target: next.target.clone(),
            per_arity,
            missing,
        })
    }

    /// Equal on every object and arrow of every arity.
    pub fn agrees_with(&self, other: &CellMap) -> std::result::Result<(), String> {
        if *self.source != *other.source || *self.target != *other.target {
            return Err("different boundaries".into());
        }
        for n in self.source.arities() {
            let (Some(f), Some(g)) = (self.per_arity.get(&n), other.per_arity.get(&n)) else {
                return Err(format!("arity {n} undetermined"));
            };
            let c = self.source.at(n);
            let d = self.target.at(n);
            for a in 0..c.len() {
                if f.objects[a] != g.objects[a] {
                    return Err(format!("arity {n}: objects differ at {}", c.objects[a]));
                }
            }
            for x in c.arrows() {
                if f.arrow(x, c, d) != g.arrow(x, c, d) {
                    return Err(format!("arity {n}: arrows differ at {}", c.label(x)));
                }
            }
        }
        Ok(())
    }
}
