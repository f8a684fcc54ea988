//! Finite categories with explicit or implicit composition.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::verdict::{Certificate, Verdict};

pub type ArrowId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    pub identities: Vec<ArrowId>,
    pub homs: BTreeMap<(usize, usize), Vec<ArrowId>>,
    /// `(f, g) -> f then g`; absent when the composite was truncated away.
    pub compose: HashMap<(ArrowId, ArrowId), ArrowId>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    /// Exactly one arrow, an isomorphism, between objects of the same
    /// component; arrow `a -> b` has id `a * n + b`.
    Thin { component: Vec<usize> },
    Explicit(Table),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    pub objects: Vec<String>,
    pub structure: Structure,
    /// Some composites fall outside the truncation and are undefined.
    pub partial: bool,
    /// Some arrows may be equal without the engine being able to tell.
    pub unknown: bool,
    pub warnings: Vec<String>,
}

impl FiniteCategory {
    pub fn discrete(objects: Vec<String>) -> Self {
        let n = objects.len();
        FiniteCategory::thin(objects, (0..n).collect())
    }

    pub fn thin(objects: Vec<String>, component: Vec<usize>) -> Self {
        FiniteCategory {
            objects,
            structure: Structure::Thin { component },
            partial: false,
            unknown: false,
            warnings: Vec::new(),
        }
    }

    pub fn explicit(objects: Vec<String>, table: Table) -> Self {
        FiniteCategory {
            objects,
            structure: Structure::Explicit(table),
            partial: false,
            unknown: false,
            warnings: Vec::new(),
        }
    }

    /// A category from arrows and a composition function, identities first.
    pub fn from_fn(
        objects: Vec<String>,
        arrows: Vec<(usize, usize, String)>,
        identities: Vec<ArrowId>,
        compose: impl Fn(ArrowId, ArrowId) -> Option<ArrowId>,
    ) -> Self {
        let mut homs: BTreeMap<(usize, usize), Vec<ArrowId>> = BTreeMap::new();
        for (i, (a, b, _)) in arrows.iter().enumerate() {
            homs.entry((*a, *b)).or_default().push(i);
        }
        let mut table = HashMap::new();
        let mut partial = false;
        for (f, (_, b, _)) in arrows.iter().enumerate() {
            for (g, (b2, _, _)) in arrows.iter().enumerate() {
                if b == b2 {
                    match compose(f, g) {
                        Some(h) => {
                            table.insert((f, g), h);
                        }
                        None => partial = true,
                    }
                }
            }
        }
        let mut c = FiniteCategory::explicit(
            objects,
            Table {
                src: arrows.iter().map(|a| a.0).collect(),
                dst: arrows.iter().map(|a| a.1).collect(),
                identities,
                homs,
                compose: table,
                labels: arrows.into_iter().map(|a| a.2).collect(),
            },
        );
        c.partial = partial;
        c
    }

    /// Disjoint groupoid components, each with a cyclic automorphism group
    /// of the given order.
    pub fn groupoid(components: &[(usize, usize)]) -> Self {
        let mut objects = Vec::new();
        let mut arrows = Vec::new();
        let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
        let mut identities = Vec::new();
        let mut order = Vec::new();
        let mut first = 0;
        for &(size, k) in components {
            for a in first..first + size {
                objects.push(format!("x{a}"));
                order.push(k);
            }
            for a in first..first + size {
                for b in first..first + size {
                    for i in 0..k {
                        index.insert((a, b, i), arrows.len());
                        arrows.push((a, b, format!("x{a}->x{b}^{i}")));
                    }
                }
            }
            first += size;
        }
        for a in 0..objects.len() {
            identities.push(index[&(a, a, 0)]);
        }
        let info: Vec<(usize, usize, usize)> = arrows
            .iter()
            .map(|(a, b, l)| {
                let i = l.rsplit('^').next().and_then(|x| x.parse().ok()).unwrap_or(0);
                (*a, *b, i)
            })
            .collect();
        FiniteCategory::from_fn(objects, arrows, identities, |f, g| {
            let (a, _, i) = info[f];
            let (_, c, j) = info[g];
            index.get(&(a, c, (i + j) % order[a])).copied()
        })
    }

    /// The preorder on `n` objects generated by `edges`.
    pub fn preorder(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut reach = vec![vec![false; n]; n];
        for (a, row) in reach.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in edges {
            reach[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let mut arrows = Vec::new();
        let mut index = HashMap::new();
        for (a, row) in reach.iter().enumerate() {
            for (b, &r) in row.iter().enumerate() {
                if r {
                    index.insert((a, b), arrows.len());
                    arrows.push((a, b, format!("p{a}<={b}")));
                }
            }
        }
        let identities = (0..n).map(|a| index[&(a, a)]).collect();
        let ends: Vec<(usize, usize)> = arrows.iter().map(|(a, b, _)| (*a, *b)).collect();
        FiniteCategory::from_fn(
            (0..n).map(|a| format!("p{a}")).collect(),
            arrows,
            identities,
            |f, g| index.get(&(ends[f].0, ends[g].1)).copied(),
        )
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn is_thin(&self) -> bool {
        matches!(self.structure, Structure::Thin { .. })
    }

    pub fn arrow_count(&self) -> usize {
        match &self.structure {
            Structure::Thin { component } => {
                let mut sizes: HashMap<usize, usize> = HashMap::new();
                for &c in component {
                    *sizes.entry(c).or_default() += 1;
                }
                sizes.values().map(|s| s * s).sum()
            }
            Structure::Explicit(t) => t.src.len(),
        }
    }

    /// All arrows in (source, target, class) order.
    pub fn arrows(&self) -> Vec<ArrowId> {
        let n = self.len();
        match &self.structure {
            Structure::Thin { component } => {
                let mut out = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        if component[a] == component[b] {
                            out.push(a * n + b);
                        }
                    }
                }
                out
            }
            Structure::Explicit(t) => t.homs.values().flatten().copied().collect(),
        }
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<ArrowId> {
        match &self.structure {
            Structure::Thin { component } => {
                if component[a] == component[b] {
                    vec![a * self.len() + b]
                } else {
                    Vec::new()
                }
            }
            Structure::Explicit(t) => t.homs.get(&(a, b)).cloned().unwrap_or_default(),
        }
    }

    pub fn src(&self, f: ArrowId) -> usize {
        match &self.structure {
            Structure::Thin { .. } => f / self.len(),
            Structure::Explicit(t) => t.src[f],
        }
    }

    pub fn dst(&self, f: ArrowId) -> usize {
        match &self.structure {
            Structure::Thin { .. } => f % self.len(),
            Structure::Explicit(t) => t.dst[f],
        }
    }

    pub fn identity(&self, a: usize) -> ArrowId {
        match &self.structure {
            Structure::Thin { .. } => a * self.len() + a,
            Structure::Explicit(t) => t.identities[a],
        }
    }

    /// `f` then `g`.
    pub fn then(&self, f: ArrowId, g: ArrowId) -> Option<ArrowId> {
        if self.dst(f) != self.src(g) {
            return None;
        }
        match &self.structure {
            Structure::Thin { .. } => Some(self.src(f) * self.len() + self.dst(g)),
            Structure::Explicit(t) => t.compose.get(&(f, g)).copied(),
        }
    }

    pub fn inverse(&self, f: ArrowId) -> Option<ArrowId> {
        let (a, b) = (self.src(f), self.dst(f));
        match &self.structure {
            Structure::Thin { .. } => Some(b * self.len() + a),
            Structure::Explicit(_) => self.hom(b, a).into_iter().find(|&g| {
                self.then(f, g) == Some(self.identity(a)) && self.then(g, f) == Some(self.identity(b))
            }),
        }
    }

    pub fn is_iso(&self, f: ArrowId) -> bool {
        self.inverse(f).is_some()
    }

    pub fn label(&self, f: ArrowId) -> String {
        match &self.structure {
            Structure::Thin { .. } => format!("{}->{}", self.src(f), self.dst(f)),
            Structure::Explicit(t) => t.labels[f].clone(),
        }
    }

    /// Objects grouped by isomorphism, groups and members in index order.
    pub fn iso_classes(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut class = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for a in 0..n {
            if class[a] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![a];
            class[a] = c;
            for b in a + 1..n {
                if class[b] == usize::MAX && self.hom(a, b).iter().any(|&f| self.is_iso(f)) {
                    class[b] = c;
                    members.push(b);
                }
            }
            out.push(members);
        }
        out
    }

    /// Identity, unit and associativity laws wherever composites exist.
    pub fn check_axioms(&self) -> Verdict {
        let Structure::Explicit(t) = &self.structure else {
            return Verdict::holds("thin groupoid");
        };
        let fail = |what: &str, detail: String| {
            Verdict::fails_with(
                format!("{what} law fails"),
                Certificate::Instance {
                    name: what.to_string(),
                    detail,
                },
            )
        };
        for (a, &i) in t.identities.iter().enumerate() {
            if t.src[i] != a || t.dst[i] != a {
                return fail("identity", format!("identity of object {a}"));
            }
        }
        for f in 0..t.src.len() {
            let ia = t.identities[t.src[f]];
            let ib = t.identities[t.dst[f]];
            if self.then(ia, f) != Some(f) || self.then(f, ib) != Some(f) {
                return fail("unit", t.labels[f].clone());
            }
        }
        for (&(f, g), &fg) in &t.compose {
            if t.src[fg] != t.src[f] || t.dst[fg] != t.dst[g] {
                return fail("composite endpoints", format!("{} ; {}", t.labels[f], t.labels[g]));
            }
            for &h in self.out_arrows(t.dst[g]).iter() {
                let (Some(l), Some(r)) = (self.then(fg, h), self.then(g, h).and_then(|gh| self.then(f, gh)))
                else {
                    continue;
                };
                if l != r {
                    return fail(
                        "associativity",
                        format!("{} ; {} ; {}", t.labels[f], t.labels[g], t.labels[h]),
                    );
                }
            }
        }
        Verdict::holds("category laws verified on the tables")
    }

    fn out_arrows(&self, a: usize) -> Vec<ArrowId> {
        (0..self.len()).flat_map(|b| self.hom(a, b)).collect()
    }

    /// Materializes composition as a table.
    pub fn to_explicit(&self) -> FiniteCategory {
        if !self.is_thin() {
            return self.clone();
        }
        let ids = self.arrows();
        let pos: HashMap<ArrowId, usize> = ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let arrows = ids
            .iter()
            .map(|&f| (self.src(f), self.dst(f), self.label(f)))
            .collect();
        let identities = (0..self.len()).map(|a| pos[&self.identity(a)]).collect();
        let mut c = FiniteCategory::from_fn(self.objects.clone(), arrows, identities, |f, g| {
            self.then(ids[f], ids[g]).map(|h| pos[&h])
        });
        c.unknown = self.unknown;
        c.warnings = self.warnings.clone();
        c
    }

    /// Product of categories; object `(a_1, ..., a_m)` has index
    /// `a_1 * n_2 * ... + a_m`.
    pub fn product(parts: &[&FiniteCategory]) -> FiniteCategory {
        let mut objects = vec![String::new()];
        let mut first = true;
        for p in parts {
            objects = objects
                .iter()
                .flat_map(|prefix| {
                    p.objects.iter().map(move |o| {
                        if first {
                            o.clone()
                        } else {
                            format!("{prefix} | {o}")
                        }
                    })
                })
                .collect();
            first = false;
        }
        let dims: Vec<usize> = parts.iter().map(|p| p.len()).collect();
        let decode = |mut x: usize| {
            let mut out = vec![0; dims.len()];
            for i in (0..dims.len()).rev() {
                out[i] = x % dims[i];
                x /= dims[i];
            }
            out
        };
        let flags = (
            parts.iter().any(|p| p.partial),
            parts.iter().any(|p| p.unknown),
            parts.iter().flat_map(|p| p.warnings.clone()).collect::<Vec<_>>(),
        );
        if parts.iter().all(|p| p.is_thin()) {
            let comps: Vec<&Vec<usize>> = parts
                .iter()
                .map(|p| match &p.structure {
                    Structure::Thin { component } => component,
                    Structure::Explicit(_) => unreachable!(),
                })
                .collect();
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let component = (0..objects.len())
                .map(|x| {
                    let key: Vec<usize> = decode(x).iter().zip(&comps).map(|(a, c)| c[*a]).collect();
                    let n = ids.len();
                    *ids.entry(key).or_insert(n)
                })
                .collect();
            let mut c = FiniteCategory::thin(objects, component);
            (c.partial, c.unknown, c.warnings) = flags;
            return c;
        }
        let ex: Vec<FiniteCategory> = parts.iter().map(|p| p.to_explicit()).collect();
        let mut arrows = Vec::new();
        let mut tuples: Vec<Vec<ArrowId>> = vec![Vec::new()];
        for p in &ex {
            tuples = tuples
                .iter()
                .flat_map(|t| {
                    p.arrows().into_iter().map(move |f| {
                        let mut t = t.clone();
                        t.push(f);
                        t
                    })
                })
                .collect();
        }
        let encode = |xs: &[usize]| xs.iter().zip(&dims).fold(0, |acc, (x, d)| acc * d + x);
        let mut index = HashMap::new();
        for t in &tuples {
            let s: Vec<usize> = t.iter().zip(&ex).map(|(f, p)| p.src(*f)).collect();
            let d: Vec<usize> = t.iter().zip(&ex).map(|(f, p)| p.dst(*f)).collect();
            let label = t.iter().zip(&ex).map(|(f, p)| p.label(*f)).collect::<Vec<_>>().join(" | ");
            index.insert(t.clone(), arrows.len());
            arrows.push((encode(&s), encode(&d), label));
        }
        let identities = (0..objects.len())
            .map(|x| {
                let t: Vec<ArrowId> = decode(x).iter().zip(&ex).map(|(a, p)| p.identity(*a)).collect();
                index[&t]
            })
            .collect();
        let mut c = FiniteCategory::from_fn(objects, arrows, identities, |f, g| {
            let tf = &tuples[f];
            let tg = &tuples[g];
            let h = tf
                .iter()
                .zip(tg)
                .zip(&ex)
                .map(|((a, b), p)| p.then(*a, *b))
                .collect::<Option<Vec<_>>>()?;
            index.get(&h).copied()
        });
        c.partial |= flags.0;
        c.unknown = flags.1;
        c.warnings = flags.2;
        c
    }

    /// Disjoint union: objects of `a` first, then of `b`.
    pub fn coproduct(a: &FiniteCategory, b: &FiniteCategory) -> FiniteCategory {
        Self::coproduct_with_injections(a, b).0
    }

    /// Disjoint union with the arrow maps of both injections.
    pub fn coproduct_with_injections(
        a: &FiniteCategory,
        b: &FiniteCategory,
    ) -> (FiniteCategory, BTreeMap<ArrowId, ArrowId>, BTreeMap<ArrowId, ArrowId>) {
        let c = Self::coproduct_inner(a, b);
        let na = a.len();
        let inj = |cat: &FiniteCategory, shift: usize| -> BTreeMap<ArrowId, ArrowId> {
            cat.arrows()
                .into_iter()
                .map(|f| {
                    let (x, y) = (cat.src(f) + shift, cat.dst(f) + shift);
                    let pos = cat.hom(cat.src(f), cat.dst(f)).iter().position(|&g| g == f).expect("in hom");
                    (f, c.hom(x, y)[pos])
                })
                .collect()
        };
        let ia = inj(a, 0);
        let ib = inj(b, na);
        (c, ia, ib)
    }

    fn coproduct_inner(a: &FiniteCategory, b: &FiniteCategory) -> FiniteCategory {
        let objects: Vec<String> = a.objects.iter().chain(&b.objects).cloned().collect();
        if let (Structure::Thin { component: ca }, Structure::Thin { component: cb }) = (&a.structure, &b.structure) {
            let shift = ca.iter().max().map_or(0, |m| m + 1);
            let component = ca.iter().copied().chain(cb.iter().map(|c| c + shift)).collect();
            let mut c = FiniteCategory::thin(objects, component);
            c.unknown = a.unknown || b.unknown;
            return c;
        }
        let (ea, eb) = (a.to_explicit(), b.to_explicit());
        let na = ea.len();
        let aa = ea.arrows();
        let ab = eb.arrows();
        let mut arrows = Vec::new();
        let mut index = HashMap::new();
        for &f in &aa {
            index.insert((0, f), arrows.len());
            arrows.push((ea.src(f), ea.dst(f), ea.label(f)));
        }
        for &f in &ab {
            index.insert((1, f), arrows.len());
            arrows.push((eb.src(f) + na, eb.dst(f) + na, eb.label(f)));
        }
        let back: Vec<(usize, ArrowId)> = aa.iter().map(|&f| (0, f)).chain(ab.iter().map(|&f| (1, f))).collect();
        let identities = (0..na)
            .map(|x| index[&(0, ea.identity(x))])
            .chain((0..eb.len()).map(|x| index[&(1, eb.identity(x))]))
            .collect();
        let mut c = FiniteCategory::from_fn(objects, arrows, identities, |f, g| {
            let (sf, f0) = back[f];
            let (sg, g0) = back[g];
            if sf != sg {
                return None;
            }
            let cat = if sf == 0 { &ea } else { &eb };
            cat.then(f0, g0).map(|h| index[&(sf, h)])
        });
        c.partial = a.partial || b.partial;
        c.unknown = a.unknown || b.unknown;
        c
    }

    /// The full subcategory on `objects`, with its inclusion functor.
    pub fn full_subcategory(&self, objects: &[usize]) -> (FiniteCategory, Functor) {
        let names = objects.iter().map(|&o| self.objects[o].clone()).collect();
        if let Structure::Thin { component } = &self.structure {
            let comp = objects.iter().map(|&o| component[o]).collect();
            let sub = FiniteCategory::thin(names, comp);
            let f = Functor::induced(objects.to_vec());
            return (sub, f);
        }
        let mut arrows = Vec::new();
        let mut orig = Vec::new();
        let mut index = HashMap::new();
        for (i, &a) in objects.iter().enumerate() {
            for (j, &b) in objects.iter().enumerate() {
                for f in self.hom(a, b) {
                    index.insert(f, arrows.len());
                    orig.push(f);
                    arrows.push((i, j, self.label(f)));
                }
            }
        }
        let identities = objects.iter().map(|&o| index[&self.identity(o)]).collect();
        let mut sub = FiniteCategory::from_fn(names, arrows, identities, |f, g| {
            self.then(orig[f], orig[g]).and_then(|h| index.get(&h).copied())
        });
        sub.partial |= self.partial;
        sub.unknown = self.unknown;
        let map = orig.iter().enumerate().map(|(i, &f)| (i, f)).collect();
        (sub, Functor::new(objects.to_vec(), map))
    }
}

/// A functor between finite categories.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Functor {
    pub objects: Vec<usize>,
    /// Arrow images; empty when every image is forced by thin targets.
    pub arrows: BTreeMap<ArrowId, ArrowId>,
    pub induced: bool,
}

impl Functor {
    pub fn new(objects: Vec<usize>, arrows: BTreeMap<ArrowId, ArrowId>) -> Self {
        Functor {
            objects,
            arrows,
            induced: false,
        }
    }

    /// A functor into a category with at most one arrow per hom.
    pub fn induced(objects: Vec<usize>) -> Self {
        Functor {
            objects,
            arrows: BTreeMap::new(),
            induced: true,
        }
    }

    pub fn identity(c: &FiniteCategory) -> Self {
        if c.is_thin() {
            return Functor::induced((0..c.len()).collect());
        }
        Functor::new((0..c.len()).collect(), c.arrows().into_iter().map(|f| (f, f)).collect())
    }

    pub fn arrow(&self, f: ArrowId, from: &FiniteCategory, to: &FiniteCategory) -> Option<ArrowId> {
        if self.induced {
            let h = to.hom(self.objects[from.src(f)], self.objects[from.dst(f)]);
            return (h.len() == 1).then(|| h[0]);
        }
        self.arrows.get(&f).copied()
    }

    /// `self` then `next`, materialized on the arrows of `a`.
    pub fn then(&self, next: &Functor, a: &FiniteCategory, b: &FiniteCategory, c: &FiniteCategory) -> Functor {
        let objects = self.objects.iter().map(|&x| next.objects[x]).collect();
        if self.induced && next.induced || c.is_thin() && next.induced {
            return Functor::induced(objects);
        }
        let arrows = a
            .arrows()
            .into_iter()
            .filter_map(|f| {
                let g = self.arrow(f, a, b)?;
                Some((f, next.arrow(g, b, c)?))
            })
            .collect();
        Functor::new(objects, arrows)
    }

    /// Endpoints, identities and composites preserved.
    pub fn check(&self, from: &FiniteCategory, to: &FiniteCategory) -> Result<()> {
        let bad = |m: String| Err(Error::Hypothesis(m));
        if self.objects.len() != from.len() || self.objects.iter().any(|&o| o >= to.len()) {
            return bad("object map has the wrong shape".into());
        }
        if self.induced && to.is_thin() {
            for f in from.arrows() {
                if self.arrow(f, from, to).is_none() {
                    return bad(format!("no image for {}", from.label(f)));
                }
            }
            return Ok(());
        }
        for f in from.arrows() {
            let Some(g) = self.arrow(f, from, to) else {
                return bad(format!("no image for {}", from.label(f)));
            };
            if to.src(g) != self.objects[from.src(f)] || to.dst(g) != self.objects[from.dst(f)] {
                return bad(format!("image of {} has wrong endpoints", from.label(f)));
            }
        }
        for a in 0..from.len() {
            if self.arrow(from.identity(a), from, to) != Some(to.identity(self.objects[a])) {
                return bad(format!("identity of {} not preserved", from.objects[a]));
            }
        }
        if !from.is_thin() {
            for f in from.arrows() {
                for b in 0..from.len() {
                    for g in from.hom(from.dst(f), b) {
                        let Some(fg) = from.then(f, g) else { continue };
                        let lhs = self.arrow(fg, from, to);
                        let rhs = to.then(self.arrow(f, from, to).unwrap(), self.arrow(g, from, to).unwrap());
                        if rhs.is_some() && lhs != rhs {
                            return bad(format!(
                                "composite {} ; {} not preserved",
                                from.label(f),
                                from.label(g)
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn injective_on_objects(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.objects.iter().all(|o| seen.insert(*o))
    }
}
