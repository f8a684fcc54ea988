//! Truncated hom-categories T(1,n) and T(m,n).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::category::{ArrowId, FiniteCategory, Structure};
use crate::error::{Error, Result};
use crate::presentation::TheoryPresentation;
use crate::rewrite::tietze::{self, Word};
use crate::rewrite::{Complex, Engine, Homotopy, RewriteStep, TwoCellPath};
use crate::term::{enumerate_planar, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub max_arity: usize,
    pub max_term_size: usize,
    pub max_path_length: usize,
}

impl Default for Bound {
    fn default() -> Self {
        Bound {
            max_arity: 4,
            max_term_size: 8,
            max_path_length: 16,
        }
    }
}

pub const BOUND_ENV: &str = "COHERENCE_FORGE_BOUND";

impl Bound {
    pub fn new(max_arity: usize, max_term_size: usize, max_path_length: usize) -> Result<Self> {
        if max_arity == 0 || max_term_size == 0 || max_path_length == 0 {
            return Err(Error::BoundExceeded("bound components must be positive".into()));
        }
        Ok(Bound {
            max_arity,
            max_term_size,
            max_path_length,
        })
    }

    /// Parses `arity,size,path` or `arity=4,size=8,path=16`; missing parts
    /// keep their defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let mut b = Bound::default();
        let bad = || Error::BoundExceeded(format!("cannot read bound `{s}`"));
        for (i, part) in s.split(',').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
            let (key, value) = match part.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (["arity", "size", "path"].get(i).copied().ok_or_else(bad)?, part),
            };
            let v: usize = value.parse().map_err(|_| bad())?;
            match key {
                "arity" | "max-arity" => b.max_arity = v,
                "size" | "max-term-size" => b.max_term_size = v,
                "path" | "max-path-len" => b.max_path_length = v,
                _ => return Err(bad()),
            }
        }
        Bound::new(b.max_arity, b.max_term_size, b.max_path_length)
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var(BOUND_ENV) {
            Ok(s) => Bound::parse(&s),
            Err(_) => Ok(Bound::default()),
        }
    }
}

/// Vertices allowed in one hom-category's rewrite complex.
const MAX_VERTICES: usize = 20_000;
/// (vertex, class) states explored per source object.
const MAX_CLASS_STATES: usize = 200_000;
/// Paths enumerated per source object without invertibility.
const MAX_PATHS: usize = 5_000;

#[derive(Clone, Debug)]
enum Repr {
    Discrete,
    /// Classes are group elements of the complex's fundamental groupoid.
    Groupoid {
        complex: Complex,
        homotopy: Homotopy,
        words: Vec<Word>,
        index: HashMap<(usize, usize, Word), ArrowId>,
    },
    /// Classes are representative paths compared by the equality engine.
    Paths { complex: Complex, reps: Vec<Vec<RewriteStep>> },
}

/// A hom-category of a presented theory, with the rewrite data needed to
/// name its arrows by paths.
#[derive(Clone, Debug)]
pub struct HomCategory {
    pub arity: usize,
    pub terms: Vec<Term>,
    pub category: FiniteCategory,
    pub bound: Bound,
    pub truncated: bool,
    pub engine: Engine,
    repr: Repr,
}

pub fn hom_category(p: &TheoryPresentation, n: usize, b: &Bound) -> Result<HomCategory> {
    if n > b.max_arity {
        return Err(Error::BoundExceeded(format!("arity {n} above bound {}", b.max_arity)));
    }
    let engine = Engine::new(p)?;
    let mut seeds = Vec::new();
    for t in enumerate_planar(&p.signature(), n, b.max_term_size) {
        let nf = engine.normalize(&t)?;
        if nf.size() <= b.max_term_size {
            seeds.push(nf);
        }
    }
    seeds.sort();
    seeds.dedup();
    if p.cells.is_empty() {
        let category = FiniteCategory::discrete(seeds.iter().map(ToString::to_string).collect());
        return Ok(HomCategory {
            arity: n,
            terms: seeds,
            category,
            bound: *b,
            truncated: false,
            engine,
            repr: Repr::Discrete,
        });
    }
    let with_faces = !p.indiscrete;
    let complex = Complex::build(&engine, &seeds, b.max_term_size, MAX_VERTICES, with_faces)?;
    let terms = complex.vertices.clone();
    let names: Vec<String> = terms.iter().map(ToString::to_string).collect();
    let truncated = complex.truncated;
    let mut warnings = Vec::new();
    if truncated {
        warnings.push(format!("vertex budget {MAX_VERTICES} reached; objects truncated"));
    }
    if !p.all_invertible() {
        return paths_category(engine, complex, names, n, b, warnings);
    }
    let mut homotopy = Homotopy::new(&complex);
    homotopy.resolve_all();
    let comps = homotopy.components.len();
    let simple: Vec<bool> = (0..comps).map(|c| p.indiscrete || homotopy.rank(c) == 0).collect();
    let mut category;
    let mut words = Vec::new();
    let mut index = HashMap::new();
    if simple.iter().all(|s| *s) {
        category = FiniteCategory::thin(names, homotopy.component.clone());
    } else {
        let mut arrows: Vec<(usize, usize, String)> = Vec::new();
        let mut partial = false;
        let mut identities = vec![0; terms.len()];
        for c in 0..comps {
            let members = &homotopy.components[c];
            let open = members.iter().any(|&v| complex.open[v]);
            if !simple[c] && (open || !homotopy.is_free(c)) {
                warnings.push(format!(
                    "component of {}: {} classes may coincide",
                    complex.vertices[members[0]],
                    if open { "paths leave the bound;" } else { "non-free fundamental group;" }
                ));
            }
            for &a in members {
                let found = if simple[c] {
                    members.iter().map(|&v| (v, Vec::new())).collect()
                } else {
                    let (found, cut) = classes_from(&complex, &homotopy, a, b.max_path_length);
                    partial |= cut;
                    found
                };
                for (v, w) in found {
                    if a == v && w.is_empty() {
                        identities[a] = arrows.len();
                    }
                    index.insert((a, v, w.clone()), arrows.len());
                    let label = if w.is_empty() { "e".to_string() } else { tietze::render_word(&w).join(" ") };
                    arrows.push((a, v, label));
                    words.push(w);
                }
            }
        }
        let ends: Vec<(usize, usize)> = arrows.iter().map(|a| (a.0, a.1)).collect();
        let ws = words.clone();
        let idx = index.clone();
        category = FiniteCategory::from_fn(names, arrows, identities, |f, g| {
            let mut w = ws[f].clone();
            w.extend_from_slice(&ws[g]);
            idx.get(&(ends[f].0, ends[g].1, tietze::reduce(&w))).copied()
        });
        category.partial |= partial;
        if category.partial {
            warnings.push(format!(
                "some composites exceed path length {} and are undefined",
                b.max_path_length
            ));
        }
        category.unknown = (0..comps).any(|c| {
            !simple[c] && (homotopy.components[c].iter().any(|&v| complex.open[v]) || !homotopy.is_free(c))
        });
    }
    category.warnings = warnings;
    Ok(HomCategory {
        arity: n,
        terms,
        category,
        bound: *b,
        truncated,
        engine,
        repr: Repr::Groupoid {
            complex,
            homotopy,
            words,
            index,
        },
    })
}

/// Group elements reachable from `a` by paths of at most `max_len` steps,
/// per endpoint, in canonical order. The flag reports a cut-off search.
fn classes_from(cx: &Complex, h: &Homotopy, a: usize, max_len: usize) -> (Vec<(usize, Word)>, bool) {
    let mut seen: HashMap<(usize, Word), usize> = HashMap::new();
    seen.insert((a, Vec::new()), 0);
    let mut queue = VecDeque::from([(a, Vec::new(), 0usize)]);
    let mut cut = false;
    while let Some((v, w, d)) = queue.pop_front() {
        if d == max_len {
            continue;
        }
        let letters = cx.out[v]
            .iter()
            .map(|&e| (e, false))
            .chain(cx.inc[v].iter().map(|&e| (e, true)));
        for l in letters {
            let u = cx.letter_target(l);
            let mut nw = w.clone();
            nw.extend(h.element(&[l]));
            let nw = tietze::reduce(&nw);
            if seen.contains_key(&(u, nw.clone())) {
                continue;
            }
            if seen.len() >= MAX_CLASS_STATES {
                cut = true;
                break;
            }
            seen.insert((u, nw.clone()), d + 1);
            queue.push_back((u, nw, d + 1));
        }
    }
    let mut out: Vec<(usize, Word)> = seen.into_keys().collect();
    out.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.len().cmp(&y.1.len())).then(x.1.cmp(&y.1)));
    (out, cut)
}

fn paths_category(
    engine: Engine,
    complex: Complex,
    names: Vec<String>,
    n: usize,
    b: &Bound,
    mut warnings: Vec<String>,
) -> Result<HomCategory> {
    let nv = complex.vertices.len();
    let mut reps: Vec<Vec<RewriteStep>> = Vec::new();
    let mut arrows: Vec<(usize, usize, String)> = Vec::new();
    let mut identities = vec![0; nv];
    let mut unknown = false;
    let mut by_pair: BTreeMap<(usize, usize), Vec<ArrowId>> = BTreeMap::new();
    for a in 0..nv {
        let mut stack = vec![(a, Vec::<RewriteStep>::new())];
        let mut count = 0;
        while let Some((v, steps)) = stack.pop() {
            count += 1;
            if count > MAX_PATHS {
                warnings.push(format!("path enumeration cut at {MAX_PATHS} from {}", names[a]));
                break;
            }
            let classes = by_pair.entry((a, v)).or_default();
            let path = TwoCellPath {
                source: complex.vertices[a].clone(),
                target: complex.vertices[v].clone(),
                steps: steps.clone(),
            };
            let mut matched = false;
            for &c in classes.iter() {
                let other = TwoCellPath {
                    steps: reps[c].clone(),
                    ..path.clone()
                };
                let v = engine.equal(&path, &other, crate::rewrite::DEFAULT_BUDGET)?;
                if v.is_holds() {
                    matched = true;
                    break;
                }
                if v.is_unknown() {
                    unknown = true;
                }
            }
            if !matched {
                if steps.is_empty() {
                    identities[a] = arrows.len();
                }
                classes.push(arrows.len());
                arrows.push((a, v, crate::rewrite::render_steps(&steps)));
                reps.push(steps.clone());
            }
            if steps.len() < b.max_path_length {
                for &e in complex.out[v].iter().rev() {
                    let mut s = steps.clone();
                    s.push(complex.edges[e].step.clone());
                    stack.push((complex.edges[e].dst, s));
                }
            }
        }
    }
    let reps2 = reps.clone();
    let ends: Vec<(usize, usize)> = arrows.iter().map(|a| (a.0, a.1)).collect();
    let mut category = FiniteCategory::from_fn(names, arrows, identities, |f, g| {
        let mut steps = reps2[f].clone();
        steps.extend(reps2[g].iter().cloned());
        let path = TwoCellPath {
            source: complex.vertices[ends[f].0].clone(),
            target: complex.vertices[ends[g].1].clone(),
            steps,
        };
        by_pair.get(&(ends[f].0, ends[g].1))?.iter().copied().find(|&c| {
            let other = TwoCellPath {
                steps: reps2[c].clone(),
                ..path.clone()
            };
            engine
                .equal(&path, &other, crate::rewrite::DEFAULT_BUDGET)
                .map(|v| v.is_holds())
                .unwrap_or(false)
        })
    });
    category.unknown = unknown;
    if category.partial {
        warnings.push("some composites fall outside the enumerated classes".into());
    }
    category.warnings = warnings;
    let truncated = complex.truncated;
    Ok(HomCategory {
        arity: n,
        terms: complex.vertices.clone(),
        category,
        bound: *b,
        truncated,
        engine,
        repr: Repr::Paths { complex, reps },
    })
}

/// The m-fold product of T(1,n), computed on demand.
pub fn hom_mn(p: &TheoryPresentation, m: usize, n: usize, b: &Bound) -> Result<FiniteCategory> {
    if m == 0 {
        return Err(Error::BoundExceeded("m must be at least 1".into()));
    }
    let h = hom_category(p, n, b)?;
    let parts: Vec<&FiniteCategory> = (0..m).map(|_| &h.category).collect();
    Ok(FiniteCategory::product(&parts))
}

/// The functor a theory-morphism induces between two hom-categories of the
/// same arity.
pub fn restrict(
    f: &crate::morphism::Functor,
    src: &HomCategory,
    tgt: &HomCategory,
) -> Result<crate::category::Functor> {
    let mut objects = Vec::with_capacity(src.terms.len());
    for t in &src.terms {
        let img = f.image(t)?;
        let o = tgt
            .object(&img)
            .ok_or_else(|| Error::BoundExceeded(format!("image {img} of {t} lies outside the truncation")))?;
        objects.push(o);
    }
    let (c, d) = (&src.category, &tgt.category);
    let out = if d.is_thin() {
        crate::category::Functor::induced(objects)
    } else {
        let mut arrows = BTreeMap::new();
        for x in c.arrows() {
            let path = f.path(&src.representative(x))?;
            let y = tgt
                .classify_path(&path)
                .ok_or_else(|| Error::BoundExceeded(format!("image of {} lies outside the truncation", c.label(x))))?;
            arrows.insert(x, y);
        }
        crate::category::Functor::new(objects, arrows)
    };
    out.check(c, d)?;
    Ok(out)
}

impl HomCategory {
    pub fn object(&self, t: &Term) -> Option<usize> {
        self.terms.binary_search(t).ok()
    }

    pub fn has_cells(&self) -> bool {
        !matches!(self.repr, Repr::Discrete)
    }

    pub fn complex(&self) -> Option<&Complex> {
        match &self.repr {
            Repr::Discrete => None,
            Repr::Groupoid { complex, .. } | Repr::Paths { complex, .. } => Some(complex),
        }
    }

    /// A path representing an arrow.
    pub fn representative(&self, f: ArrowId) -> TwoCellPath {
        let c = &self.category;
        let (a, b) = (c.src(f), c.dst(f));
        let steps = match &self.repr {
            Repr::Discrete => Vec::new(),
            Repr::Groupoid {
                complex,
                homotopy,
                words,
                ..
            } => {
                let w: &[i32] = match &c.structure {
                    Structure::Thin { .. } => &[],
                    Structure::Explicit(_) => &words[f],
                };
                complex.steps_of(&homotopy.realize(complex, a, b, w))
            }
            Repr::Paths { reps, .. } => reps[f].clone(),
        };
        TwoCellPath {
            source: self.terms[a].clone(),
            target: self.terms[b].clone(),
            steps,
        }
    }

    /// The arrow whose class contains `path`, if it lies in the truncation.
    pub fn classify_path(&self, path: &TwoCellPath) -> Option<ArrowId> {
        let a = self.object(&self.engine.normalize(&path.source).ok()?)?;
        let b = self.object(&self.engine.normalize(&path.target).ok()?)?;
        match &self.repr {
            Repr::Discrete => path.steps.is_empty().then(|| self.category.identity(a)).filter(|_| a == b),
            Repr::Groupoid {
                complex,
                homotopy,
                index,
                ..
            } => {
                let letters = complex.word_between(&self.engine, a, Some(b), &path.steps)?;
                match &self.category.structure {
                    Structure::Thin { .. } => self.category.hom(a, b).first().copied(),
                    Structure::Explicit(_) => index.get(&(a, b, homotopy.element(&letters))).copied(),
                }
            }
            Repr::Paths { reps, .. } => self.category.hom(a, b).into_iter().find(|&c| {
                let other = TwoCellPath {
                    steps: reps[c].clone(),
                    ..path.clone()
                };
                self.engine
                    .equal(path, &other, crate::rewrite::DEFAULT_BUDGET)
                    .map(|v| v.is_holds())
                    .unwrap_or(false)
            }),
        }
    }

    /// Arrows given by a single forward step.
    fn generator_edges(&self) -> Vec<(usize, usize, String, bool)> {
        let Some(cx) = self.complex() else { return Vec::new() };
        let mut out = Vec::new();
        for e in &cx.edges {
            let inv = self
                .engine
                .cell(&e.step.cell)
                .map(|c| c.invertible)
                .unwrap_or(false);
            out.push((e.src, e.dst, e.step.to_string(), inv));
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"T(1,{})\" {{", self.arity);
        for (i, t) in self.terms.iter().enumerate() {
            let _ = writeln!(out, "  o{i} [label=\"{t}\"];");
        }
        for (a, b, label, inv) in self.generator_edges() {
            let dir = if inv { " dir=both" } else { "" };
            let _ = writeln!(out, "  o{a} -> o{b} [label=\"{label}\"{dir}];");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let c = &self.category;
        let mut homs = Vec::new();
        for a in 0..c.len() {
            for b in 0..c.len() {
                let h = c.hom(a, b);
                if h.is_empty() {
                    continue;
                }
                let classes: Vec<String> = h.iter().map(|&f| self.representative(f).render()).collect();
                homs.push(serde_json::json!({ "src": a, "dst": b, "classes": classes }));
            }
        }
        serde_json::json!({
            "arity": self.arity,
            "objects": self.terms.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "homs": homs,
            "truncation": self.bound,
            "unknown": c.unknown,
            "partial": c.partial,
            "warnings": c.warnings,
        })
    }
}

/// DOT for a category without rewrite data: every non-identity class is an
/// edge, an inverse pair drawn once.
pub fn category_dot(name: &str, c: &FiniteCategory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    for (i, o) in c.objects.iter().enumerate() {
        let _ = writeln!(out, "  o{i} [label=\"{o}\"];");
    }
    for f in c.arrows() {
        let (a, b) = (c.src(f), c.dst(f));
        if f == c.identity(a) {
            continue;
        }
        let iso = c.inverse(f);
        if a > b && iso.is_some() {
            continue;
        }
        let dir = if iso.is_some() { " dir=both" } else { "" };
        let _ = writeln!(out, "  o{a} -> o{b} [label=\"{}\"{dir}];", c.label(f));
    }
    out.push_str("}\n");
    out
}

pub fn category_json(c: &FiniteCategory) -> serde_json::Value {
    let mut homs = Vec::new();
    for a in 0..c.len() {
        for b in 0..c.len() {
            let h = c.hom(a, b);
            if !h.is_empty() {
                let classes: Vec<String> = h.iter().map(|&f| c.label(f)).collect();
                homs.push(serde_json::json!({ "src": a, "dst": b, "classes": classes }));
            }
        }
    }
    serde_json::json!({
        "objects": c.objects,
        "homs": homs,
        "unknown": c.unknown,
        "partial": c.partial,
        "warnings": c.warnings,
    })
}
