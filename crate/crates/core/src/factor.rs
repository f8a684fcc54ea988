//! Path-object and mapping-cylinder factorizations of a cell map.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;
use std::sync::Arc;

use serde_json::json;

use crate::category::{ArrowId, FiniteCategory, Functor};
use crate::cells::{CellMap, Origin, TruncatedTheory};
use crate::classify::{classify_cells, ClassificationReport};
use crate::error::{Error, Result};
use crate::homcat::{category_json, Bound};
use crate::lifting::{lift_square_second, Preference, Square};
use crate::morphism::TheoryMorphism;
use crate::verdict::Verdict;

#[derive(Clone, Debug)]
pub struct FactorizationResult {
    pub middle: Arc<TruncatedTheory>,
    pub into_middle: CellMap,
    pub out_of_middle: CellMap,
    pub reports: (ClassificationReport, ClassificationReport),
}

impl FactorizationResult {
    pub fn to_json(&self) -> serde_json::Value {
        let middle: BTreeMap<String, serde_json::Value> = self
            .middle
            .per_arity
            .iter()
            .map(|(n, c)| (n.to_string(), category_json(c)))
            .collect();
        let objects = |m: &CellMap| -> BTreeMap<String, Vec<usize>> {
            m.per_arity.iter().map(|(n, f)| (n.to_string(), f.objects.clone())).collect()
        };
        json!({
            "middle": {"label": self.middle.label, "perArity": middle},
            "intoMiddle": {"label": self.into_middle.label, "objects": objects(&self.into_middle)},
            "outOfMiddle": {"label": self.out_of_middle.label, "objects": objects(&self.out_of_middle)},
            "reports": [self.reports.0, self.reports.1],
        })
    }

    /// The middle at arity `n`. Arrows that factor through an object
    /// outside the image of the first leg are left out, and those objects
    /// are boxed.
    pub fn to_dot(&self, n: usize) -> Option<String> {
        let c = self.middle.per_arity.get(&n)?;
        let old: BTreeSet<usize> = self.into_middle.functor(n)?.objects.iter().copied().collect();
        let new: Vec<usize> = (0..c.len()).filter(|x| !old.contains(x)).collect();
        let through = |f: ArrowId| {
            let (a, b) = (c.src(f), c.dst(f));
            new.iter().filter(|&&m| m != a && m != b).any(|&m| {
                c.hom(a, m)
                    .into_iter()
                    .any(|g| c.hom(m, b).into_iter().any(|h| c.then(g, h) == Some(f)))
            })
        };
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}(1,{n})\" {{", self.middle.label);
        for (i, o) in c.objects.iter().enumerate() {
            let shape = if old.contains(&i) { "" } else { " shape=box" };
            let _ = writeln!(out, "  o{i} [label=\"{o}\"{shape}];");
        }
        for f in c.arrows() {
            let (a, b) = (c.src(f), c.dst(f));
            let iso = c.inverse(f);
            if f == c.identity(a) || (a > b && iso.is_some()) || through(f) {
                continue;
            }
            let dir = if iso.is_some() { " dir=both" } else { "" };
            let _ = writeln!(out, "  o{a} -> o{b} [label=\"{}\"{dir}];", c.label(f));
        }
        out.push_str("}\n");
        Some(out)
    }
}

fn check_input(f: &CellMap) -> Result<()> {
    if f.source.contaminated() || f.target.contaminated() {
        return Err(Error::BoundExceeded(format!(
            "hom-categories of {} are not decided within the bound",
            f.label
        )));
    }
    if let Some((n, why)) = f.missing.iter().next() {
        return Err(Error::BoundExceeded(format!("arity {n}: {why}")));
    }
    Ok(())
}

fn legs(middle: Arc<TruncatedTheory>, f: &CellMap, into: BTreeMap<usize, Functor>, out: BTreeMap<usize, Functor>, names: (&str, &str)) -> Result<(CellMap, CellMap)> {
    let k = CellMap {
        label: names.0.to_string(),
        source: f.source.clone(),
        target: middle.clone(),
        per_arity: into,
        missing: BTreeMap::new(),
    };
    let g = CellMap {
        label: names.1.to_string(),
        source: middle,
        target: f.target.clone(),
        per_arity: out,
        missing: BTreeMap::new(),
    };
    k.then(&g)?
        .agrees_with(f)
        .map_err(|m| Error::Inconsistent(format!("legs do not compose to {}: {m}", f.label)))?;
    Ok((k, g))
}

/// Objects `(f, alpha, g)` with `alpha: F f -> g` invertible; arrows are
/// those of the source between first components.
pub fn path_object(f: &CellMap) -> Result<FactorizationResult> {
    check_input(f)?;
    let mut per_arity = BTreeMap::new();
    let mut triples_all = BTreeMap::new();
    let mut into = BTreeMap::new();
    let mut out = BTreeMap::new();
    for n in f.source.arities() {
        let (c1, c2) = (f.source.at(n), f.target.at(n));
        let func = f.functor(n).expect("checked");
        let mut triples = Vec::new();
        for a in 0..c1.len() {
            let fa = func.objects[a];
            for g in 0..c2.len() {
                for alpha in c2.hom(fa, g) {
                    if c2.is_iso(alpha) {
                        triples.push((a, alpha, g));
                    }
                }
            }
        }
        let names: Vec<String> = triples
            .iter()
            .map(|&(a, alpha, g)| format!("({}, {}, {})", c1.objects[a], c2.label(alpha), c2.objects[g]))
            .collect();
        let index: HashMap<(usize, ArrowId, usize), usize> = triples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let k_objects: Vec<usize> = (0..c1.len())
            .map(|a| {
                let fa = func.objects[a];
                index[&(a, c2.identity(fa), fa)]
            })
            .collect();
        let g_objects: Vec<usize> = triples.iter().map(|t| t.2).collect();
        let (middle, k, g) = if let crate::category::Structure::Thin { component } = &c1.structure {
            let comp = triples.iter().map(|t| component[t.0]).collect();
            let m = FiniteCategory::thin(names, comp);
            let g = if c2.is_thin() {
                Functor::induced(g_objects)
            } else {
                let mut arrows = BTreeMap::new();
                for x in m.arrows() {
                    let (p, q) = (m.src(x), m.dst(x));
                    let (a, alpha, _) = triples[p];
                    let (b, beta, _) = triples[q];
                    let phi = c1.hom(a, b)[0];
                    arrows.insert(x, conjugate(c2, func, c1, alpha, phi, beta)?);
                }
                Functor::new(g_objects, arrows)
            };
            (m, Functor::induced(k_objects), g)
        } else {
            let mut arrows = Vec::new();
            let mut over = Vec::new();
            let mut arrow_index = HashMap::new();
            for (p, &(a, _, _)) in triples.iter().enumerate() {
                for (q, &(b, _, _)) in triples.iter().enumerate() {
                    for phi in c1.hom(a, b) {
                        arrow_index.insert((p, q, phi), arrows.len());
                        arrows.push((p, q, c1.label(phi)));
                        over.push(phi);
                    }
                }
            }
            let identities = (0..triples.len())
                .map(|p| arrow_index[&(p, p, c1.identity(triples[p].0))])
                .collect();
            let ends: Vec<(usize, usize)> = arrows.iter().map(|x| (x.0, x.1)).collect();
            let m = FiniteCategory::from_fn(names, arrows, identities, |x, y| {
                let phi = c1.then(over[x], over[y])?;
                arrow_index.get(&(ends[x].0, ends[y].1, phi)).copied()
            });
            let mut k_arrows = BTreeMap::new();
            for phi in c1.arrows() {
                let (p, q) = (k_objects[c1.src(phi)], k_objects[c1.dst(phi)]);
                k_arrows.insert(phi, arrow_index[&(p, q, phi)]);
            }
            let g = if c2.is_thin() {
                Functor::induced(g_objects)
            } else {
                let mut g_arrows = BTreeMap::new();
                for (x, &(p, q)) in ends.iter().enumerate() {
                    let (_, alpha, _) = triples[p];
                    let (_, beta, _) = triples[q];
                    g_arrows.insert(x, conjugate(c2, func, c1, alpha, over[x], beta)?);
                }
                Functor::new(g_objects, g_arrows)
            };
            (m, Functor::new(k_objects, k_arrows), g)
        };
        per_arity.insert(n, middle);
        triples_all.insert(n, triples);
        into.insert(n, k);
        out.insert(n, g);
    }
    let middle = Arc::new(TruncatedTheory {
        label: format!("P({})", f.label),
        bound: f.source.bound,
        per_arity,
        origin: Origin::PathObject {
            map: f.clone(),
            triples: triples_all,
        },
    });
    let (k, g) = legs(middle.clone(), f, into, out, ("K", "G"))?;
    let reports = (classify_cells(&k), classify_cells(&g));
    if reports.0.trivial_cofibration.is_fails() || reports.1.fibration.is_fails() {
        return Err(Error::Inconsistent("path-object legs misclassified".into()));
    }
    Ok(FactorizationResult {
        middle,
        into_middle: k,
        out_of_middle: g,
        reports,
    })
}

/// `alpha^-1 ; F(phi) ; beta`.
fn conjugate(c2: &FiniteCategory, func: &Functor, c1: &FiniteCategory, alpha: ArrowId, phi: ArrowId, beta: ArrowId) -> Result<ArrowId> {
    let missing = || Error::BoundExceeded("conjugate lies outside the truncation".into());
    let fphi = func.arrow(phi, c1, c2).ok_or_else(missing)?;
    let inv = c2.inverse(alpha).ok_or_else(missing)?;
    c2.then(inv, fphi).and_then(|x| c2.then(x, beta)).ok_or_else(missing)
}

/// The lift of `gamma: g -> g'` at the object `(f, alpha, g)` of a path
/// object: the identity of `f`, landing at `(f, alpha ; gamma, g')`.
pub fn path_object_lift(p: &FactorizationResult, n: usize, x: usize, gamma: ArrowId) -> Result<ArrowId> {
    let Origin::PathObject { map, triples } = &p.middle.origin else {
        return Err(Error::Hypothesis("not a path object".into()));
    };
    let c1 = map.source.at(n);
    let c2 = map.target.at(n);
    let m = p.middle.at(n);
    let (a, alpha, g) = triples[&n][x];
    if c2.src(gamma) != g {
        return Err(Error::Hypothesis("isomorphism does not start at the third component".into()));
    }
    let moved = c2
        .then(alpha, gamma)
        .ok_or_else(|| Error::BoundExceeded("composite outside the truncation".into()))?;
    let y = triples[&n]
        .iter()
        .position(|&t| t == (a, moved, c2.dst(gamma)))
        .ok_or_else(|| Error::Inconsistent("target triple missing".into()))?;
    let id = c1.identity(a);
    let arrow = if m.is_thin() {
        m.hom(x, y)[0]
    } else {
        m.hom(x, y)
            .into_iter()
            .find(|&z| m.label(z) == c1.label(id))
            .ok_or_else(|| Error::Inconsistent("identity arrow missing".into()))?
    };
    Ok(arrow)
}

/// Objects of the source followed by objects of the target; arrows are
/// those of the target between images.
pub fn mapping_cylinder(f: &CellMap) -> Result<FactorizationResult> {
    check_input(f)?;
    let mut per_arity = BTreeMap::new();
    let mut into = BTreeMap::new();
    let mut out = BTreeMap::new();
    for n in f.source.arities() {
        let (c1, c2) = (f.source.at(n), f.target.at(n));
        let func = f.functor(n).expect("checked");
        let n1 = c1.len();
        let base: Vec<usize> = func.objects.iter().copied().chain(0..c2.len()).collect();
        let names: Vec<String> = c1
            .objects
            .iter()
            .cloned()
            .chain(c2.objects.iter().map(|o| {
                if c1.objects.contains(o) {
                    format!("{o}'")
                } else {
                    o.clone()
                }
            }))
            .collect();
        let k_objects: Vec<usize> = (0..n1).collect();
        let (middle, k, g) = if let crate::category::Structure::Thin { component } = &c2.structure {
            let comp = base.iter().map(|&b| component[b]).collect();
            (
                FiniteCategory::thin(names, comp),
                Functor::induced(k_objects),
                Functor::induced(base.clone()),
            )
        } else {
            let mut arrows = Vec::new();
            let mut over = Vec::new();
            let mut arrow_index = HashMap::new();
            for (p, &bp) in base.iter().enumerate() {
                for (q, &bq) in base.iter().enumerate() {
                    for beta in c2.hom(bp, bq) {
                        arrow_index.insert((p, q, beta), arrows.len());
                        arrows.push((p, q, c2.label(beta)));
                        over.push(beta);
                    }
                }
            }
            let identities = (0..base.len())
                .map(|p| arrow_index[&(p, p, c2.identity(base[p]))])
                .collect();
            let ends: Vec<(usize, usize)> = arrows.iter().map(|x| (x.0, x.1)).collect();
            let m = FiniteCategory::from_fn(names, arrows, identities, |x, y| {
                let beta = c2.then(over[x], over[y])?;
                arrow_index.get(&(ends[x].0, ends[y].1, beta)).copied()
            });
            let mut k_arrows = BTreeMap::new();
            for alpha in c1.arrows() {
                let fa = func
                    .arrow(alpha, c1, c2)
                    .ok_or_else(|| Error::BoundExceeded("image outside the truncation".into()))?;
                k_arrows.insert(alpha, arrow_index[&(c1.src(alpha), c1.dst(alpha), fa)]);
            }
            let g_arrows = over.iter().enumerate().map(|(x, &beta)| (x, beta)).collect();
            (m, Functor::new(k_objects, k_arrows), Functor::new(base.clone(), g_arrows))
        };
        per_arity.insert(n, middle);
        into.insert(n, k);
        out.insert(n, g);
    }
    let middle = Arc::new(TruncatedTheory {
        label: format!("Cyl({})", f.label),
        bound: f.source.bound,
        per_arity,
        origin: Origin::Cylinder { map: f.clone() },
    });
    let (k, g) = legs(middle.clone(), f, into, out, ("K'", "G'"))?;
    let reports = (classify_cells(&k), classify_cells(&g));
    if reports.0.cofibration.is_fails() || reports.1.trivial_fibration.is_fails() {
        return Err(Error::Inconsistent("mapping-cylinder legs misclassified".into()));
    }
    Ok(FactorizationResult {
        middle,
        into_middle: k,
        out_of_middle: g,
        reports,
    })
}

pub fn path_object_of(f: &TheoryMorphism, b: &Bound) -> Result<FactorizationResult> {
    path_object(&CellMap::of_morphism(f, b)?)
}

pub fn mapping_cylinder_of(f: &TheoryMorphism, b: &Bound) -> Result<FactorizationResult> {
    mapping_cylinder(&CellMap::of_morphism(f, b)?)
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub h: CellMap,
    pub h_prime: CellMap,
    /// Per arity and object `x` of the cylinder, `alpha_x: H x -> H' x`.
    pub alphas: BTreeMap<usize, Vec<ArrowId>>,
    /// Per arity and object, every admissible image under a diagonal.
    pub choices: BTreeMap<usize, Vec<Vec<usize>>>,
    pub uniqueness: Verdict,
}

/// Compares the cylinder factorization with another cofibration followed
/// by a trivial fibration of the same map.
pub fn compare_factorizations(
    cyl: &FactorizationResult,
    k2: &CellMap,
    g2: &CellMap,
    alternative: Preference,
) -> Result<Comparison> {
    let rk = classify_cells(k2);
    let rg = classify_cells(g2);
    if rk.cofibration.is_fails() {
        return Err(Error::Hypothesis(format!("{} is not a cofibration", k2.label)));
    }
    if rg.trivial_fibration.is_fails() {
        return Err(Error::Hypothesis(format!("{} is not a trivial fibration", g2.label)));
    }
    let original = cyl.into_middle.then(&cyl.out_of_middle)?;
    k2.then(g2)?
        .agrees_with(&original)
        .map_err(|m| Error::Hypothesis(format!("factorizations of different maps: {m}")))?;
    let square = Square {
        f: &cyl.into_middle,
        g: g2,
        u: k2,
        v: &cyl.out_of_middle,
    };
    let h = lift_square_second(&square, Preference::Canonical)?;
    let h_prime = lift_square_second(&square, alternative)?;
    let mut alphas = BTreeMap::new();
    let mut choices = BTreeMap::new();
    let mut singletons = true;
    for n in cyl.middle.arities() {
        let c4 = cyl.middle.at(n);
        let c5 = g2.source.at(n);
        let c2 = g2.target.at(n);
        let (fh, fh2) = (h.functor(n).expect("built"), h_prime.functor(n).expect("built"));
        let gg = g2.functor(n).ok_or_else(|| Error::BoundExceeded(format!("arity {n}")))?;
        let g = cyl.out_of_middle.functor(n).expect("built");
        let k = cyl.into_middle.functor(n).expect("built");
        let ku = k2.functor(n).ok_or_else(|| Error::BoundExceeded(format!("arity {n}")))?;
        let mut row = Vec::with_capacity(c4.len());
        let mut options = Vec::with_capacity(c4.len());
        for x in 0..c4.len() {
            let (p, q) = (fh.objects[x], fh2.objects[x]);
            let hom = c5.hom(p, q);
            if hom.len() != 1 {
                singletons = false;
            }
            let id = c2.identity(g.objects[x]);
            let fitting: Vec<ArrowId> = hom
                .into_iter()
                .filter(|&a| c5.is_iso(a) && gg.arrow(a, c5, c2) == Some(id))
                .collect();
            match fitting.as_slice() {
                [a] => row.push(*a),
                [] => return Err(Error::Inconsistent(format!("no comparison isomorphism at {}", c4.objects[x]))),
                _ => {
                    return Ok(Comparison {
                        h,
                        h_prime,
                        alphas,
                        choices,
                        uniqueness: Verdict::fails(format!("several comparison isomorphisms at {}", c4.objects[x])),
                    })
                }
            }
            let forced = k.objects.iter().position(|&y| y == x);
            options.push(match forced {
                Some(a) => vec![ku.objects[a]],
                None => (0..c5.len()).filter(|&z| gg.objects[z] == g.objects[x]).collect(),
            });
        }
        alphas.insert(n, row);
        choices.insert(n, options);
    }
    let uniqueness = if singletons {
        Verdict::holds("every connecting hom-set is a singleton")
    } else {
        Verdict::holds("one isomorphism over the identity at every object")
    };
    Ok(Comparison {
        h,
        h_prime,
        alphas,
        choices,
        uniqueness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stdlib;

    #[test]
    fn starfish_counts() {
        let b = Bound::default();
        let cyl = mapping_cylinder_of(&stdlib::morphism("bin_to_smon").unwrap(), &b).unwrap();
        assert_eq!(cyl.middle.at(4).len(), 6);
        assert_eq!(cyl.middle.at(4).arrow_count(), 36);
        let p = path_object_of(&stdlib::morphism("bin_to_smon").unwrap(), &b).unwrap();
        assert_eq!(p.middle.at(4).len(), 5);
        assert_eq!(p.middle.at(4).arrow_count(), 5);
    }

    #[test]
    fn starfish_comparison() {
        let b = Bound::default();
        let cyl = mapping_cylinder_of(&stdlib::morphism("bin_to_smon").unwrap(), &b).unwrap();
        let k2 = CellMap::from_morphism(
            &stdlib::morphism("bin_to_mon").unwrap(),
            cyl.into_middle.source.clone(),
            Arc::new(TruncatedTheory::presented(&stdlib::theory("mon_nounit").unwrap(), &b).unwrap()),
        )
        .unwrap();
        let g2 = CellMap::from_morphism(&stdlib::morphism("mon_to_smon").unwrap(), k2.target.clone(), cyl.out_of_middle.target.clone()).unwrap();
        let cmp = compare_factorizations(&cyl, &k2, &g2, Preference::Reversed).unwrap();
        assert!(cmp.uniqueness.is_holds());
        let loose: Vec<usize> = cmp.choices[&4].iter().enumerate().filter(|(_, c)| c.len() > 1).map(|(i, _)| i).collect();
        assert_eq!(loose, vec![5]);
    }

    #[test]
    fn starfish_dot_is_a_star() {
        let cyl = mapping_cylinder_of(&stdlib::morphism("bin_to_smon").unwrap(), &Bound::default()).unwrap();
        let dot = cyl.to_dot(4).unwrap();
        let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges.len(), 5, "{dot}");
        assert_eq!(dot.matches("shape=box").count(), 1);
        let hub = dot.lines().find(|l| l.contains("shape=box")).unwrap().trim().split(' ').next().unwrap();
        assert!(edges.iter().all(|e| e.contains(&format!("{hub} ")) || e.contains(&format!("> {hub} "))));
    }
}
