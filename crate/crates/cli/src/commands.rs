use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use serde_json::{json, Value};

use coherence_core::category::FiniteCategory;
use coherence_core::cells::{CellMap, TruncatedTheory};
use coherence_core::classify::{classify, lift_iso, ClassificationReport};
use coherence_core::equivalence::{certify, Certified};
use coherence_core::factor::{compare_factorizations, mapping_cylinder_of, path_object_of, FactorizationResult};
use coherence_core::homcat::{hom_category, Bound};
use coherence_core::kronecker::{check_delta_coherence, kronecker};
use coherence_core::lifting::{lift_square_second, Preference, Square};
use coherence_core::morphism::TheoryMorphism;
use coherence_core::parse::parse_term;
use coherence_core::rewrite::{parse_steps, Engine, DEFAULT_BUDGET};
use coherence_core::verdict::Certificate;
use coherence_core::{Error, Result, TheoryPresentation, Verdict};

use crate::input;

/// What a command produced, before formatting.
pub struct Report {
    pub json: Value,
    pub text: String,
    pub dot: Option<String>,
    pub verdict: Option<Verdict>,
}

impl Report {
    fn plain(json: Value, text: String) -> Self {
        Report {
            json,
            text,
            dot: None,
            verdict: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.as_ref().map_or(0, Verdict::exit_code)
    }
}

pub fn show_theory(reference: &str) -> Result<Report> {
    let p = input::theory(reference)?;
    let json = json!({
        "theory": p,
        "source": p.render(),
    });
    Ok(Report::plain(json, p.render()))
}

pub fn show_map(reference: &str) -> Result<Report> {
    let m = input::map(reference)?;
    let json = json!({
        "morphism": m.name,
        "from": m.source.name,
        "to": m.target.name,
        "lax": m.lax,
        "source": m.render(),
    });
    Ok(Report::plain(json, m.render()))
}

fn undecided(c: &FiniteCategory) -> bool {
    c.unknown || c.partial
}

pub fn enumerate(reference: &str, n: usize, b: &Bound) -> Result<Report> {
    let p = input::theory(reference)?;
    let h = hom_category(&p, n, b)?;
    let c = &h.category;
    let mut text = format!("{}(1,{n}): {} objects, {} arrows\n", p.name, c.len(), c.arrow_count());
    for (i, t) in h.terms.iter().enumerate() {
        let _ = writeln!(text, "  {i}: {t}");
    }
    let verdict = if h.truncated || undecided(c) {
        Verdict::unknown(format!("{}(1,{n}) is not fully decided within the bound", p.name), b.max_term_size)
    } else {
        Verdict::holds(format!("{}(1,{n}) enumerated", p.name))
    };
    Ok(Report {
        json: json!({"theory": p.name, "homCategory": h.to_json()}),
        text,
        dot: Some(h.to_dot()),
        verdict: Some(verdict),
    })
}

fn check_ends(m: &TheoryMorphism, from: Option<&str>, to: Option<&str>) -> Result<()> {
    for (side, reference, actual) in [("source", from, &m.source), ("target", to, &m.target)] {
        let Some(r) = reference else { continue };
        let p = input::theory(r)?;
        if !p.same_structure(actual) {
            return Err(Error::Hypothesis(format!(
                "{} has {side} {}, not {}",
                m.name, actual.name, p.name
            )));
        }
    }
    Ok(())
}

fn report_text(r: &ClassificationReport) -> String {
    let mut out = format!("{}\n", r.morphism);
    for (what, v) in [
        ("weak equivalence", &r.weak_equivalence),
        ("fibration", &r.fibration),
        ("cofibration", &r.cofibration),
        ("trivial fibration", &r.trivial_fibration),
        ("trivial cofibration", &r.trivial_cofibration),
    ] {
        let _ = writeln!(out, "  {what}: {v}");
    }
    for (n, d) in &r.per_arity {
        let _ = writeln!(
            out,
            "  arity {n}: {} -> {} objects, weq {}, fib {}, cofib {}",
            d.source_objects,
            d.target_objects,
            d.weak_equivalence.status(),
            d.fibration.status(),
            d.cofibration.status()
        );
    }
    out
}

pub fn classify_map(map: &str, from: Option<&str>, to: Option<&str>, b: &Bound) -> Result<Report> {
    let m = input::map(map)?;
    check_ends(&m, from, to)?;
    let r = classify(&m, b)?;
    Ok(Report {
        json: json!({ "report": r }),
        text: report_text(&r),
        dot: None,
        verdict: Some(r.weak_equivalence.clone()),
    })
}

pub fn certify_map(map: &str, b: &Bound) -> Result<Report> {
    let m = input::map(map)?;
    match certify(&m, b)? {
        Certified::Found(c) => {
            let per_arity: BTreeMap<String, Value> =
                c.per_arity.iter().map(|(n, w)| (n.to_string(), w.to_json())).collect();
            let mut text = format!("{}: equivalence at every arity\n", m.name);
            for (n, w) in &c.per_arity {
                let _ = writeln!(text, "  arity {n}: {} <-> {} objects", w.source.len(), w.target.len());
            }
            Ok(Report {
                json: json!({"morphism": m.name, "found": true, "perArity": per_arity}),
                text,
                dot: None,
                verdict: Some(Verdict::holds("biequivalence certificate found")),
            })
        }
        Certified::Absent { arity, reason, unknown } => {
            let verdict = if unknown {
                Verdict::unknown(format!("arity {arity}: {reason}"), b.max_term_size)
            } else {
                Verdict::fails_with(
                    format!("no equivalence at arity {arity}"),
                    Certificate::Instance {
                        name: format!("arity {arity}"),
                        detail: reason.clone(),
                    },
                )
            };
            Ok(Report {
                json: json!({"morphism": m.name, "found": false, "arity": arity, "reason": reason, "unknown": unknown}),
                text: format!("{}: no certificate at arity {arity}: {reason}\n", m.name),
                dot: None,
                verdict: Some(verdict),
            })
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Factorization {
    Path,
    Cylinder,
}

fn legs_verdict(kind: Factorization, r: &FactorizationResult, m: &TheoryMorphism) -> Result<Verdict> {
    let (first, second) = &r.reports;
    let legs = match kind {
        Factorization::Path => first.trivial_cofibration.clone().and(second.fibration.clone()),
        Factorization::Cylinder => first.cofibration.clone().and(second.trivial_fibration.clone()),
    };
    let f = CellMap::from_morphism(m, r.into_middle.source.clone(), r.out_of_middle.target.clone())?;
    let replay = match r.into_middle.then(&r.out_of_middle)?.agrees_with(&f) {
        Ok(()) => Verdict::holds("legs compose to the map"),
        Err(e) => Verdict::fails(format!("legs do not compose to the map: {e}")),
    };
    Ok(legs.and(replay))
}

pub fn factor(kind: Factorization, map: &str, arity: Option<usize>, b: &Bound) -> Result<Report> {
    let m = input::map(map)?;
    let r = match kind {
        Factorization::Path => path_object_of(&m, b)?,
        Factorization::Cylinder => mapping_cylinder_of(&m, b)?,
    };
    let verdict = legs_verdict(kind, &r, &m)?;
    let n = arity.unwrap_or(b.max_arity);
    let mut text = format!("{} = {} ; {}\n", m.name, r.into_middle.label, r.out_of_middle.label);
    for (k, c) in &r.middle.per_arity {
        let _ = writeln!(text, "  {}(1,{k}): {} objects, {} arrows", r.middle.label, c.len(), c.arrow_count());
    }
    let _ = writeln!(text, "  legs: {verdict}");
    Ok(Report {
        json: json!({"morphism": m.name, "factorization": r.to_json()}),
        text,
        dot: r.to_dot(n),
        verdict: Some(verdict),
    })
}

pub fn lift_path(map: &str, term: &str, path: &str, b: &Bound) -> Result<Report> {
    let m = input::map(map)?;
    let t = parse_term(term)?;
    let engine = Engine::new(&m.target)?;
    let image = m.functor()?.image(&t)?;
    let beta = engine.replay(&image, &parse_steps(path)?)?;
    let (verdict, lifted) = match lift_iso(&m, &t, &beta, b) {
        Ok(p) => (Verdict::holds(format!("{beta} lifts")), Some(p)),
        Err(Error::NoLift(e)) => (Verdict::fails(e), None),
        Err(Error::BoundExceeded(e)) => (Verdict::unknown(e, b.max_path_length), None),
        Err(e) => return Err(e),
    };
    let text = match &lifted {
        Some(p) => format!("{} lifts to {} : {} => {}\n", beta.render(), p.render(), p.source, p.target),
        None => format!("{} has no lift\n", beta.render()),
    };
    Ok(Report {
        json: json!({
            "morphism": m.name,
            "term": t.to_string(),
            "path": beta.render(),
            "lift": lifted.map(|p| json!({"source": p.source.to_string(), "target": p.target.to_string(), "path": p.render()})),
        }),
        text,
        dot: None,
        verdict: Some(verdict),
    })
}

/// The mapping cylinder of `map` with a second cofibration, trivial
/// fibration pair built from `via` and `then`.
struct Setup {
    cyl: FactorizationResult,
    k2: CellMap,
    g2: CellMap,
}

fn setup(map: &str, via: &str, then: &str, b: &Bound) -> Result<Setup> {
    let m = input::map(map)?;
    let f = input::map(via)?;
    let g = input::map(then)?;
    if !f.source.same_structure(&m.source) || !g.target.same_structure(&m.target) {
        return Err(Error::Hypothesis(format!(
            "{} ; {} does not run from {} to {}",
            f.name, g.name, m.source.name, m.target.name
        )));
    }
    let cyl = mapping_cylinder_of(&m, b)?;
    let middle = Arc::new(TruncatedTheory::presented(&f.target, b)?);
    let k2 = CellMap::from_morphism(&f, cyl.into_middle.source.clone(), middle)?;
    let g2 = CellMap::from_morphism(&g, k2.target.clone(), cyl.out_of_middle.target.clone())?;
    Ok(Setup { cyl, k2, g2 })
}

fn object_names(h: &CellMap) -> BTreeMap<String, Vec<String>> {
    h.per_arity
        .iter()
        .map(|(n, f)| {
            let c = h.target.at(*n);
            (n.to_string(), f.objects.iter().map(|&o| c.objects[o].clone()).collect())
        })
        .collect()
}

fn preference(seed: Option<u64>, fallback: Preference) -> Preference {
    seed.map_or(fallback, Preference::Seeded)
}

pub fn lift_square(map: &str, via: &str, then: &str, seed: Option<u64>, b: &Bound) -> Result<Report> {
    let s = setup(map, via, then, b)?;
    let square = Square {
        f: &s.cyl.into_middle,
        g: &s.g2,
        u: &s.k2,
        v: &s.cyl.out_of_middle,
    };
    let h = lift_square_second(&square, preference(seed, Preference::Canonical))?;
    let names = object_names(&h);
    let mut text = format!("{} : {} -> {}\n", h.label, h.source.label, h.target.label);
    for (n, objs) in &names {
        let src = &h.source.at(n.parse().unwrap_or(0)).objects;
        for (a, o) in src.iter().zip(objs) {
            let _ = writeln!(text, "  {n}: {a} |-> {o}");
        }
    }
    Ok(Report {
        json: json!({"label": h.label, "source": h.source.label, "target": h.target.label, "objects": names}),
        text,
        dot: None,
        verdict: Some(Verdict::holds("both triangles commute")),
    })
}

pub fn compare(map: &str, via: &str, then: &str, seed: Option<u64>, b: &Bound) -> Result<Report> {
    let s = setup(map, via, then, b)?;
    let cmp = compare_factorizations(&s.cyl, &s.k2, &s.g2, preference(seed, Preference::Reversed))?;
    let mut alphas = BTreeMap::new();
    let mut text = format!("{} against {}\n", cmp.h.label, cmp.h_prime.label);
    for (n, row) in &cmp.alphas {
        let c4 = s.cyl.middle.at(*n);
        let c5 = s.g2.source.at(*n);
        let mut entries = Vec::new();
        for (x, &a) in row.iter().enumerate() {
            let label = c5.label(a);
            if a != c5.identity(c5.src(a)) {
                let _ = writeln!(text, "  {n}: alpha at {} is {label}", c4.objects[x]);
            }
            entries.push(json!({"object": c4.objects[x], "alpha": label}));
        }
        alphas.insert(n.to_string(), entries);
    }
    let _ = writeln!(text, "  uniqueness: {}", cmp.uniqueness);
    Ok(Report {
        json: json!({
            "h": object_names(&cmp.h),
            "hPrime": object_names(&cmp.h_prime),
            "alphas": alphas,
            "uniqueness": cmp.uniqueness,
        }),
        text,
        dot: None,
        verdict: Some(cmp.uniqueness),
    })
}

pub fn kronecker_product(left: &str, right: &str, check: bool, b: &Bound) -> Result<Report> {
    let (l, r) = (input::theory(left)?, input::theory(right)?);
    let k = kronecker(&l, &r)?;
    let verdict = check.then(|| check_delta_coherence(&k, b));
    let mut text = k.render();
    if let Some(v) = &verdict {
        let _ = writeln!(text, "interchange coherence: {v}");
    }
    Ok(Report {
        json: json!({"theory": k, "source": k.render(), "coherence": verdict}),
        text,
        dot: None,
        verdict,
    })
}

fn singleton_homs(p: &TheoryPresentation, n: usize, b: &Bound) -> Result<Verdict> {
    let h = hom_category(p, n, b)?;
    let c = &h.category;
    for a in 0..c.len() {
        for z in 0..c.len() {
            let k = c.hom(a, z).len();
            if k > 1 && !c.unknown {
                return Ok(Verdict::fails_with(
                    format!("arity {n} has parallel 2-cells that differ"),
                    Certificate::Instance {
                        name: format!("{} => {}", h.terms[a], h.terms[z]),
                        detail: format!("{k} classes"),
                    },
                ));
            }
        }
    }
    if h.truncated || undecided(c) {
        return Ok(Verdict::unknown(format!("arity {n} is not fully decided"), b.max_term_size));
    }
    Ok(Verdict::holds(format!("every hom-set at arity {n} has at most one element")))
}

pub fn coherence(reference: &str, arity: Option<usize>, b: &Bound) -> Result<Report> {
    let p = input::theory(reference)?;
    let arities: Vec<usize> = match arity {
        Some(n) => vec![n],
        None => (0..=b.max_arity).collect(),
    };
    let mut per_arity = BTreeMap::new();
    let mut text = format!("{}\n", p.name);
    for n in arities {
        let v = singleton_homs(&p, n, b)?;
        let _ = writeln!(text, "  arity {n}: {v}");
        per_arity.insert(n.to_string(), v);
    }
    let verdict = Verdict::all(per_arity.values().cloned(), "every hom-set is a singleton or empty");
    Ok(Report {
        json: json!({"theory": p.name, "perArity": per_arity, "verdict": verdict}),
        text,
        dot: None,
        verdict: Some(verdict),
    })
}

pub fn coherence_paths(reference: &str, source: &str, lhs: &str, rhs: &str, b: &Bound) -> Result<Report> {
    let p = input::theory(reference)?;
    let engine = Engine::new(&p)?;
    let t = parse_term(source)?;
    let a = engine.replay(&t, &parse_steps(lhs)?)?;
    let z = engine.replay(&t, &parse_steps(rhs)?)?;
    let verdict = if a.len() > b.max_path_length || z.len() > b.max_path_length {
        Verdict::unknown("a path is longer than the bound", b.max_path_length)
    } else {
        engine.equal(&a, &z, DEFAULT_BUDGET)?
    };
    Ok(Report {
        json: json!({
            "theory": p.name,
            "source": a.source.to_string(),
            "target": a.target.to_string(),
            "lhs": a.render(),
            "rhs": z.render(),
            "verdict": verdict,
        }),
        text: format!("{}\n  {}\n  {}\n  equal: {verdict}\n", p.name, a.render(), z.render()),
        dot: None,
        verdict: Some(verdict),
    })
}
