use std::sync::Arc;

use coherence_core::category::Functor;
use coherence_core::cells::{CellMap, TruncatedTheory};
use coherence_core::classify::{classify, classify_cells, isos_from, lift_arrow, lift_iso};
use coherence_core::equivalence::witness_for;
use coherence_core::factor::{mapping_cylinder, path_object};
use coherence_core::homcat::Bound;
use coherence_core::lifting::{lift_square_first, lift_square_second, retract_lift, Preference, Retract, Square};
use coherence_core::morphism::{check_morphism, TheoryMorphism};
use coherence_core::parse::parse_term;
use coherence_core::{stdlib, Error, TwoCellPath, Verdict};

fn b() -> Bound {
    Bound::default()
}

fn theory(key: &str) -> Arc<TruncatedTheory> {
    Arc::new(TruncatedTheory::presented(&stdlib::theory(key).unwrap(), &b()).unwrap())
}

fn map(key: &str) -> CellMap {
    CellMap::of_morphism(&stdlib::morphism(key).unwrap(), &b()).unwrap()
}

fn id(key: &str) -> CellMap {
    CellMap::identity(theory(key))
}

fn then(f: &CellMap, g: &CellMap) -> CellMap {
    f.then(g).unwrap()
}

#[test]
fn stdlib_morphisms_are_valid() {
    for key in stdlib::MORPHISM_KEYS {
        let v = check_morphism(&stdlib::morphism(key).unwrap());
        assert!(v.is_holds(), "{key}: {v}");
    }
    for key in stdlib::THEORY_KEYS {
        let v = check_morphism(&TheoryMorphism::identity(&stdlib::theory(key).unwrap()));
        assert!(v.is_holds(), "{key}: {v}");
    }
}

#[test]
fn reversed_cell_is_rejected() {
    let text = "source: stdlib:assoc\ntarget: stdlib:mon_nounit\nmaps:\n  tensor -> tensor(1,2)\ncells:\n  alpha -> alpha~\n";
    let f = TheoryMorphism::from_source(text, &stdlib::resolve);
    let v = match f {
        Ok(f) => check_morphism(&f),
        Err(e) => panic!("parses: {e}"),
    };
    assert!(v.is_fails(), "{v}");
}

#[test]
fn classifier_examples() {
    let mu = classify(&stdlib::morphism("mon_to_smon").unwrap(), &b()).unwrap();
    assert!(mu.weak_equivalence.is_holds());
    assert!(mu.fibration.is_holds());
    assert!(mu.cofibration.is_fails());
    assert!(mu.trivial_fibration.is_holds());
    assert!(mu.trivial_cofibration.is_fails());

    let inc = classify(&stdlib::morphism("bin_to_mon").unwrap(), &b()).unwrap();
    assert!(inc.cofibration.is_holds());
    assert!(inc.weak_equivalence.is_fails());
    assert!(inc.per_arity[&4].weak_equivalence.is_fails());

    for key in ["bin", "mon_nounit", "strfsh", "smon_nounit"] {
        let r = classify_cells(&id(key));
        assert!(r.weak_equivalence.is_holds() && r.fibration.is_holds() && r.cofibration.is_holds(), "{key}");
    }
}

/// The starfish inclusion is a cofibration whose cylinder partner, not the
/// inclusion itself, carries the equivalence.
#[test]
fn starfish_legs() {
    let k = classify(&stdlib::morphism("bin_to_strfsh").unwrap(), &b()).unwrap();
    assert!(k.cofibration.is_holds());
    assert!(k.weak_equivalence.is_fails());
    let g = classify(&stdlib::morphism("strfsh_to_smon").unwrap(), &b()).unwrap();
    assert!(g.trivial_fibration.is_holds(), "{:?}", g.trivial_fibration);
}

fn conjunction(a: &Verdict, b: &Verdict) -> &'static str {
    if a.is_fails() || b.is_fails() {
        "fails"
    } else if a.is_holds() && b.is_holds() {
        "holds"
    } else {
        "unknown"
    }
}

#[test]
fn trivial_classes_are_conjunctions() {
    for key in stdlib::MORPHISM_KEYS.iter().filter(|k| !k.ends_with("unital")) {
        let r = classify(&stdlib::morphism(key).unwrap(), &b()).unwrap();
        assert_eq!(r.trivial_fibration.status(), conjunction(&r.weak_equivalence, &r.fibration), "{key}");
        assert_eq!(r.trivial_cofibration.status(), conjunction(&r.weak_equivalence, &r.cofibration), "{key}");
    }
}

#[test]
fn two_out_of_three() {
    let pairs = [
        ("bin_to_mon", "mon_to_smon"),
        ("assoc_to_mon", "mon_to_smon"),
        ("strfsh_to_mon", "mon_to_smon"),
        ("bin_to_strfsh", "strfsh_to_smon"),
        ("bin_to_strfsh", "strfsh_to_mon"),
    ];
    for (f, g) in pairs {
        let (f, g) = (map(f), map(g));
        let gf = then(&f, &g);
        let rs = [classify_cells(&f), classify_cells(&g), classify_cells(&gf)];
        let weq: Vec<&Verdict> = rs.iter().map(|r| &r.weak_equivalence).collect();
        for i in 0..3 {
            let others = (0..3).filter(|&j| j != i).all(|j| weq[j].is_holds());
            if others {
                assert!(!weq[i].is_fails(), "{} / {}: {}", f.label, g.label, weq[i]);
            }
        }
        if rs[0].cofibration.is_holds() && rs[1].cofibration.is_holds() {
            assert!(rs[2].cofibration.is_holds());
        }
        if rs[0].fibration.is_holds() && rs[1].fibration.is_holds() {
            assert!(!rs[2].fibration.is_fails());
        }
    }
}

#[test]
fn identity_lifts() {
    let mu = stdlib::morphism("mon_to_smon").unwrap();
    let t = parse_term("tensor(tensor(1,2),3)").unwrap();
    let beta = TwoCellPath::identity(mu.functor().unwrap().image(&t).unwrap());
    let alpha = lift_iso(&mu, &t, &beta, &b()).unwrap();
    assert!(alpha.steps.is_empty());
    assert_eq!(alpha.source, t);
}

#[test]
fn lifts_through_the_identity_of_mon() {
    let idm = TheoryMorphism::identity(&stdlib::theory("mon_nounit").unwrap());
    let t = parse_term("tensor(tensor(tensor(1,2),3),4)").unwrap();
    let engine = coherence_core::rewrite::Engine::new(&idm.target).unwrap();
    let beta = engine.replay(&t, &coherence_core::rewrite::parse_steps("alpha@1 ; alpha").unwrap()).unwrap();
    let alpha = lift_iso(&idm, &t, &beta, &b()).unwrap();
    assert_eq!(alpha.target, beta.target);
    assert!(engine.equal(&alpha, &beta, coherence_core::rewrite::DEFAULT_BUDGET).unwrap().is_holds());
}

#[test]
fn path_object_lifts_are_identity_indexed() {
    use coherence_core::cells::Origin;
    use coherence_core::factor::path_object_lift;
    let p = path_object(&id("mon_nounit")).unwrap();
    let Origin::PathObject { map: f, triples } = &p.middle.origin else { unreachable!() };
    for n in 3..=4 {
        let (m, c2) = (p.middle.at(n), f.target.at(n));
        let g = p.out_of_middle.functor(n).unwrap();
        for x in 0..m.len() {
            let (a, _, third) = triples[&n][x];
            for gamma in isos_from(c2, third) {
                let l = path_object_lift(&p, n, x, gamma).unwrap();
                assert_eq!(m.src(l), x);
                assert_eq!(triples[&n][m.dst(l)].0, a);
                assert_eq!(g.arrow(l, m, c2), Some(gamma));
            }
        }
    }
}

fn commutes(s: &Square, h: &CellMap) {
    then(s.f, h).agrees_with(s.u).unwrap_or_else(|m| panic!("upper triangle of {}: {m}", h.label));
    then(h, s.g).agrees_with(s.v).unwrap_or_else(|m| panic!("lower triangle of {}: {m}", h.label));
}

/// Twenty commutative squares built from stdlib maps and their
/// factorizations; every diagonal must make both triangles commute.
#[test]
fn twenty_lifting_squares() {
    let mut solved = 0;
    let mu = map("mon_to_smon");

    // trivial cofibration against fibration
    for (x, u) in [("mon_nounit", None), ("bin", Some("bin_to_mon")), ("assoc", Some("assoc_to_mon")), ("strfsh", Some("strfsh_to_mon"))] {
        let f = id(x);
        let u = u.map(map).unwrap_or_else(|| id("mon_nounit"));
        let v = then(&u, &mu);
        let s = Square { f: &f, g: &mu, u: &u, v: &v };
        commutes(&s, &lift_square_first(&s).unwrap());
        solved += 1;
    }
    for key in ["bin_to_smon", "mon_to_smon", "bin_to_mon", "bin_to_strfsh", "strfsh_to_smon"] {
        let p = path_object(&map(key)).unwrap();
        let s = Square {
            f: &p.into_middle,
            g: &p.out_of_middle,
            u: &p.into_middle,
            v: &p.out_of_middle,
        };
        commutes(&s, &lift_square_first(&s).unwrap());
        solved += 1;
    }
    let p = path_object(&id("bin")).unwrap();
    let s = Square {
        f: &p.into_middle,
        g: &p.out_of_middle,
        u: &p.into_middle,
        v: &p.out_of_middle,
    };
    commutes(&s, &lift_square_first(&s).unwrap());
    solved += 1;
    let p = path_object(&map("bin_to_smon")).unwrap();
    let u = map("bin_to_mon");
    let s = Square {
        f: &p.into_middle,
        g: &mu,
        u: &u,
        v: &p.out_of_middle,
    };
    commutes(&s, &lift_square_first(&s).unwrap());
    solved += 1;

    // cofibration against trivial fibration
    let inc = map("bin_to_mon");
    let s = Square { f: &inc, g: &mu, u: &inc, v: &mu };
    commutes(&s, &lift_square_second(&s, Preference::Canonical).unwrap());
    solved += 1;
    for key in ["bin_to_smon", "bin_to_mon", "bin_to_strfsh", "mon_to_smon"] {
        let c = mapping_cylinder(&map(key)).unwrap();
        let s = Square {
            f: &c.into_middle,
            g: &c.out_of_middle,
            u: &c.into_middle,
            v: &c.out_of_middle,
        };
        commutes(&s, &lift_square_second(&s, Preference::Canonical).unwrap());
        solved += 1;
    }
    let c = mapping_cylinder(&map("bin_to_smon")).unwrap();
    let s = Square {
        f: &c.into_middle,
        g: &mu,
        u: &inc,
        v: &c.out_of_middle,
    };
    for order in [Preference::Canonical, Preference::Reversed, Preference::Seeded(1), Preference::Seeded(2)] {
        commutes(&s, &lift_square_second(&s, order).unwrap());
        solved += 1;
    }
    assert_eq!(solved, 20);
}

#[test]
fn lifting_hypotheses_are_checked() {
    let mu = map("mon_to_smon");
    let inc = map("bin_to_mon");
    // bin_to_mon is not a weak equivalence, so it is no trivial cofibration
    let s = Square { f: &inc, g: &mu, u: &inc, v: &mu };
    assert!(matches!(lift_square_first(&s), Err(Error::Hypothesis(_))));
    let bad = Square { f: &inc, g: &mu, u: &inc, v: &id("mon_nounit") };
    assert!(lift_square_first(&bad).is_err());
}

/// `mu` as a retract of the path-object projection of `mu`.
fn path_retract(key: &str) -> (CellMap, CellMap, CellMap, CellMap, CellMap, CellMap) {
    let f = map(key);
    let p = path_object(&f).unwrap();
    let k = p.into_middle.clone();
    let mut j = CellMap {
        label: "J".into(),
        source: k.target.clone(),
        target: k.source.clone(),
        per_arity: Default::default(),
        missing: Default::default(),
    };
    for n in k.source.arities() {
        let w = witness_for(k.source.at(n), k.target.at(n), k.functor(n).unwrap().clone()).unwrap();
        j.per_arity.insert(n, w.backward);
    }
    let t = CellMap::identity(f.target.clone());
    (f, p.out_of_middle, k, j, t.clone(), t)
}

#[test]
fn retract_lifts_replay() {
    for key in ["mon_to_smon", "bin_to_smon", "strfsh_to_smon"] {
        let (f, g, h, j, h2, j2) = path_retract(key);
        let r = Retract {
            f: &f,
            g: &g,
            h: &h,
            j: &j,
            h2: &h2,
            j2: &j2,
        };
        r.check().unwrap();
        for n in f.source.arities() {
            let (c1, c2) = (f.source.at(n), f.target.at(n));
            let fun: &Functor = f.functor(n).unwrap();
            for x in 0..c1.len() {
                for beta in isos_from(c2, fun.objects[x]) {
                    let l = retract_lift(&r, n, x, beta).unwrap();
                    assert_eq!(c1.src(l), x);
                    assert_eq!(fun.arrow(l, c1, c2), Some(beta));
                    assert!(c1.is_iso(l));
                    assert!(lift_arrow(c1, c2, fun, x, beta).is_some());
                }
            }
        }
        let (rf, rg) = (classify_cells(&f), classify_cells(&g));
        for (a, b) in [
            (&rf.weak_equivalence, &rg.weak_equivalence),
            (&rf.fibration, &rg.fibration),
            (&rf.cofibration, &rg.cofibration),
        ] {
            if b.is_holds() {
                assert!(!a.is_fails(), "{key}");
            }
        }
    }
}

#[test]
fn trivial_retract_reduces_to_a_direct_lift() {
    let f = map("mon_to_smon");
    let (i1, i2) = (CellMap::identity(f.source.clone()), CellMap::identity(f.target.clone()));
    let r = Retract {
        f: &f,
        g: &f,
        h: &i1,
        j: &i1,
        h2: &i2,
        j2: &i2,
    };
    let (c1, c2) = (f.source.at(4), f.target.at(4));
    for x in 0..c1.len() {
        let beta = c2.identity(f.object(4, x).unwrap());
        assert_eq!(retract_lift(&r, 4, x, beta).unwrap(), c1.identity(x));
    }
}
