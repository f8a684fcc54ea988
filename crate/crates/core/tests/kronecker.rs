use std::collections::BTreeSet;

use coherence_core::homcat::Bound;
use coherence_core::kronecker::{check_delta_coherence, expand, interchange, kronecker, kronecker_morphism, swap};
use coherence_core::morphism::{check_morphism, TheoryMorphism};
use coherence_core::parse::{parse_presentation, parse_term};
use coherence_core::rewrite::{Engine, TwoCellPath, DEFAULT_BUDGET};
use coherence_core::stdlib;
use coherence_core::term::Symbol;

fn unary_cell() -> coherence_core::presentation::TheoryPresentation {
    parse_presentation("theory: arrow\nsymbols:\n  s/1\n  t/1\ncells:\n  a : s(1) => t(1) iso\n").unwrap()
}

#[test]
fn interchange_corners() {
    let (s, t) = interchange(&parse_term("f(1,2,3)").unwrap(), &parse_term("g(1,2)").unwrap());
    assert_eq!(s, parse_term("g(f(1,2,3),f(4,5,6))").unwrap());
    assert_eq!(t, parse_term("f(g(1,4),g(2,5),g(3,6))").unwrap());
}

#[test]
fn initial_factor_is_neutral() {
    let mon = stdlib::theory("mon").unwrap();
    let k = kronecker(&stdlib::theory("fin").unwrap(), &mon).unwrap();
    assert!(k.same_structure(&mon));
}

#[test]
fn deleting_a_naturality_relation_is_detected() {
    let k = kronecker(&unary_cell(), &stdlib::theory("bin").unwrap()).unwrap();
    let b = Bound::default();
    assert!(check_delta_coherence(&k, &b).is_holds());
    let data = k.kronecker.as_ref().unwrap();
    let victim = data.instances.iter().find(|i| i.condition == 4).unwrap().relation.name.clone();
    let mut broken = k.clone();
    broken.relations.retain(|r| r.name != victim);
    let v = check_delta_coherence(&broken, &b);
    assert!(v.is_fails(), "{v}");
    assert!(v.to_string().contains(&*victim), "{v}");
}

#[test]
fn monoidal_times_binary_never_fails() {
    let k = kronecker(&stdlib::theory("mon").unwrap(), &stdlib::theory("bin").unwrap()).unwrap();
    let v = check_delta_coherence(&k, &Bound::default());
    assert!(!v.is_fails(), "{v}");
}

/// Rightmost-innermost expansion, independent of the library's order.
fn innermost(engine: &Engine, deltas: &BTreeSet<Symbol>, h: &str, k: &str) -> TwoCellPath {
    let (s, t) = interchange(&parse_term(h).unwrap(), &parse_term(k).unwrap());
    let (s, t) = (engine.normalize(&s).unwrap(), engine.normalize(&t).unwrap());
    let mut cur = s.clone();
    let mut steps = Vec::new();
    while cur != t {
        let (st, next) = engine
            .forward_steps(&cur)
            .unwrap()
            .into_iter()
            .filter(|(x, _)| deltas.contains(&x.cell))
            .max_by(|a, b| a.0.position.0.len().cmp(&b.0.position.0.len()).then(a.0.position.0.cmp(&b.0.position.0)))
            .unwrap();
        steps.push(st);
        cur = next;
    }
    TwoCellPath { source: s, target: t, steps }
}

#[test]
fn morphism_sends_interchange_to_interchange() {
    let f1 = stdlib::morphism("bin_to_mon").unwrap();
    let f2 = TheoryMorphism::identity(&stdlib::theory("bin").unwrap());
    let k = kronecker_morphism(&f1, &f2).unwrap();
    assert!(!check_morphism(&k).is_fails());
    let delta = &k.source.kronecker.as_ref().unwrap().deltas[0];
    assert_eq!(k.cell_image(&delta.cell).unwrap().len(), 1);
}

#[test]
fn composite_images_expand() {
    let f = stdlib::morphism("mon_to_smon").unwrap();
    let k = kronecker_morphism(&f, &f).unwrap();
    let engine = Engine::new(&k.target).unwrap();
    let ds: BTreeSet<Symbol> = k.target.kronecker.as_ref().unwrap().deltas.iter().map(|d| d.cell.clone()).collect();
    let func = k.functor().unwrap();
    for d in &k.source.kronecker.as_ref().unwrap().deltas {
        let src = k.source.cells.iter().find(|c| c.name == d.cell).unwrap();
        let got = engine.replay(&func.image(&src.source).unwrap(), k.cell_image(&d.cell).unwrap()).unwrap();
        let want = innermost(&engine, &ds, "tensor(1,2)", "tensor_2(1,2)");
        assert!(engine.equal(&got, &want, DEFAULT_BUDGET).unwrap().is_holds());
        let wide = expand(&engine, &ds, &parse_term("tensor(tensor(1,2),3)").unwrap(), &parse_term("tensor_2(1,2)").unwrap()).unwrap();
        let alt = innermost(&engine, &ds, "tensor(tensor(1,2),3)", "tensor_2(1,2)");
        assert!(engine.equal(&wide, &alt, DEFAULT_BUDGET).unwrap().is_holds());
    }
}

#[test]
fn swap_is_an_isomorphism() {
    for (a, b) in [("bin", "bin"), ("mon_nounit", "bin"), ("mon_nounit", "smon_nounit"), ("mon", "bin")] {
        let (p, q) = (stdlib::theory(a).unwrap(), stdlib::theory(b).unwrap());
        let k12 = kronecker(&p, &q).unwrap();
        let k21 = kronecker(&q, &p).unwrap();
        let there = swap(&k12, &k21).unwrap();
        let back = swap(&k21, &k12).unwrap();
        let v = check_morphism(&there);
        assert!(!v.is_fails(), "{a} {b}: {v:?}");
        assert!(!check_morphism(&back).is_fails());
        let round = there.then(&back).unwrap();
        let engine = Engine::new(&k12).unwrap();
        let func = round.functor().unwrap();
        for s in &k12.symbols {
            let g = coherence_core::term::Term::generator(&s.name, s.arity);
            assert_eq!(func.image(&g).unwrap(), engine.normalize(&g).unwrap());
        }
        for c in &k12.cells {
            let from = engine.normalize(&c.source).unwrap();
            let got = engine.replay(&from, round.cell_image(&c.name).unwrap()).unwrap();
            let id = engine.replay(&from, &[coherence_core::rewrite::RewriteStep::forward(&c.name)]).unwrap();
            assert!(engine.equal(&got, &id, DEFAULT_BUDGET).unwrap().is_holds(), "{a} {b} {}", c.name);
        }
    }
}

#[test]
fn strictification_squared_is_not_refuted() {
    let mu = stdlib::morphism("mon_to_smon").unwrap();
    let k = kronecker_morphism(&mu, &mu).unwrap();
    let r = coherence_core::classify::classify(&k, &Bound::default()).unwrap();
    eprintln!("weq {}", r.weak_equivalence);
    assert!(!r.weak_equivalence.is_fails(), "{:?}", r.weak_equivalence);
}

#[test]
fn binary_square_records_composites() {
    let bin = stdlib::theory("bin").unwrap();
    let k = kronecker(&bin, &bin).unwrap();
    let d = k.kronecker.as_ref().unwrap();
    assert_eq!(d.instances.iter().filter(|i| i.condition == 3).count(), 4);
    let text = k.render();
    let again = parse_presentation(&text).unwrap();
    assert!(again.same_structure(&k));
}

#[test]
fn functorial_on_generators() {
    let f1 = stdlib::morphism("bin_to_mon").unwrap();
    let g1 = stdlib::morphism("mon_to_smon").unwrap();
    let f2 = TheoryMorphism::identity(&stdlib::theory("bin").unwrap());
    let whole = kronecker_morphism(&f1.then(&g1).unwrap(), &f2.then(&f2).unwrap()).unwrap();
    let parts = kronecker_morphism(&f1, &f2).unwrap().then(&kronecker_morphism(&g1, &f2).unwrap()).unwrap();
    let engine = Engine::new(&whole.target).unwrap();
    let (a, b) = (whole.functor().unwrap(), parts.functor().unwrap());
    for s in &whole.source.symbols {
        let g = coherence_core::term::Term::generator(&s.name, s.arity);
        assert_eq!(a.image(&g).unwrap(), b.image(&g).unwrap());
    }
    for c in &whole.source.cells {
        let from = a.image(&c.source).unwrap();
        let p = engine.replay(&from, whole.cell_image(&c.name).unwrap()).unwrap();
        let q = engine.replay(&from, parts.cell_image(&c.name).unwrap()).unwrap();
        assert!(engine.equal(&p, &q, DEFAULT_BUDGET).unwrap().is_holds(), "{}", c.name);
    }
}

#[test]
fn same_map_on_both_sides() {
    let mu = stdlib::morphism("mon_to_smon").unwrap();
    let k = kronecker_morphism(&mu, &mu).unwrap();
    assert!(k.cell_image("alpha").is_some());
    assert!(k.cell_image("alpha_2").is_some());
    let v = check_morphism(&k);
    assert!(!v.is_fails(), "{v}");
}
