use std::collections::BTreeMap;

use coherence_core::colimit::{coproduct, initial, pushout, rename};
use coherence_core::homcat::{hom_category, Bound};
use coherence_core::levels::{apply_c, apply_d, apply_pi0, apply_u};
use coherence_core::morphism::TheoryMorphism;
use coherence_core::normalize::{normalize_term, permutations};
use coherence_core::parse::{parse_presentation, parse_term};
use coherence_core::presentation::TheoryPresentation;
use coherence_core::term::enumerate_planar;
use coherence_core::{stdlib, Error, Term};
use proptest::prelude::*;

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn one_theories() -> Vec<TheoryPresentation> {
    ["fin", "bin", "smon", "smon_nounit"]
        .iter()
        .map(|k| stdlib::theory(k).unwrap())
        .collect()
}

#[test]
fn single_binary_symbol_is_bin() {
    let p = parse_presentation("theory: magma\nsymbols:\n  tensor/2\n").unwrap();
    assert!(p.same_structure(&stdlib::theory("bin").unwrap()));
}

#[test]
fn wrong_child_count_is_rejected() {
    let src = "theory: bad\nsymbols:\n  tensor/2\ncells:\n  a : tensor(1,2,3) => tensor(1,2) iso\n";
    assert!(matches!(parse_presentation(src), Err(Error::ArityMismatch { .. })));
}

#[test]
fn stdlib_round_trips() {
    for key in stdlib::THEORY_KEYS {
        let p = stdlib::theory(key).unwrap();
        let q = parse_presentation(&p.render()).unwrap();
        assert!(p.same_structure(&q), "{key}");
        assert_eq!(q.render(), p.render(), "{key}");
    }
}

#[test]
fn left_association_by_substitution() {
    assert_eq!(t("tensor(1,2)").substitute(1, &t("tensor(1,2)")).unwrap(), t("tensor(tensor(1,2),3)"));
    assert_eq!(t("tensor(1,2)").substitute(2, &t("tensor(1,2)")).unwrap(), t("tensor(1,tensor(2,3))"));
    assert!(matches!(t("tensor(1,2)").substitute(3, &Term::identity()), Err(Error::SlotOutOfRange { .. })));
}

fn small_terms() -> Vec<Term> {
    let sig = vec![("f".into(), 1), ("g".into(), 2), ("h".into(), 3)];
    let mut out = Vec::new();
    for n in 1..=4 {
        for term in enumerate_planar(&sig, n, 3) {
            for p in permutations(n).iter().take(3) {
                out.push(term.relabel(|v| p[v - 1]));
            }
        }
    }
    out
}

#[test]
fn operad_unit_laws() {
    for term in small_terms() {
        assert_eq!(Term::identity().substitute(1, &term).unwrap(), term);
        for i in 1..=term.arity() {
            assert_eq!(term.substitute(i, &Term::identity()).unwrap(), term, "{term} at {i}");
        }
    }
}

/// Substitution through the leaf sequence: the slot's leaf expands in
/// place and every label is recomputed by counting.
fn oracle_substitute(outer: &Term, slot: usize, inner: &Term) -> Term {
    let k = inner.arity();
    fn go(t: &Term, slot: usize, k: usize, inner: &Term) -> Term {
        match t {
            Term::Leaf(i) if *i == slot => inner.relabel(|j| j + slot - 1),
            Term::Leaf(i) if *i > slot => Term::Leaf(i + k - 1),
            Term::Leaf(i) => Term::Leaf(*i),
            Term::Node(s, cs) => Term::Node(s.clone(), cs.iter().map(|c| go(c, slot, k, inner)).collect()),
        }
    }
    go(outer, slot, k, inner)
}

fn linear_term() -> impl Strategy<Value = Term> {
    let shape = Just(Term::Leaf(0)).prop_recursive(4, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|c| Term::node("f", vec![c])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::node("g", vec![a, b])),
            (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| Term::node("h", vec![a, b, c])),
        ]
    });
    shape.prop_flat_map(|s| {
        let n = s.arity();
        (Just(s), Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
    })
    .prop_map(|(s, labels)| {
        fn number(t: &Term, next: &mut usize, labels: &[usize]) -> Term {
            match t {
                Term::Leaf(_) => {
                    *next += 1;
                    Term::Leaf(labels[*next - 1])
                }
                Term::Node(s, cs) => Term::Node(s.clone(), cs.iter().map(|c| number(c, next, labels)).collect()),
            }
        }
        number(&s, &mut 0, &labels)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn operad_associativity(
        (t1, i) in linear_term().prop_flat_map(|t| { let n = t.arity(); (Just(t), 1..=n) }),
        (u, j) in linear_term().prop_flat_map(|t| { let n = t.arity(); (Just(t), 1..=n) }),
        v in linear_term(),
    ) {
        let left = t1.substitute(i, &u).unwrap().substitute(i + j - 1, &v).unwrap();
        let right = t1.substitute(i, &u.substitute(j, &v).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(t1.substitute(i, &u).unwrap(), oracle_substitute(&t1, i, &u));
        prop_assert!(left.is_linear());
    }
}

#[test]
fn strict_associativity_normal_form() {
    let smon = stdlib::theory("smon").unwrap();
    assert_eq!(
        normalize_term(&smon, &t("tensor(tensor(1,2),3)")).unwrap(),
        t("tensor(1,tensor(2,3))")
    );
    let bin = stdlib::theory("bin").unwrap();
    for term in enumerate_planar(&bin.signature(), 4, 3) {
        assert_eq!(normalize_term(&bin, &term).unwrap(), term);
    }
}

#[test]
fn normalization_is_idempotent() {
    for key in ["smon", "smon_nounit", "strfsh"] {
        let p = stdlib::theory(key).unwrap();
        for n in 0..=4 {
            for term in enumerate_planar(&p.signature(), n, 8) {
                let once = normalize_term(&p, &term).unwrap();
                assert_eq!(normalize_term(&p, &once).unwrap(), once, "{key}: {term}");
            }
        }
    }
}

#[test]
fn discrete_theories() {
    let magmas = parse_presentation("theory: magmas\nsymbols:\n  tensor/2\n").unwrap();
    assert!(apply_d(&magmas).unwrap().same_structure(&stdlib::theory("bin").unwrap()));
    let monoids = apply_u(&stdlib::theory("smon").unwrap());
    assert!(apply_d(&monoids).unwrap().same_structure(&stdlib::theory("smon").unwrap()));
    assert!(apply_d(&initial()).unwrap().same_structure(&initial()));
}

#[test]
fn codiscrete_pointed_magmas() {
    let pointed = parse_presentation("theory: pointed\nsymbols:\n  tensor/2\n  e/0\n").unwrap();
    let b = Bound::new(2, 2, 8).unwrap();
    let c = apply_c(&pointed, &b).unwrap();
    assert!(c.indiscrete);
    let h = hom_category(&c, 2, &b).unwrap();
    let (x, y) = (h.object(&t("tensor(1,2)")).unwrap(), h.object(&t("tensor(2,1)")).unwrap());
    let hom = h.category.hom(x, y);
    assert_eq!(hom.len(), 1);
    assert!(h.category.is_iso(hom[0]));
    assert!(apply_c(&initial(), &b).unwrap().cells.is_empty());
}

#[test]
fn codiscrete_homs_are_indiscrete() {
    let b = Bound::new(3, 3, 8).unwrap();
    let c = apply_c(&stdlib::theory("bin").unwrap(), &b).unwrap();
    for n in 2..=3 {
        let h = hom_category(&c, n, &b).unwrap();
        for x in 0..h.category.len() {
            for y in 0..h.category.len() {
                assert_eq!(h.category.hom(x, y).len(), 1, "arity {n}");
            }
        }
    }
}

#[test]
fn forgetting_cells() {
    let u = apply_u(&stdlib::theory("mon").unwrap());
    assert!(u.cells.is_empty() && u.relations.is_empty());
    let names: Vec<&str> = u.symbols.iter().map(|s| &*s.name).collect();
    assert_eq!(names, ["tensor", "e"]);
    for p in one_theories() {
        assert!(apply_u(&apply_d(&p).unwrap()).same_structure(&p), "{}", p.name);
        assert!(apply_pi0(&apply_d(&p).unwrap()).unwrap().same_structure(&p), "{}", p.name);
    }
    let b = Bound::new(2, 3, 8).unwrap();
    let bin = stdlib::theory("bin").unwrap();
    let uc = apply_u(&apply_c(&bin, &b).unwrap());
    assert_eq!(uc.symbols, bin.symbols);
}

#[test]
fn connected_components() {
    let p = apply_pi0(&stdlib::theory("mon_nounit").unwrap()).unwrap();
    assert!(p.same_structure(&stdlib::theory("smon_nounit").unwrap()));
    let bin = stdlib::theory("bin").unwrap();
    assert!(apply_pi0(&bin).unwrap().same_structure(&bin));
}

#[test]
fn braids_become_commutative() {
    let p = apply_pi0(&stdlib::theory("braid").unwrap()).unwrap();
    assert_eq!(
        normalize_term(&p, &t("tensor(2,1)")).unwrap(),
        normalize_term(&p, &t("tensor(1,2)")).unwrap()
    );
    for n in 2..=4 {
        let mut forms = std::collections::BTreeSet::new();
        for term in enumerate_planar(&p.signature(), n, n - 1) {
            for perm in permutations(n) {
                forms.insert(normalize_term(&p, &term.relabel(|v| perm[v - 1])).unwrap());
            }
        }
        assert_eq!(forms.len(), 1, "arity {n}: {forms:?}");
    }
}

#[test]
fn initial_is_a_unit_for_coproduct() {
    for key in stdlib::THEORY_KEYS {
        let p = stdlib::theory(key).unwrap();
        assert!(coproduct(&p, &initial()).presentation.same_structure(&p), "{key}");
        assert!(coproduct(&initial(), &p).presentation.same_structure(&p), "{key}");
    }
}

#[test]
fn two_binary_operations() {
    let bin = stdlib::theory("bin").unwrap();
    let c = coproduct(&bin, &bin).presentation;
    assert_eq!(c.symbols.iter().filter(|s| s.arity == 2).count(), 2);
    assert_eq!(hom_category(&c, 2, &Bound::default()).unwrap().category.len(), 2);
}

/// Planar trees with leaves 1..n in order over the given symbols, counted
/// by size.
fn count_planar(arities: &[usize], n: usize, max_size: usize) -> usize {
    // table[s][k]: trees with exactly s nodes and k leaves
    let mut table = vec![vec![0usize; n + 1]; max_size + 1];
    if n >= 1 {
        table[0][1] = 1;
    }
    for s in 1..=max_size {
        for &a in arities {
            // sequences of `a` subtrees with total size s-1 and k leaves
            let mut seq = vec![vec![0usize; n + 1]; s];
            seq[0][0] = 1;
            for _ in 0..a {
                let mut next = vec![vec![0usize; n + 1]; s];
                for s1 in 0..s {
                    for k1 in 0..=n {
                        if seq[s1][k1] == 0 {
                            continue;
                        }
                        for s2 in 0..s - s1 {
                            for k2 in 0..=n - k1 {
                                next[s1 + s2][k1 + k2] += seq[s1][k1] * table[s2][k2];
                            }
                        }
                    }
                }
                seq = next;
            }
            for k in 0..=n {
                table[s][k] += seq[s - 1][k];
            }
        }
    }
    (0..=max_size).map(|s| table[s][n]).sum()
}

#[test]
fn planar_count_oracle_agrees_with_catalan() {
    assert_eq!(count_planar(&[2], 4, 8), 5);
    assert_eq!(count_planar(&[2], 5, 8), 14);
}

#[test]
fn monoidal_plus_binary_at_arity_four() {
    let b = Bound::new(4, 4, 8).unwrap();
    let c = coproduct(&stdlib::theory("mon").unwrap(), &stdlib::theory("bin").unwrap()).presentation;
    let h = hom_category(&c, 4, &b).unwrap();
    assert_eq!(h.category.len(), count_planar(&[2, 2, 0], 4, b.max_term_size));
}

fn swap_names(a: &str, b: &str) -> BTreeMap<String, String> {
    BTreeMap::from([(a.to_string(), b.to_string()), (b.to_string(), a.to_string())])
}

#[test]
fn coproduct_commutes_up_to_renaming() {
    let (mon, bin) = (stdlib::theory("mon_nounit").unwrap(), stdlib::theory("bin").unwrap());
    let mb = coproduct(&mon, &bin).presentation;
    let bm = coproduct(&bin, &mon).presentation;
    assert!(rename(&mb, &swap_names("tensor", "tensor_2")).same_structure(&bm));
}

#[test]
fn coproduct_associates_up_to_renaming() {
    let (a, b, c) = (
        stdlib::theory("mon_nounit").unwrap(),
        stdlib::theory("bin").unwrap(),
        stdlib::theory("smon").unwrap(),
    );
    let left = coproduct(&coproduct(&a, &b).presentation, &c).presentation;
    let right = coproduct(&a, &coproduct(&b, &c).presentation).presentation;
    let names = |p: &TheoryPresentation| p.symbols.iter().map(|s| (s.name.to_string(), s.arity)).collect::<Vec<_>>();
    assert_eq!(names(&left).len(), 4);
    // left names smon's tensor tensor_3, right names it tensor_2 inside
    // b+c and then renames that to tensor_3 against a
    let fix = |p: &TheoryPresentation| {
        let s = names(p);
        let mut m = BTreeMap::new();
        for (k, (name, _)) in s.iter().enumerate() {
            m.insert(name.clone(), format!("s{k}"));
        }
        rename(p, &m)
    };
    assert!(fix(&left).same_structure(&fix(&right)), "{}\n{}", left.render(), right.render());
}

#[test]
fn pushout_of_identities() {
    let p = stdlib::theory("mon_nounit").unwrap();
    let id = TheoryMorphism::identity(&p);
    let q = pushout(&id, &id).unwrap();
    let b = Bound::new(4, 8, 16).unwrap();
    for n in 0..=4 {
        let (x, y) = (hom_category(&p, n, &b).unwrap(), hom_category(&q.presentation, n, &b).unwrap());
        assert_eq!(x.category.len(), y.category.len(), "arity {n}");
        assert_eq!(x.category.arrow_count(), y.category.arrow_count(), "arity {n}");
    }
}

#[test]
fn pushout_along_strictification() {
    let mon = stdlib::theory("mon_nounit").unwrap();
    let x = coproduct(&mon, &stdlib::theory("bin").unwrap());
    let q = pushout(&stdlib::morphism("mon_to_smon").unwrap(), &x.left).unwrap();
    let rw = |s: &str| normalize_term(&q.presentation, &t(s)).unwrap();
    assert_eq!(rw("tensor(tensor(1,2),3)"), rw("tensor(1,tensor(2,3))"));
    assert_ne!(rw("tensor_2(tensor_2(1,2),3)"), rw("tensor_2(1,tensor_2(2,3))"));
    let r = coherence_core::classify::classify(&q.right, &Bound::new(3, 7, 12).unwrap()).unwrap();
    assert!(r.weak_equivalence.is_holds(), "{:?}", r.weak_equivalence);
}
