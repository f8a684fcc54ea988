//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use coherence_core::category::{ArrowId, FiniteCategory, Functor};
use coherence_core::cells::{CellMap, TruncatedTheory};
use coherence_core::classify::{classify, classify_cells, isos_from};
use coherence_core::equivalence::{
    adjointify, check_witness, compose, coproduct_witness, find_equivalence, flip, witness_for, EquivalenceWitness,
};
use coherence_core::factor::{compare_factorizations, mapping_cylinder, path_object, FactorizationResult};
use coherence_core::homcat::{hom_category, Bound};
use coherence_core::kronecker::{check_delta_coherence, expand, kronecker, kronecker_morphism, swap};
use coherence_core::lifting::{lift_square_first, lift_square_second, retract_lift, Preference, Retract, Square};
use coherence_core::morphism::{check_morphism, TheoryMorphism};
use coherence_core::parse::parse_term;
use coherence_core::rewrite::{parse_steps, Engine, RewriteStep, DEFAULT_BUDGET};
use coherence_core::term::Symbol;
use coherence_core::verdict::Certificate;
use coherence_core::{stdlib, Term, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn b() -> Bound {
    Bound::default()
}

fn b5() -> Bound {
    Bound::new(5, 8, 16).unwrap()
}

fn catalan(n: usize) -> usize {
    let mut c = vec![1usize; n + 1];
    for i in 1..=n {
        c[i] = (0..i).map(|k| c[k] * c[i - 1 - k]).sum();
    }
    c[n]
}

fn theory(key: &str) -> Arc<TruncatedTheory> {
    Arc::new(TruncatedTheory::presented(&stdlib::theory(key).unwrap(), &b()).unwrap())
}

fn map(key: &str) -> CellMap {
    CellMap::of_morphism(&stdlib::morphism(key).unwrap(), &b()).unwrap()
}

fn all_singletons(c: &FiniteCategory) -> bool {
    (0..c.len()).all(|a| (0..c.len()).all(|x| c.hom(a, x).len() == 1))
}

// 1

fn catalan_counts() -> Check {
    let bin = stdlib::theory("bin").unwrap();
    for n in 2..=5 {
        let h = ok(hom_category(&bin, n, &b5()))?;
        ensure!(h.category.len() == catalan(n - 1), "bin({n}) has {} objects", h.category.len());
        ensure!(h.category.arrow_count() == h.category.len(), "bin({n}) has non-identity arrows");
    }
    Ok(())
}

// 2

fn strict_theory() -> Check {
    let smon = stdlib::theory("smon_nounit").unwrap();
    for n in 1..=6 {
        let h = ok(hom_category(&smon, n, &Bound::new(6, 8, 16).unwrap()))?;
        let shape = (h.category.len(), h.category.arrow_count());
        ensure!(shape == (1, 1), "smon({n}) is {shape:?}");
    }
    Ok(())
}

// 3

/// Every maximal chain of forward rewrites from `from` down to its normal
/// form under forward steps only.
fn forward_chains(e: &Engine, from: &Term) -> Vec<Vec<RewriteStep>> {
    let steps = e.forward_steps(from).unwrap();
    if steps.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (s, next) in steps {
        for mut rest in forward_chains(e, &next) {
            rest.insert(0, s.clone());
            out.push(rest);
        }
    }
    out
}

fn associahedra() -> Check {
    let mon = stdlib::theory("mon_nounit").unwrap();
    let h4 = ok(hom_category(&mon, 4, &b()))?;
    ensure!(h4.category.len() == 5, "mon(4) has {} objects", h4.category.len());
    let c = &h4.category;
    for a in 0..5 {
        for x in 0..5 {
            let hom = c.hom(a, x);
            ensure!(hom.len() == 1 && c.is_iso(hom[0]), "mon(4) hom {a} -> {x}");
        }
    }
    let h5 = ok(hom_category(&mon, 5, &b5()))?;
    ensure!(h5.category.len() == 14 && all_singletons(&h5.category), "mon(5)");

    // all maximal Tamari chains at arity 5 are equal as 2-cells
    let e = ok(Engine::new(&mon))?;
    let left = parse_term("tensor(tensor(tensor(tensor(1,2),3),4),5)").unwrap();
    let chains = forward_chains(&e, &left);
    ensure!(chains.len() > 1, "{} chains", chains.len());
    let first = ok(e.replay(&left, &chains[0]))?;
    for ch in &chains[1..] {
        let p = ok(e.replay(&left, ch))?;
        ensure!(ok(e.equal(&first, &p, DEFAULT_BUDGET))?.is_holds(), "chain {ch:?}");
    }

    let source = "tensor(tensor(tensor(1,2),3),4)";
    let sides = |key: &str| {
        let p = stdlib::theory(key).unwrap();
        let e = Engine::new(&p).unwrap();
        let x = parse_term(source).unwrap();
        let a = e.replay(&x, &parse_steps("alpha ; alpha").unwrap()).unwrap();
        let c = e.replay(&x, &parse_steps("alpha@1 ; alpha ; alpha@2").unwrap()).unwrap();
        e.equal(&a, &c, DEFAULT_BUDGET).unwrap()
    };
    let v = sides("mon_nounit");
    ensure!(v.is_holds(), "pentagon in mon: {v}");
    match sides("assoc") {
        Verdict::Fails(w) => ensure!(
            matches!(w.certificate, Some(Certificate::LoopClass { .. })),
            "assoc failure without loop certificate"
        ),
        other => return Err(format!("pentagon in assoc: {other}")),
    }
    Ok(())
}

// 4

fn classification() -> Check {
    let r = ok(classify(&stdlib::morphism("mon_to_smon").unwrap(), &b()))?;
    ensure!(r.weak_equivalence.is_holds(), "mu weq {}", r.weak_equivalence);
    ensure!(r.fibration.is_holds(), "mu fib {}", r.fibration);
    ensure!(r.cofibration.is_fails(), "mu cofib {}", r.cofibration);
    let r = ok(classify(&stdlib::morphism("bin_to_mon").unwrap(), &b()))?;
    ensure!(r.cofibration.is_holds(), "inclusion cofib {}", r.cofibration);
    ensure!(r.weak_equivalence.is_fails(), "inclusion weq {}", r.weak_equivalence);
    Ok(())
}

// 5

fn replays(r: &FactorizationResult, f: &CellMap) -> Check {
    let composite = ok(r.into_middle.then(&r.out_of_middle))?;
    composite.agrees_with(f).map_err(|m| format!("{}: {m}", f.label))
}

fn factorization_axioms() -> Check {
    for f in [map("bin_to_smon"), CellMap::identity(theory("bin"))] {
        let p = ok(path_object(&f))?;
        let (k, g) = (classify_cells(&p.into_middle), classify_cells(&p.out_of_middle));
        ensure!(k.trivial_cofibration.is_holds(), "{} path K: {}", f.label, k.trivial_cofibration);
        ensure!(g.fibration.is_holds(), "{} path G: {}", f.label, g.fibration);
        replays(&p, &f)?;

        let c = ok(mapping_cylinder(&f))?;
        let (k, g) = (classify_cells(&c.into_middle), classify_cells(&c.out_of_middle));
        ensure!(k.cofibration.is_holds(), "{} cylinder K: {}", f.label, k.cofibration);
        ensure!(g.trivial_fibration.is_holds(), "{} cylinder G: {}", f.label, g.trivial_fibration);
        replays(&c, &f)?;
    }
    Ok(())
}

// 6

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Isomorphism of categories whose hom-sets have at most one element.
fn thin_isomorphic(c: &FiniteCategory, d: &FiniteCategory) -> bool {
    c.len() == d.len()
        && permutations(c.len())
            .into_iter()
            .any(|p| (0..c.len()).all(|a| (0..c.len()).all(|x| c.hom(a, x).len() == d.hom(p[a], p[x]).len())))
}

fn pure(t: &Term, name: &str) -> bool {
    t.symbols().iter().all(|s| &**s == name)
}

fn starfish() -> Check {
    let cyl = ok(mapping_cylinder(&map("bin_to_smon")))?;
    let m4 = cyl.middle.at(4);
    ensure!(m4.len() == 6 && all_singletons(m4), "cylinder(4) has {} objects", m4.len());

    let strfsh = stdlib::theory("strfsh").unwrap();
    for n in 0..=4 {
        let h = ok(hom_category(&strfsh, n, &b()))?;
        let m = cyl.middle.at(n);
        ensure!(find_equivalence(m, &h.category).is_some(), "arity {n}: not equivalent");
        if n == 1 {
            // the cylinder keeps both copies of the identity
            continue;
        }
        let keep: Vec<usize> = (0..h.terms.len())
            .filter(|&i| pure(&h.terms[i], "tensor") || pure(&h.terms[i], "oplus"))
            .collect();
        let (sub, _) = h.category.full_subcategory(&keep);
        ensure!(thin_isomorphic(m, &sub), "arity {n}: not isomorphic");
    }

    let c5 = ok(mapping_cylinder(&ok(CellMap::of_morphism(&stdlib::morphism("bin_to_smon").unwrap(), &b5()))?))?;
    for n in 2..=5 {
        let m = c5.middle.at(n);
        let k = c5.into_middle.functor(n).ok_or("missing functor")?;
        ensure!(k.objects.len() == catalan(n - 1), "arity {n}: {} words", k.objects.len());
        let tips: Vec<usize> = (0..m.len()).filter(|x| !k.objects.contains(x)).collect();
        ensure!(tips.len() == 1, "arity {n}: {} oplus words", tips.len());
        for &w in &k.objects {
            ensure!(m.hom(w, tips[0]).len() == 1, "arity {n}: word {w}");
        }
    }
    Ok(())
}

// 7

fn universal_property() -> Check {
    let cyl = ok(mapping_cylinder(&map("bin_to_smon")))?;
    let mon = theory("mon_nounit");
    let k2 = ok(CellMap::from_morphism(&stdlib::morphism("bin_to_mon").unwrap(), cyl.into_middle.source.clone(), mon))?;
    let g2 = ok(CellMap::from_morphism(
        &stdlib::morphism("mon_to_smon").unwrap(),
        k2.target.clone(),
        cyl.out_of_middle.target.clone(),
    ))?;
    let cmp = ok(compare_factorizations(&cyl, &k2, &g2, Preference::Reversed))?;
    ensure!(cmp.uniqueness.is_holds(), "uniqueness {}", cmp.uniqueness);
    for h in [&cmp.h, &cmp.h_prime] {
        ok(cyl.into_middle.then(h))?.agrees_with(&k2).map_err(|m| format!("upper triangle: {m}"))?;
        ok(h.then(&g2))?.agrees_with(&cyl.out_of_middle).map_err(|m| format!("lower triangle: {m}"))?;
    }
    for n in cyl.middle.arities() {
        let c5 = g2.source.at(n);
        let (p, q) = (cmp.h.functor(n).ok_or("H")?, cmp.h_prime.functor(n).ok_or("H'")?);
        for (x, &a) in cmp.alphas[&n].iter().enumerate() {
            ensure!((c5.src(a), c5.dst(a)) == (p.objects[x], q.objects[x]), "alpha at {n}/{x} misplaced");
            ensure!(c5.is_iso(a), "alpha at {n}/{x} not invertible");
            let fixed = g2.target.at(n).identity(g2.object(n, p.objects[x]).ok_or("object")?);
            ensure!(g2.arrow(n, a) == Some(fixed), "alpha at {n}/{x} not over an identity");
        }
        let mut differs = false;
        for x in 0..cyl.middle.at(n).len() {
            if p.objects[x] != q.objects[x] {
                differs = true;
                ensure!(cmp.alphas[&n][x] != c5.identity(p.objects[x]), "arity {n}: moved object with identity alpha");
            }
        }
        if n == 4 {
            ensure!(differs, "reversed order found the same lift at arity 4");
        }
    }
    Ok(())
}

// 8

/// Random category: isomorphism classes with cyclic automorphism groups,
/// plus a strict order on classes giving one arrow per related pair.
#[derive(Clone, Debug)]
struct Shape {
    sizes: Vec<usize>,
    orders: Vec<usize>,
    below: Vec<Vec<bool>>,
}

impl Shape {
    fn random(rng: &mut ChaCha8Rng, max_objects: usize) -> Shape {
        let total = rng.gen_range(1..=max_objects);
        let mut sizes = Vec::new();
        let mut left = total;
        while left > 0 {
            let s = rng.gen_range(1..=left);
            sizes.push(s);
            left -= s;
        }
        let k = sizes.len();
        let orders = (0..k).map(|_| rng.gen_range(1..=3)).collect();
        let mut below = vec![vec![false; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                below[i][j] = rng.gen_bool(0.4);
            }
        }
        for m in 0..k {
            for i in 0..k {
                for j in 0..k {
                    if below[i][m] && below[m][j] {
                        below[i][j] = true;
                    }
                }
            }
        }
        Shape { sizes, orders, below }
    }

    fn inflate(&self, rng: &mut ChaCha8Rng, max_objects: usize) -> Shape {
        let k = self.sizes.len();
        let mut sizes = vec![1; k];
        let mut extra = max_objects.saturating_sub(k);
        for s in sizes.iter_mut() {
            let add = rng.gen_range(0..=extra);
            *s += add;
            extra -= add;
        }
        Shape { sizes, ..self.clone() }
    }

    fn build(&self) -> FiniteCategory {
        let mut class = Vec::new();
        for (c, &s) in self.sizes.iter().enumerate() {
            class.extend(std::iter::repeat(c).take(s));
        }
        let n = class.len();
        let mut arrows = Vec::new();
        let mut index: HashMap<(usize, usize, usize), ArrowId> = HashMap::new();
        for a in 0..n {
            for z in 0..n {
                let (ca, cz) = (class[a], class[z]);
                let count = if ca == cz {
                    self.orders[ca]
                } else {
                    usize::from(self.below[ca][cz])
                };
                for i in 0..count {
                    index.insert((a, z, i), arrows.len());
                    arrows.push((a, z, format!("x{a}_{z}_{i}")));
                }
            }
        }
        let identities = (0..n).map(|a| index[&(a, a, 0)]).collect();
        let mut info = vec![(0, 0, 0); arrows.len()];
        for (&(a, z, i), &f) in &index {
            info[f] = (a, z, i);
        }
        let orders = self.orders.clone();
        let mut c = FiniteCategory::from_fn((0..n).map(|a| format!("c{a}")).collect(), arrows, identities, move |f, g| {
            let (a, _, i) = info[f];
            let (_, d, j) = info[g];
            let k = if class[a] == class[d] { (i + j) % orders[class[a]] } else { 0 };
            index.get(&(a, d, k)).copied()
        });
        c.warnings.clear();
        c
    }
}

fn triangles(w: &EquivalenceWitness) -> bool {
    let (c, d) = (&w.source, &w.target);
    let fa = |x| w.forward.arrow(x, c, d).unwrap();
    let ga = |x| w.backward.arrow(x, d, c).unwrap();
    (0..c.len()).all(|a| {
        let fa0 = w.forward.objects[a];
        d.then(fa(w.unit[a]), w.counit[fa0]) == Some(d.identity(fa0))
    }) && (0..d.len()).all(|x| {
        let gx = w.backward.objects[x];
        c.then(w.unit[gx], ga(w.counit[x])) == Some(c.identity(gx))
    })
}

fn equivalence_calculus() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let found = |c: &FiniteCategory, d: &FiniteCategory| find_equivalence(c, d).ok_or("no witness between inflations");
    for case in 0..100 {
        let shape = Shape::random(&mut rng, 6);
        let (a, b1, c) = (shape.build(), shape.inflate(&mut rng, 6).build(), shape.inflate(&mut rng, 6).build());
        let w = found(&a, &b1)?;
        let w2 = found(&b1, &c)?;
        ensure!(check_witness(&w).is_holds(), "case {case}: witness");
        let fl = flip(&w);
        let wc = ok(compose(&w, &w2))?;
        let other = Shape::random(&mut rng, 3);
        let sum = coproduct_witness(&w, &found(&other.build(), &other.inflate(&mut rng, 3).build())?);
        for (name, v) in [("flip", &fl), ("compose", &wc), ("coproduct", &sum)] {
            let verdict = check_witness(v);
            ensure!(verdict.is_holds(), "case {case}: {name}: {verdict}");
        }
        for v in [&w, &fl, &wc, &sum] {
            let adj = adjointify(v);
            ensure!(adj.adjoint && check_witness(&adj).is_holds(), "case {case}: adjointify");
            ensure!(triangles(&adj), "case {case}: triangle identities");
        }
    }
    Ok(())
}

// 9

fn commutes(s: &Square, h: &CellMap) -> Check {
    ok(s.f.then(h))?.agrees_with(s.u).map_err(|m| format!("upper triangle: {m}"))?;
    ok(h.then(s.g))?.agrees_with(s.v).map_err(|m| format!("lower triangle: {m}"))
}

fn lifting_squares() -> Check {
    let mut solved = 0;
    let mu = map("mon_to_smon");
    let inc = map("bin_to_mon");

    for (x, u) in [("mon_nounit", None), ("bin", Some("bin_to_mon")), ("assoc", Some("assoc_to_mon")), ("strfsh", Some("strfsh_to_mon"))] {
        let f = CellMap::identity(theory(x));
        let u = u.map(map).unwrap_or_else(|| CellMap::identity(theory("mon_nounit")));
        let v = ok(u.then(&mu))?;
        let s = Square { f: &f, g: &mu, u: &u, v: &v };
        commutes(&s, &ok(lift_square_first(&s))?)?;
        solved += 1;
    }
    let mut factored: Vec<CellMap> = ["bin_to_smon", "mon_to_smon", "bin_to_mon", "bin_to_strfsh", "strfsh_to_smon"]
        .into_iter()
        .map(map)
        .collect();
    factored.push(CellMap::identity(theory("bin")));
    for f in &factored {
        let p = ok(path_object(f))?;
        let s = Square {
            f: &p.into_middle,
            g: &p.out_of_middle,
            u: &p.into_middle,
            v: &p.out_of_middle,
        };
        commutes(&s, &ok(lift_square_first(&s))?)?;
        solved += 1;
    }
    let p = ok(path_object(&factored[0]))?;
    let s = Square {
        f: &p.into_middle,
        g: &mu,
        u: &inc,
        v: &p.out_of_middle,
    };
    commutes(&s, &ok(lift_square_first(&s))?)?;
    solved += 1;

    let s = Square { f: &inc, g: &mu, u: &inc, v: &mu };
    commutes(&s, &ok(lift_square_second(&s, Preference::Canonical))?)?;
    solved += 1;
    for key in ["bin_to_smon", "bin_to_mon", "bin_to_strfsh", "mon_to_smon"] {
        let c = ok(mapping_cylinder(&map(key)))?;
        let s = Square {
            f: &c.into_middle,
            g: &c.out_of_middle,
            u: &c.into_middle,
            v: &c.out_of_middle,
        };
        commutes(&s, &ok(lift_square_second(&s, Preference::Canonical))?)?;
        solved += 1;
    }
    let c = ok(mapping_cylinder(&factored[0]))?;
    let s = Square {
        f: &c.into_middle,
        g: &mu,
        u: &inc,
        v: &c.out_of_middle,
    };
    for order in [Preference::Canonical, Preference::Reversed, Preference::Seeded(1), Preference::Seeded(2)] {
        commutes(&s, &ok(lift_square_second(&s, order))?)?;
        solved += 1;
    }
    ensure!(solved == 20, "{solved} squares");

    for key in ["mon_to_smon", "bin_to_smon", "strfsh_to_smon"] {
        retract_replay(key)?;
    }
    Ok(())
}

/// `f` as a retract of its path-object projection; every lift must match
/// the formula J(L_G(H(x), H'(beta))) computed here by hand.
fn retract_replay(key: &str) -> Check {
    let f = map(key);
    let p = ok(path_object(&f))?;
    let k = p.into_middle.clone();
    let mut j = CellMap {
        label: "J".into(),
        source: k.target.clone(),
        target: k.source.clone(),
        per_arity: Default::default(),
        missing: Default::default(),
    };
    for n in k.source.arities() {
        let w = witness_for(k.source.at(n), k.target.at(n), k.functor(n).ok_or("K")?.clone()).map_err(|e| e.to_string())?;
        j.per_arity.insert(n, w.backward);
    }
    let t = CellMap::identity(f.target.clone());
    let g = p.out_of_middle.clone();
    let r = Retract {
        f: &f,
        g: &g,
        h: &k,
        j: &j,
        h2: &t,
        j2: &t,
    };
    ok(r.check())?;
    let gl = classify_cells(&g);
    ensure!(gl.fibration.is_holds(), "{key}: G is not a fibration");
    for n in f.source.arities() {
        let (c1, c2) = (f.source.at(n), f.target.at(n));
        let (m, d) = (g.source.at(n), g.target.at(n));
        let (ff, gf, hf, jf): (&Functor, &Functor, &Functor, &Functor) = (
            f.functor(n).ok_or("F")?,
            g.functor(n).ok_or("G")?,
            k.functor(n).ok_or("H")?,
            j.functor(n).ok_or("J")?,
        );
        for x in 0..c1.len() {
            for beta in isos_from(c2, ff.objects[x]) {
                let l = ok(retract_lift(&r, n, x, beta))?;
                ensure!(c1.src(l) == x && c1.is_iso(l), "{key}({n}): lift of {beta} misplaced");
                ensure!(ff.arrow(l, c1, c2) == Some(beta), "{key}({n}): lift of {beta} does not cover it");
                // the first lift in canonical order over H'(beta) from H(x)
                let hx = hf.objects[x];
                let id = m.identity(hx);
                let lg = std::iter::once(id)
                    .chain((0..m.len()).flat_map(|y| m.hom(hx, y)).filter(|&a| a != id && m.is_iso(a)))
                    .find(|&a| gf.arrow(a, m, d) == Some(beta))
                    .ok_or("no lift along G")?;
                ensure!(jf.arrow(lg, m, c1) == Some(l), "{key}({n}): lift differs from J(L_G(H x, H' beta))");
            }
        }
    }
    Ok(())
}

// 10

fn kronecker_checks() -> Check {
    let bin = stdlib::theory("bin").unwrap();
    let kb = ok(kronecker(&bin, &bin))?;
    let v = check_delta_coherence(&kb, &b());
    ensure!(v.is_holds(), "delta coherence {v}");

    let id_bin = TheoryMorphism::identity(&bin);
    let (inc, mu) = (stdlib::morphism("bin_to_mon").unwrap(), stdlib::morphism("mon_to_smon").unwrap());
    for (f1, f2) in [(&inc, &id_bin), (&mu, &mu), (&id_bin, &inc)] {
        let k = ok(kronecker_morphism(f1, f2))?;
        let v = check_morphism(&k);
        ensure!(!v.is_fails(), "{}: {v}", k.name);
        let engine = ok(Engine::new(&k.target))?;
        let deltas: BTreeSet<Symbol> = k.target.kronecker.as_ref().ok_or("target data")?.deltas.iter().map(|d| d.cell.clone()).collect();
        let func = ok(k.functor())?;
        for d in &k.source.kronecker.as_ref().ok_or("source data")?.deltas {
            let arity = |s: &Symbol| k.source.symbol(s).map(|o| o.arity).ok_or(format!("unknown symbol {s}"));
            let h = ok(func.image(&Term::generator(&d.left, arity(&d.left)?)))?;
            let kk = ok(func.image(&Term::generator(&d.right, arity(&d.right)?)))?;
            let src = k.source.cell(&d.cell).ok_or("delta cell")?;
            let got = ok(engine.replay(&ok(func.image(&src.source))?, k.cell_image(&d.cell).ok_or("image")?))?;
            let want = ok(expand(&engine, &deltas, &h, &kk))?;
            let eq = ok(engine.equal(&got, &want, DEFAULT_BUDGET))?;
            ensure!(eq.is_holds(), "{}: {} {eq}", k.name, d.cell);
        }
    }

    let there = ok(swap(&kb, &kb))?;
    let v = check_morphism(&there);
    ensure!(!v.is_fails(), "swap: {v}");
    let round = ok(there.then(&there))?;
    let engine = ok(Engine::new(&kb))?;
    let func = ok(round.functor())?;
    for s in &kb.symbols {
        let g = Term::generator(&s.name, s.arity);
        ensure!(ok(func.image(&g))? == ok(engine.normalize(&g))?, "swap twice moves {}", s.name);
    }
    for c in &kb.cells {
        let from = ok(engine.normalize(&c.source))?;
        let got = ok(engine.replay(&from, round.cell_image(&c.name).ok_or("image")?))?;
        let id = ok(engine.replay(&from, &[RewriteStep::forward(&c.name)]))?;
        ensure!(ok(engine.equal(&got, &id, DEFAULT_BUDGET))?.is_holds(), "swap twice moves {}", c.name);
    }

    let r = ok(classify(&ok(kronecker_morphism(&mu, &mu))?, &b()))?;
    ensure!(!r.weak_equivalence.is_fails(), "mu x mu weq {}", r.weak_equivalence);
    Ok(())
}

// 11

const COMMANDS: &[&str] = &[
    "show bin",
    "show --map stdlib:bin_to_strfsh",
    "enumerate bin --arity 4",
    "enumerate mon_nounit --arity 4 --format dot",
    "enumerate strfsh --arity 3 --format text",
    "classify --map stdlib:mon_to_smon",
    "classify --map stdlib:bin_to_mon --format text",
    "certify --map stdlib:mon_to_smon",
    "certify --map stdlib:bin_to_smon",
    "factor cylinder --map stdlib:bin_to_smon --emit-dot",
    "factor path --map stdlib:bin_to_smon",
    "factor cylinder --map stdlib:bin_to_smon --format dot --arity 3",
    "lift --map stdlib:mon_to_smon --term tensor(tensor(1,2),3) --path id",
    "lift --map stdlib:bin_to_smon --via stdlib:bin_to_mon --then stdlib:mon_to_smon --seed 7",
    "kronecker bin bin --check",
    "coherence mon_nounit --arity 4",
    "coherence assoc --source tensor(tensor(tensor(1,2),3),4) --lhs alpha;alpha --rhs alpha@1;alpha;alpha@2",
    "compare --map stdlib:bin_to_smon --via stdlib:bin_to_mon --then stdlib:mon_to_smon",
];

fn cli(args: &str, threads: usize) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coherence-forge"));
    c.args(args.split_whitespace()).arg("--threads").arg(threads.to_string());
    c.env_remove("COHERENCE_FORGE_BOUND");
    c
}

fn determinism() -> Check {
    let mut baseline = Vec::new();
    for args in COMMANDS {
        let out = ok(cli(args, 1).output())?;
        ensure!(out.status.code().is_some_and(|c| c <= 2), "{args}: exit {:?}", out.status.code());
        ensure!(!out.stdout.is_empty(), "{args}: no output");
        baseline.push(out);
    }
    for threads in [1, 4] {
        // all commands at once, so schedules interleave
        let children: Vec<_> = COMMANDS
            .iter()
            .map(|args| cli(args, threads).stdout(std::process::Stdio::piped()).spawn())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for ((args, child), base) in COMMANDS.iter().zip(children).zip(&baseline) {
            let out = ok(child.wait_with_output())?;
            ensure!(out.stdout == base.stdout, "{args}: output differs with {threads} threads");
            ensure!(out.status.code() == base.status.code(), "{args}: exit code differs");
        }
    }
    Ok(())
}

fn run(n: usize, name: &str, budget: Duration, check: fn() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(msg)
    });
    let took = start.elapsed();
    let result = result.and_then(|()| {
        if took <= budget {
            Ok(())
        } else {
            Err(format!("over the {:.0?} budget", budget))
        }
    });
    match &result {
        Ok(()) => println!("PASS {n:>2} {name} ({:.2}s)", took.as_secs_f64()),
        Err(e) => println!("FAIL {n:>2} {name} ({:.2}s): {e}", took.as_secs_f64()),
    }
    result.is_ok()
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: [(&str, Duration, fn() -> Check); 11] = [
        ("catalan counts in bin", secs(1), catalan_counts),
        ("strict monoidal theory is a point", secs(1), strict_theory),
        ("associahedra in mon, pentagon fails in assoc", secs(30), associahedra),
        ("classification of strictification and inclusion", secs(30), classification),
        ("factorization axioms", secs(60), factorization_axioms),
        ("starfish reproduction", secs(60), starfish),
        ("universal property of the cylinder", secs(60), universal_property),
        ("equivalence calculus on random categories", secs(60), equivalence_calculus),
        ("lifting squares and retracts", secs(60), lifting_squares),
        ("kronecker products", secs(120), kronecker_checks),
        ("byte-stable cli output across runs and threads", secs(300), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        if !run(i + 1, name, budget, check) {
            failed += 1;
        }
    }
    println!("{} of 11 criteria pass", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
