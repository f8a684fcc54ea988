//! Normal forms for 1-cells under oriented and permutative equations.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::presentation::{TermEquation, TheoryPresentation};
use crate::term::{enumerate_planar, Symbol, Term};
use crate::verdict::{Certificate, Verdict};

/// Rewrite steps allowed per operation node before giving up.
const STEPS_PER_NODE: usize = 256;

#[derive(Clone, Debug, Default)]
pub struct Rewriter {
    rules: Vec<TermEquation>,
}

impl Rewriter {
    pub fn new(equations: &[TermEquation]) -> Self {
        Rewriter {
            rules: equations.to_vec(),
        }
    }

    pub fn for_presentation(p: &TheoryPresentation) -> Self {
        Self::new(&p.equations)
    }

    pub fn rules(&self) -> &[TermEquation] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn normalize(&self, t: &Term) -> Result<Term> {
        if self.rules.is_empty() {
            return Ok(t.clone());
        }
        let limit = STEPS_PER_NODE * (t.size() + 1);
        let mut budget = limit;
        self.norm(t, &mut budget).map_err(|_| Error::NonTermination {
            term: t.to_string(),
            limit,
        })
    }

    fn norm(&self, t: &Term, budget: &mut usize) -> std::result::Result<Term, ()> {
        let t = match t {
            Term::Leaf(_) => return Ok(t.clone()),
            Term::Node(s, cs) => Term::Node(
                s.clone(),
                cs.iter().map(|c| self.norm(c, budget)).collect::<std::result::Result<_, _>>()?,
            ),
        };
        match self.root_step(&t) {
            None => Ok(t),
            Some(u) => {
                if *budget == 0 {
                    return Err(());
                }
                *budget -= 1;
                self.norm(&u, budget)
            }
        }
    }

    fn root_step(&self, t: &Term) -> Option<Term> {
        self.root_steps(t).into_iter().next()
    }

    /// Every reduct obtainable by one rule application at the root.
    fn root_steps(&self, t: &Term) -> Vec<Term> {
        let mut out = Vec::new();
        for r in &self.rules {
            if let Some(b) = r.lhs.match_pattern(t) {
                let u = r.rhs.instantiate(&b);
                if !r.permutative || u < *t {
                    out.push(u);
                }
            }
            if r.permutative {
                if let Some(b) = r.rhs.match_pattern(t) {
                    let u = r.lhs.instantiate(&b);
                    if u < *t {
                        out.push(u);
                    }
                }
            }
        }
        out
    }

    /// Every reduct obtainable by one rule application anywhere.
    pub fn one_step_reducts(&self, t: &Term) -> Vec<Term> {
        let mut out = Vec::new();
        for p in t.node_positions() {
            let sub = t.subterm(&p).expect("node position");
            for u in self.root_steps(sub) {
                out.push(t.replace(&p, u).expect("node position"));
            }
        }
        out
    }
}

/// Normal form of `t` under the presentation's equations.
pub fn normalize_term(p: &TheoryPresentation, t: &Term) -> Result<Term> {
    Rewriter::for_presentation(p).normalize(t)
}

/// The tree with all leaf labels erased.
pub fn shape(t: &Term) -> Term {
    t.relabel(|_| 0)
}

/// Orients a derived equation: permutative when both sides share a shape,
/// otherwise from the larger side to the smaller.
pub fn orient(a: Term, b: Term) -> Option<TermEquation> {
    if a == b {
        return None;
    }
    let permutative = shape(&a) == shape(&b);
    let (lhs, rhs) = if a > b { (a, b) } else { (b, a) };
    Some(TermEquation {
        lhs,
        rhs,
        permutative,
    })
}

fn unify(s: &Term, t: &Term, subst: &mut HashMap<usize, Term>) -> bool {
    match (s, t) {
        (Term::Leaf(x), _) => {
            subst.insert(*x, t.clone());
            true
        }
        (_, Term::Leaf(y)) => {
            subst.insert(*y, s.clone());
            true
        }
        (Term::Node(a, xs), Term::Node(b, ys)) => {
            a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, subst))
        }
    }
}

fn apply_subst(t: &Term, subst: &HashMap<usize, Term>) -> Term {
    t.plug(&|i| subst.get(&i).cloned().unwrap_or(Term::Leaf(i)))
}

fn directed(rules: &[TermEquation]) -> Vec<(Term, Term)> {
    let mut out = Vec::new();
    for r in rules {
        out.push((r.lhs.clone(), r.rhs.clone()));
        if r.permutative {
            out.push((r.rhs.clone(), r.lhs.clone()));
        }
    }
    out
}

/// Symbolic critical pairs between all directed rules.
pub fn critical_pairs(rules: &[TermEquation]) -> Vec<(Term, Term)> {
    let dir = directed(rules);
    let mut out = Vec::new();
    for (i, (l1, r1)) in dir.iter().enumerate() {
        let k = l1.arity();
        for (j, (l2, r2)) in dir.iter().enumerate() {
            let l2s = l2.relabel(|v| v + k);
            let r2s = r2.relabel(|v| v + k);
            for p in l1.node_positions() {
                if p.is_root() && i == j {
                    continue;
                }
                let mut subst = HashMap::new();
                if !unify(l1.subterm(&p).expect("node"), &l2s, &mut subst) {
                    continue;
                }
                let left = apply_subst(r1, &subst);
                let right = apply_subst(&l1.replace(&p, r2s.clone()).expect("node"), &subst);
                out.push(canonical_pair(left, right));
            }
        }
    }
    out
}

/// Renumbers the variables of a pair to `1..k` by first occurrence on the left.
fn canonical_pair(a: Term, b: Term) -> (Term, Term) {
    let mut order: Vec<usize> = Vec::new();
    for v in a.leaves().into_iter().chain(b.leaves()) {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let map = |v: usize| order.iter().position(|&x| x == v).expect("seen") + 1;
    (a.relabel(map), b.relabel(map))
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Largest variable count whose labelings are all tried.
const GROUND_VARS: usize = 5;

/// Bounded completion: adds normalized, non-joinable ground instances of
/// critical pairs as new rules until every pair joins.
pub fn complete(equations: &[TermEquation], max_rules: usize) -> Result<Vec<TermEquation>> {
    let mut rules = equations.to_vec();
    loop {
        let rw = Rewriter::new(&rules);
        let mut added: Vec<TermEquation> = Vec::new();
        let mut seen = BTreeSet::new();
        for (a, b) in critical_pairs(&rules) {
            let k = a.arity().max(b.arity());
            let labelings = if k <= GROUND_VARS {
                permutations(k)
            } else {
                vec![(1..=k).collect()]
            };
            for perm in labelings {
                let ga = a.relabel(|v| perm[v - 1]);
                let gb = b.relabel(|v| perm[v - 1]);
                let na = rw.normalize(&ga)?;
                let nb = rw.normalize(&gb)?;
                if na == nb {
                    continue;
                }
                let Some(eq) = orient(na, nb) else { continue };
                // keep only the canonical labeling of each new rule
                let (l, r) = canonical_pair(eq.lhs.clone(), eq.rhs.clone());
                if seen.insert((l.to_string(), r.to_string())) {
                    added.push(TermEquation {
                        lhs: l,
                        rhs: r,
                        permutative: eq.permutative,
                    });
                }
            }
        }
        if added.is_empty() {
            return Ok(rules);
        }
        // re-check joinability against the already extended set before adding
        for eq in added {
            let rw = Rewriter::new(&rules);
            let a = rw.normalize(&eq.lhs)?;
            let b = rw.normalize(&eq.rhs)?;
            if let Some(e) = orient(a, b) {
                let (lhs, rhs) = canonical_pair(e.lhs, e.rhs);
                rules.push(TermEquation {
                    lhs,
                    rhs,
                    permutative: e.permutative,
                });
            }
        }
        if rules.len() > max_rules {
            return Err(Error::Completion(format!(
                "more than {max_rules} rules without converging"
            )));
        }
    }
}

/// Ground local confluence over all linear terms up to the given arity and
/// size: every one-step reduct of a term has the term's normal form.
pub fn check_confluence(
    rw: &Rewriter,
    signature: &[(Symbol, usize)],
    max_arity: usize,
    max_size: usize,
) -> Verdict {
    for n in 0..=max_arity {
        for t in enumerate_planar(signature, n, max_size) {
            for perm in permutations(n) {
                let g = t.relabel(|v| perm[v - 1]);
                let nf = match rw.normalize(&g) {
                    Ok(x) => x,
                    Err(e) => return Verdict::unknown(e.to_string(), max_size),
                };
                for u in rw.one_step_reducts(&g) {
                    match rw.normalize(&u) {
                        Ok(v) if v == nf => {}
                        Ok(v) => {
                            return Verdict::fails_with(
                                "critical divergence",
                                Certificate::Instance {
                                    name: g.to_string(),
                                    detail: format!("{nf} vs {v}"),
                                },
                            )
                        }
                        Err(e) => return Verdict::unknown(e.to_string(), max_size),
                    }
                }
            }
        }
    }
    Verdict::holds(format!(
        "ground joinability up to arity {max_arity}, size {max_size}"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn eq(l: &str, r: &str, permutative: bool) -> TermEquation {
        TermEquation {
            lhs: parse_term(l).unwrap(),
            rhs: parse_term(r).unwrap(),
            permutative,
        }
    }

    #[test]
    fn associativity_combs_right() {
        let rw = Rewriter::new(&[eq("m(m(1,2),3)", "m(1,m(2,3))", false)]);
        let t = parse_term("m(m(m(1,2),3),4)").unwrap();
        assert_eq!(rw.normalize(&t).unwrap().to_string(), "m(1,m(2,m(3,4)))");
    }

    #[test]
    fn commutativity_is_ordered() {
        let rw = Rewriter::new(&[eq("m(1,2)", "m(2,1)", true)]);
        assert_eq!(rw.normalize(&parse_term("m(2,1)").unwrap()).unwrap().to_string(), "m(1,2)");
        assert_eq!(rw.normalize(&parse_term("m(1,2)").unwrap()).unwrap().to_string(), "m(1,2)");
    }

    #[test]
    fn bad_orientation_hits_guard() {
        let rw = Rewriter::new(&[eq("m(1,2)", "m(2,1)", false)]);
        assert!(matches!(
            rw.normalize(&parse_term("m(1,2)").unwrap()),
            Err(Error::NonTermination { .. })
        ));
    }

    #[test]
    fn completion_makes_ac_confluent() {
        let base = vec![
            eq("m(m(1,2),3)", "m(1,m(2,3))", false),
            eq("m(1,2)", "m(2,1)", true),
        ];
        let sig = vec![(Symbol::from("m"), 2)];
        let before = check_confluence(&Rewriter::new(&base), &sig, 4, 3);
        assert!(before.is_fails());
        let done = complete(&base, 64).unwrap();
        let rw = Rewriter::new(&done);
        assert!(check_confluence(&rw, &sig, 4, 3).is_holds());
        let a = rw.normalize(&parse_term("m(3,m(1,m(4,2)))").unwrap()).unwrap();
        assert_eq!(a.to_string(), "m(1,m(2,m(3,4)))");
    }
}
