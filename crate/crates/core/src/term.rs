//! Planar operad terms.
//!
//! A [`Term`] of arity `n` is a tree whose internal nodes carry operation
//! symbols and whose leaves carry the input labels `1..=n`, each exactly
//! once. Leaves may appear in any order, so a term is a planar tree together
//! with a leaf permutation.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Interned operation symbol name.
pub type Symbol = Arc<str>;

/// A position inside a term: 0-based child indices from the root.
///
/// Rendered 1-based and dot-separated (`1.2`); the root is the empty position.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn join(&self, rest: &Position) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&rest.0);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Neither position lies above the other.
    pub fn disjoint(&self, other: &Position) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    pub fn strip_prefix(&self, prefix: &Position) -> Option<Position> {
        prefix
            .is_prefix_of(self)
            .then(|| Position(self.0[prefix.0.len()..].to_vec()))
    }

    /// Parses `1.2.3` (1-based). The empty string is the root.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|part| match part.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(Error::Syntax {
                    line: 0,
                    column: 0,
                    message: format!("bad position component `{part}`"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Position)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// An input, labelled `1..=arity`.
    Leaf(usize),
    Node(Symbol, Vec<Term>),
}

/// Substitution produced by matching a pattern: label `i` binds `slots[i-1]`.
pub type Binding = Vec<Option<Term>>;

impl Term {
    pub fn leaf(i: usize) -> Self {
        Term::Leaf(i)
    }

    pub fn node(name: &str, children: Vec<Term>) -> Self {
        Term::Node(Arc::from(name), children)
    }

    /// The identity 1-cell, a bare leaf.
    pub fn identity() -> Self {
        Term::Leaf(1)
    }

    /// `sym(1, 2, .., k)`.
    pub fn generator(name: &str, arity: usize) -> Self {
        Term::node(name, (1..=arity).map(Term::Leaf).collect())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Term::Leaf(_))
    }

    pub fn arity(&self) -> usize {
        match self {
            Term::Leaf(_) => 1,
            Term::Node(_, cs) => cs.iter().map(Term::arity).sum(),
        }
    }

    /// Number of operation nodes; leaves are not counted.
    pub fn size(&self) -> usize {
        match self {
            Term::Leaf(_) => 0,
            Term::Node(_, cs) => 1 + cs.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Leaf(_) => 0,
            Term::Node(_, cs) => 1 + cs.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Leaf labels in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Term::Leaf(i) => out.push(*i),
            Term::Node(_, cs) => cs.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Every label in `1..=arity` occurs exactly once.
    pub fn is_linear(&self) -> bool {
        let mut ls = self.leaves();
        ls.sort_unstable();
        ls.iter().enumerate().all(|(k, &l)| l == k + 1)
    }

    /// Leaves read `1, 2, .., n` from left to right.
    pub fn is_planar(&self) -> bool {
        self.leaves().iter().enumerate().all(|(k, &l)| l == k + 1)
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Node(s, _) = t {
                out.push(s.clone());
            }
        });
        out
    }

    pub fn uses_symbol(&self, name: &str) -> bool {
        match self {
            Term::Leaf(_) => false,
            Term::Node(s, cs) => &**s == name || cs.iter().any(|c| c.uses_symbol(name)),
        }
    }

    fn visit<F: FnMut(&Term)>(&self, f: &mut F) {
        f(self);
        if let Term::Node(_, cs) = self {
            for c in cs {
                c.visit(f);
            }
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Term> {
        let mut cur = self;
        for &i in &pos.0 {
            match cur {
                Term::Node(_, cs) => cur = cs.get(i)?,
                Term::Leaf(_) => return None,
            }
        }
        Some(cur)
    }

    /// Replaces the subterm at `pos`.
    pub fn replace(&self, pos: &Position, new: Term) -> Option<Term> {
        self.replace_from(&pos.0, new)
    }

    fn replace_from(&self, pos: &[usize], new: Term) -> Option<Term> {
        match pos.split_first() {
            None => Some(new),
            Some((&i, rest)) => match self {
                Term::Leaf(_) => None,
                Term::Node(s, cs) => {
                    let child = cs.get(i)?.replace_from(rest, new)?;
                    let mut cs = cs.clone();
                    cs[i] = child;
                    Some(Term::Node(s.clone(), cs))
                }
            },
        }
    }

    /// Positions of all operation nodes in preorder.
    pub fn node_positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        if let Term::Node(_, cs) = self {
            out.push(Position(path.clone()));
            for (i, c) in cs.iter().enumerate() {
                path.push(i);
                c.collect_positions(path, out);
                path.pop();
            }
        }
    }

    /// Position of the leaf carrying `label`.
    pub fn leaf_position(&self, label: usize) -> Option<Position> {
        fn go(t: &Term, label: usize, path: &mut Vec<usize>) -> bool {
            match t {
                Term::Leaf(i) => *i == label,
                Term::Node(_, cs) => {
                    for (k, c) in cs.iter().enumerate() {
                        path.push(k);
                        if go(c, label, path) {
                            return true;
                        }
                        path.pop();
                    }
                    false
                }
            }
        }
        let mut path = Vec::new();
        go(self, label, &mut path).then_some(Position(path))
    }

    pub fn relabel<F: Fn(usize) -> usize + Copy>(&self, f: F) -> Term {
        match self {
            Term::Leaf(i) => Term::Leaf(f(*i)),
            Term::Node(s, cs) => Term::Node(s.clone(), cs.iter().map(|c| c.relabel(f)).collect()),
        }
    }

    pub fn rename_symbols<F: Fn(&str) -> Option<Symbol> + Copy>(&self, f: F) -> Term {
        match self {
            Term::Leaf(i) => Term::Leaf(*i),
            Term::Node(s, cs) => Term::Node(
                f(s).unwrap_or_else(|| s.clone()),
                cs.iter().map(|c| c.rename_symbols(f)).collect(),
            ),
        }
    }

    /// Operadic composition `self ∘_slot inner`.
    ///
    /// The inner term's inputs occupy `slot..slot+arity(inner)-1`; later
    /// inputs of `self` shift up by `arity(inner) - 1`.
    pub fn substitute(&self, slot: usize, inner: &Term) -> Result<Term> {
        let n = self.arity();
        if slot == 0 || slot > n {
            return Err(Error::SlotOutOfRange { slot, arity: n });
        }
        let k = inner.arity();
        let shifted_inner = inner.relabel(|i| i + slot - 1);
        Ok(self.plug(&|label| {
            if label == slot {
                shifted_inner.clone()
            } else if label < slot {
                Term::Leaf(label)
            } else {
                Term::Leaf(label + k - 1)
            }
        }))
    }

    /// Full operadic composition `γ(self; inners)`: the leaf labelled `i`
    /// receives `inners[i-1]`, whose inputs are numbered after those of
    /// `inners[..i-1]`.
    pub fn compose(&self, inners: &[Term]) -> Result<Term> {
        let n = self.arity();
        if inners.len() != n {
            return Err(Error::ArityMismatch {
                what: "composition".into(),
                expected: n,
                found: inners.len(),
            });
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for t in inners {
            offsets.push(acc);
            acc += t.arity();
        }
        let shifted: Vec<Term> = inners
            .iter()
            .zip(&offsets)
            .map(|(t, &o)| t.relabel(|i| i + o))
            .collect();
        Ok(self.plug(&|label| shifted[label - 1].clone()))
    }

    /// Replaces every leaf `i` by `f(i)` without renumbering.
    pub fn plug<F: Fn(usize) -> Term>(&self, f: &F) -> Term {
        match self {
            Term::Leaf(i) => f(*i),
            Term::Node(s, cs) => Term::Node(s.clone(), cs.iter().map(|c| c.plug(f)).collect()),
        }
    }

    /// Matches `self` as a linear pattern against `t`: each leaf of the
    /// pattern is a variable binding a whole subterm of `t`.
    pub fn match_pattern(&self, t: &Term) -> Option<Binding> {
        let mut binding = vec![None; self.arity()];
        self.match_into(t, &mut binding).then_some(binding)
    }

    fn match_into(&self, t: &Term, binding: &mut Binding) -> bool {
        match (self, t) {
            (Term::Leaf(i), _) => match binding.get_mut(i - 1) {
                Some(slot @ None) => {
                    *slot = Some(t.clone());
                    true
                }
                _ => false,
            },
            (Term::Node(a, xs), Term::Node(b, ys)) => {
                a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.match_into(y, binding))
            }
            _ => false,
        }
    }

    /// Inverse of [`Term::match_pattern`]: replaces each variable by its binding.
    pub fn instantiate(&self, binding: &Binding) -> Term {
        self.plug(&|i| {
            binding
                .get(i - 1)
                .and_then(|b| b.clone())
                .unwrap_or(Term::Leaf(i))
        })
    }

    /// Preorder tokens used by the canonical order.
    fn tokens(&self) -> Vec<Token<'_>> {
        let mut out = Vec::new();
        self.push_tokens(&mut out);
        out
    }

    fn push_tokens<'a>(&'a self, out: &mut Vec<Token<'a>>) {
        match self {
            Term::Leaf(i) => out.push(Token::Leaf(*i)),
            Term::Node(s, cs) => {
                out.push(Token::Sym(s));
                cs.iter().for_each(|c| c.push_tokens(out));
            }
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum Token<'a> {
    Leaf(usize),
    Sym(&'a str),
}

/// Canonical order: by size, then preorder tokens with leaves before symbols.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.tokens().cmp(&other.tokens()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Leaf(i) => write!(f, "{i}"),
            Term::Node(s, cs) if cs.is_empty() => write!(f, "{s}"),
            Term::Node(s, cs) => {
                write!(f, "{s}(")?;
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// All planar terms of arity `n` with at most `max_size` operation nodes,
/// over the given `(symbol, arity)` signature, in canonical order.
pub fn enumerate_planar(signature: &[(Symbol, usize)], n: usize, max_size: usize) -> Vec<Term> {
    let mut memo = std::collections::HashMap::new();
    let mut out = Vec::new();
    for s in 0..=max_size {
        out.extend(shapes(signature, n, s, &mut memo));
    }
    out.sort();
    out
}

fn shapes(
    signature: &[(Symbol, usize)],
    n: usize,
    size: usize,
    memo: &mut std::collections::HashMap<(usize, usize), Vec<Term>>,
) -> Vec<Term> {
    if let Some(v) = memo.get(&(n, size)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if size == 0 {
        if n == 1 {
            out.push(Term::Leaf(1));
        }
    } else {
        for (sym, k) in signature {
            if *k == 0 {
                if n == 0 && size == 1 {
                    out.push(Term::Node(sym.clone(), Vec::new()));
                }
                continue;
            }
            for parts in compositions(n, *k) {
                for sizes in compositions(size - 1, *k) {
                    let options: Vec<Vec<Term>> = parts
                        .iter()
                        .zip(&sizes)
                        .map(|(&a, &s)| shapes(signature, a, s, memo))
                        .collect();
                    if options.iter().any(Vec::is_empty) {
                        continue;
                    }
                    for choice in cartesian(&options) {
                        let mut offset = 0;
                        let children = choice
                            .into_iter()
                            .map(|c| {
                                let a = c.arity();
                                let r = c.relabel(|i| i + offset);
                                offset += a;
                                r
                            })
                            .collect();
                        out.push(Term::Node(sym.clone(), children));
                    }
                }
            }
        }
    }
    memo.insert((n, size), out.clone());
    out
}

/// Weak compositions of `total` into `parts` non-negative summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian(options: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![vec![]];
    for opts in options {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for prefix in &acc {
            for o in opts {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}
