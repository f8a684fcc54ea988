//! Fundamental groupoid of a rewrite complex: spanning forest, one
//! generator per non-tree edge, one relator per face, then Tietze
//! elimination of generators occurring once in some relator.

use std::collections::{HashMap, VecDeque};

use crate::rewrite::complex::{Complex, Letter};

/// A group word: generator `g` is `g + 1`, its inverse `-(g + 1)`.
pub type Word = Vec<i32>;

/// Relators longer than this stop further elimination.
const MAX_RELATOR: usize = 20_000;

pub fn reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn invert(w: &[i32]) -> Word {
    w.iter().rev().map(|x| -x).collect()
}

fn cyclic_reduce(w: &[i32]) -> Word {
    let mut w = reduce(w);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.remove(0);
        w.pop();
    }
    w
}

#[derive(Clone, Debug)]
pub struct Homotopy {
    pub component: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    /// Letter leading from the parent towards each non-root vertex.
    pub parent: Vec<Option<Letter>>,
    pub depth: Vec<usize>,
    /// Generator of each non-tree edge.
    pub edge_gen: Vec<Option<usize>>,
    pub gen_edge: Vec<usize>,
    pub gen_component: Vec<usize>,
    /// Expression of each eliminated generator in earlier-alive ones.
    defs: Vec<Option<Word>>,
    pub alive: Vec<bool>,
    pub relators: Vec<(usize, Word)>,
    resolved: Vec<Option<Word>>,
}

impl Homotopy {
    pub fn new(cx: &Complex) -> Homotopy {
        let n = cx.vertices.len();
        let mut component = vec![usize::MAX; n];
        let mut components = Vec::new();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut tree = vec![false; cx.edges.len()];
        for root in 0..n {
            if component[root] != usize::MAX {
                continue;
            }
            let c = components.len();
            let mut members = vec![root];
            component[root] = c;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                let adj = cx.out[v]
                    .iter()
                    .map(|&e| (e, false))
                    .chain(cx.inc[v].iter().map(|&e| (e, true)));
                for l in adj {
                    let u = cx.letter_target(l);
                    if component[u] == usize::MAX {
                        component[u] = c;
                        parent[u] = Some(l);
                        depth[u] = depth[v] + 1;
                        tree[l.0] = true;
                        members.push(u);
                        queue.push_back(u);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        let mut edge_gen = vec![None; cx.edges.len()];
        let mut gen_edge = Vec::new();
        let mut gen_component = Vec::new();
        for (e, edge) in cx.edges.iter().enumerate() {
            if !tree[e] {
                edge_gen[e] = Some(gen_edge.len());
                gen_edge.push(e);
                gen_component.push(component[edge.src]);
            }
        }
        let g = gen_edge.len();
        let mut h = Homotopy {
            component,
            components,
            parent,
            depth,
            edge_gen,
            gen_edge,
            gen_component,
            defs: vec![None; g],
            alive: vec![true; g],
            relators: Vec::new(),
            resolved: vec![None; g],
        };
        let mut relators = Vec::new();
        for f in &cx.faces {
            let w = cyclic_reduce(&h.raw_word(&f.boundary));
            if !w.is_empty() {
                relators.push((h.component[f.base], w));
            }
        }
        h.eliminate(relators);
        h
    }

    fn raw_word(&self, letters: &[Letter]) -> Word {
        letters
            .iter()
            .filter_map(|&(e, inv)| {
                self.edge_gen[e].map(|g| {
                    let x = g as i32 + 1;
                    if inv {
                        -x
                    } else {
                        x
                    }
                })
            })
            .collect()
    }

    fn eliminate(&mut self, mut relators: Vec<(usize, Word)>) {
        loop {
            relators.retain(|(_, w)| !w.is_empty());
            relators.sort_by_key(|(_, w)| w.len());
            let mut chosen = None;
            'search: for (ri, (_, w)) in relators.iter().enumerate() {
                if w.len() > MAX_RELATOR {
                    break;
                }
                let mut count: HashMap<i32, usize> = HashMap::new();
                for x in w {
                    *count.entry(x.abs()).or_default() += 1;
                }
                for (i, x) in w.iter().enumerate() {
                    if count[&x.abs()] == 1 {
                        chosen = Some((ri, i));
                        break 'search;
                    }
                }
            }
            let Some((ri, i)) = chosen else { break };
            let (_, w) = relators.swap_remove(ri);
            // w = A x B, so x = A^-1 B^-1 read cyclically: x C = 1 with C = B A
            let x = w[i];
            let mut c: Word = w[i + 1..].to_vec();
            c.extend_from_slice(&w[..i]);
            let expr = if x > 0 { invert(&c) } else { c };
            let g = (x.unsigned_abs() - 1) as usize;
            self.alive[g] = false;
            let target = g as i32 + 1;
            for (_, r) in relators.iter_mut() {
                if r.iter().any(|y| y.abs() == target) {
                    let mut out = Vec::with_capacity(r.len() + expr.len());
                    for &y in r.iter() {
                        if y == target {
                            out.extend_from_slice(&expr);
                        } else if y == -target {
                            out.extend(invert(&expr));
                        } else {
                            out.push(y);
                        }
                    }
                    *r = cyclic_reduce(&out);
                }
            }
            self.defs[g] = Some(reduce(&expr));
        }
        self.relators = relators;
    }

    /// The word of an alive generator, or the expansion of an eliminated one.
    fn resolve(&mut self, g: usize) -> Word {
        if let Some(w) = &self.resolved[g] {
            return w.clone();
        }
        let w = match self.defs[g].clone() {
            None => vec![g as i32 + 1],
            Some(def) => {
                let mut out = Vec::new();
                for x in def {
                    let sub = self.resolve((x.unsigned_abs() - 1) as usize);
                    if x > 0 {
                        out.extend(sub);
                    } else {
                        out.extend(invert(&sub));
                    }
                }
                reduce(&out)
            }
        };
        self.resolved[g] = Some(w.clone());
        w
    }

    /// Resolves every eliminated generator; afterwards `element` is `&self`.
    pub fn resolve_all(&mut self) {
        for g in 0..self.defs.len() {
            self.resolve(g);
        }
    }

    /// Group element of a letter sequence, in alive generators.
    pub fn element(&self, letters: &[Letter]) -> Word {
        let mut out = Vec::new();
        for &(e, inv) in letters {
            if let Some(g) = self.edge_gen[e] {
                let w = self.resolved[g]
                    .as_ref()
                    .expect("resolve_all before element");
                if inv {
                    out.extend(invert(w));
                } else {
                    out.extend_from_slice(w);
                }
            }
        }
        reduce(&out)
    }

    pub fn rank(&self, component: usize) -> usize {
        self.alive
            .iter()
            .zip(&self.gen_component)
            .filter(|(a, c)| **a && **c == component)
            .count()
    }

    /// No relator survives elimination in this component.
    pub fn is_free(&self, component: usize) -> bool {
        !self.relators.iter().any(|(c, _)| *c == component)
    }

    /// Letters from the component root to `v` along the tree.
    pub fn tree_path(&self, cx: &Complex, v: usize) -> Vec<Letter> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(l) = self.parent[cur] {
            out.push(l);
            cur = cx.letter_source(l);
        }
        out.reverse();
        out
    }

    /// A loop at the component root realizing an alive generator.
    pub fn generator_loop(&self, cx: &Complex, g: usize) -> Vec<Letter> {
        let e = self.gen_edge[g];
        let edge = &cx.edges[e];
        let mut w = self.tree_path(cx, edge.src);
        w.push((e, false));
        w.extend(crate::rewrite::complex::invert_word(&self.tree_path(cx, edge.dst)));
        w
    }

    /// A path from `a` to `b` (same component) whose element is `word`.
    pub fn realize(&self, cx: &Complex, a: usize, b: usize, word: &[i32]) -> Vec<Letter> {
        let mut w = crate::rewrite::complex::invert_word(&self.tree_path(cx, a));
        for &x in word {
            let l = self.generator_loop(cx, (x.unsigned_abs() - 1) as usize);
            if x > 0 {
                w.extend(l);
            } else {
                w.extend(crate::rewrite::complex::invert_word(&l));
            }
        }
        w.extend(self.tree_path(cx, b));
        Complex::reduce_word(&w)
    }

    pub fn generator_names(&self, cx: &Complex) -> Vec<String> {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(g, _)| {
                let e = &cx.edges[self.gen_edge[g]];
                format!("g{}:{}@{}", g + 1, e.step, cx.vertices[e.src])
            })
            .collect()
    }
}

pub fn render_word(w: &[i32]) -> Vec<String> {
    w.iter()
        .map(|&x| {
            if x > 0 {
                format!("g{x}")
            } else {
                format!("g{}^-1", -x)
            }
        })
        .collect()
}
