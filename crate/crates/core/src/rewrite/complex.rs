//! The truncated rewrite complex of one arity: normal forms as vertices,
//! forward steps as edges, interchange squares and relation instances as
//! faces.

use std::collections::{HashMap, VecDeque};

use crate::error::Result;
use crate::rewrite::engine::Engine;
use crate::rewrite::path::RewriteStep;
use crate::term::Term;

/// An edge traversed forwards (`false`) or backwards (`true`).
pub type Letter = (usize, bool);

#[derive(Clone, Debug)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub step: RewriteStep,
    /// The inverse step as seen from `dst`.
    pub back: RewriteStep,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub name: String,
    pub base: usize,
    pub boundary: Vec<Letter>,
}

#[derive(Clone, Debug, Default)]
pub struct Complex {
    pub vertices: Vec<Term>,
    pub index: HashMap<Term, usize>,
    /// Some step out of the vertex leaves the bound.
    pub open: Vec<bool>,
    pub edges: Vec<Edge>,
    pub out: Vec<Vec<usize>>,
    pub inc: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    /// The vertex budget ran out.
    pub truncated: bool,
    forward_index: HashMap<(usize, RewriteStep), usize>,
    back_index: HashMap<(usize, RewriteStep), Vec<usize>>,
}

pub fn invert_word(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&(e, i)| (e, !i)).collect()
}

impl Complex {
    /// Closure of `seeds` under steps in both directions, restricted to
    /// terms with at most `max_size` operation nodes.
    pub fn build(
        engine: &Engine,
        seeds: &[Term],
        max_size: usize,
        max_vertices: usize,
        with_faces: bool,
    ) -> Result<Complex> {
        let mut found: HashMap<Term, bool> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut truncated = false;
        for s in seeds {
            let s = engine.normalize(s)?;
            if s.size() <= max_size && !found.contains_key(&s) {
                found.insert(s.clone(), false);
                queue.push_back(s);
            }
        }
        while let Some(t) = queue.pop_front() {
            for (_, u) in engine.neighbours(&t)? {
                if u.size() > max_size {
                    found.insert(t.clone(), true);
                    continue;
                }
                if found.contains_key(&u) {
                    continue;
                }
                if found.len() >= max_vertices {
                    truncated = true;
                    found.insert(t.clone(), true);
                    continue;
                }
                found.insert(u.clone(), false);
                queue.push_back(u);
            }
        }
        let mut vertices: Vec<Term> = found.keys().cloned().collect();
        vertices.sort();
        let index: HashMap<Term, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let open = vertices.iter().map(|t| found[t]).collect();
        let n = vertices.len();
        let mut cx = Complex {
            vertices,
            index,
            open,
            edges: Vec::new(),
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
            faces: Vec::new(),
            truncated,
            forward_index: HashMap::new(),
            back_index: HashMap::new(),
        };
        for v in 0..n {
            let t = cx.vertices[v].clone();
            for (step, u) in engine.forward_steps(&t)? {
                let Some(&d) = cx.index.get(&u) else {
                    cx.open[v] = true;
                    continue;
                };
                let back = engine
                    .trace(&u, &step.cell, true, &t, &step.position)
                    .unwrap_or_else(|| step.inverted());
                let e = cx.edges.len();
                cx.forward_index.insert((v, step.clone()), e);
                cx.back_index.entry((d, back.clone())).or_default().push(e);
                cx.out[v].push(e);
                cx.inc[d].push(e);
                cx.edges.push(Edge {
                    src: v,
                    dst: d,
                    step,
                    back,
                });
            }
        }
        if with_faces {
            cx.add_faces(engine)?;
        }
        Ok(cx)
    }

    fn add_faces(&mut self, engine: &Engine) -> Result<()> {
        for v in 0..self.vertices.len() {
            let t = self.vertices[v].clone();
            let outs = self.out[v].clone();
            for (i, &a) in outs.iter().enumerate() {
                for &b in &outs[i + 1..] {
                    let s1 = self.edges[a].step.clone();
                    let s2 = self.edges[b].step.clone();
                    let Some(sq) = engine.interchange(&t, &s1, &s2)? else { continue };
                    let (Some(&v1), Some(&v2)) = (self.index.get(&sq.v1), self.index.get(&sq.v2)) else {
                        continue;
                    };
                    let e2p = self.forward_index.get(&(v1, sq.s2_after.clone()));
                    let e1p = self.forward_index.get(&(v2, sq.s1_after.clone()));
                    if let (Some(&e2p), Some(&e1p)) = (e2p, e1p) {
                        self.faces.push(Face {
                            name: format!("interchange({s1},{s2})"),
                            base: v,
                            boundary: vec![(a, false), (e2p, false), (e1p, true), (b, true)],
                        });
                    }
                }
            }
            for (name, p, ls, rs) in engine.relation_instances(&t) {
                let Some(lw) = self.word_from(engine, v, &ls) else { continue };
                let end = lw.last().map_or(v, |&l| self.letter_target(l));
                let Some(rw) = self.word_between(engine, v, Some(end), &rs) else { continue };
                let mut boundary = lw;
                boundary.extend(invert_word(&rw));
                let name = if p.is_root() {
                    name.to_string()
                } else {
                    format!("{name}@{p}")
                };
                self.faces.push(Face {
                    name,
                    base: v,
                    boundary,
                });
            }
        }
        Ok(())
    }

    pub fn vertex(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// The letters for `step` taken at vertex `from`. Several edges can share
    /// an inverse step when their targets normalize alike.
    pub fn letters(&self, from: usize, step: &RewriteStep) -> Vec<Letter> {
        if step.inverse {
            self.back_index
                .get(&(from, step.clone()))
                .map(|es| es.iter().map(|&e| (e, true)).collect())
                .unwrap_or_default()
        } else {
            self.forward_index
                .get(&(from, step.clone()))
                .map(|&e| vec![(e, false)])
                .unwrap_or_default()
        }
    }

    pub fn letter(&self, from: usize, step: &RewriteStep) -> Option<Letter> {
        self.letters(from, step).first().copied()
    }

    pub fn letter_source(&self, l: Letter) -> usize {
        let e = &self.edges[l.0];
        if l.1 {
            e.dst
        } else {
            e.src
        }
    }

    pub fn letter_target(&self, l: Letter) -> usize {
        let e = &self.edges[l.0];
        if l.1 {
            e.src
        } else {
            e.dst
        }
    }

    pub fn letter_step(&self, l: Letter) -> RewriteStep {
        let e = &self.edges[l.0];
        if l.1 {
            e.back.clone()
        } else {
            e.step.clone()
        }
    }

    /// Converts a step sequence starting at vertex `from` into letters.
    pub fn word_from(&self, engine: &Engine, from: usize, steps: &[RewriteStep]) -> Option<Vec<Letter>> {
        self.word_between(engine, from, None, steps)
    }

    /// Like `word_from`, but resolves shared inverse steps so that the word
    /// ends at `to` when given.
    pub fn word_between(
        &self,
        engine: &Engine,
        from: usize,
        to: Option<usize>,
        steps: &[RewriteStep],
    ) -> Option<Vec<Letter>> {
        let Some((s, rest)) = steps.split_first() else {
            return to.map_or(true, |t| t == from).then(Vec::new);
        };
        let mut options = self.letters(from, s);
        if options.is_empty() {
            options.extend(self.matching_letter(engine, from, s));
        }
        for l in options {
            if let Some(mut w) = self.word_between(engine, self.letter_target(l), to, rest) {
                w.insert(0, l);
                return Some(w);
            }
        }
        None
    }

    /// An edge at `from` with the same cell, direction and endpoint as `step`.
    fn matching_letter(&self, engine: &Engine, from: usize, step: &RewriteStep) -> Option<Letter> {
        let to = self.vertex(&engine.try_apply(&self.vertices[from], step)?)?;
        let candidates = if step.inverse {
            self.inc[from].iter().map(|&e| (e, true)).collect::<Vec<_>>()
        } else {
            self.out[from].iter().map(|&e| (e, false)).collect()
        };
        candidates.into_iter().find(|&l| {
            let e = &self.edges[l.0];
            e.step.cell == step.cell && self.letter_target(l) == to
        })
    }

    pub fn steps_of(&self, word: &[Letter]) -> Vec<RewriteStep> {
        word.iter().map(|&l| self.letter_step(l)).collect()
    }

    /// Cancels adjacent inverse letters.
    pub fn reduce_word(word: &[Letter]) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::with_capacity(word.len());
        for &l in word {
            match out.last() {
                Some(&(e, i)) if e == l.0 && i != l.1 => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        out
    }
}
