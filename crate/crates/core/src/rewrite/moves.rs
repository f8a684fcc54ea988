//! Bidirectional search for a homotopy between two parallel paths.
//!
//! A state is a freely reduced edge word. Moves replace a segment lying on
//! the boundary of a face (interchange square or relation instance) by the
//! complementary part of that boundary, never lengthening the word.

use std::collections::{HashMap, VecDeque};

use crate::error::Result;
use crate::rewrite::engine::Engine;
use crate::rewrite::path::{render_steps, RewriteStep, TwoCellPath};
use crate::term::Term;

type L = (u32, bool);

#[derive(Clone, Debug)]
struct EdgeData {
    src: u32,
    dst: u32,
    step: RewriteStep,
    back: RewriteStep,
}

pub enum SearchOutcome {
    Found(Vec<String>),
    Exhausted(usize),
}

struct Space<'a> {
    engine: &'a Engine,
    terms: Vec<Term>,
    term_ids: HashMap<Term, u32>,
    edges: Vec<EdgeData>,
    edge_ids: HashMap<(u32, RewriteStep), u32>,
    cycles_at: HashMap<u32, Vec<Vec<L>>>,
    in_nbrs: HashMap<u32, Vec<u32>>,
}

impl<'a> Space<'a> {
    fn term(&mut self, t: Term) -> u32 {
        if let Some(&i) = self.term_ids.get(&t) {
            return i;
        }
        let i = self.terms.len() as u32;
        self.terms.push(t.clone());
        self.term_ids.insert(t, i);
        i
    }

    /// Interns the forward edge `step` out of `src`.
    fn edge(&mut self, src: u32, step: &RewriteStep) -> Result<u32> {
        if let Some(&e) = self.edge_ids.get(&(src, step.clone())) {
            return Ok(e);
        }
        let from = self.terms[src as usize].clone();
        let to = self.engine.apply(&from, step)?;
        let back = self
            .engine
            .trace(&to, &step.cell, true, &from, &step.position)
            .unwrap_or_else(|| step.inverted());
        let dst = self.term(to);
        let e = self.edges.len() as u32;
        self.edges.push(EdgeData {
            src,
            dst,
            step: step.clone(),
            back,
        });
        self.edge_ids.insert((src, step.clone()), e);
        Ok(e)
    }

    /// The letter for `step` taken at term `from`.
    fn letter(&mut self, from: u32, step: &RewriteStep) -> Result<(L, u32)> {
        if !step.inverse {
            let e = self.edge(from, step)?;
            return Ok(((e, false), self.edges[e as usize].dst));
        }
        let x = self.terms[from as usize].clone();
        let y = self.engine.apply(&x, step)?;
        let fwd = self
            .engine
            .trace(&y, &step.cell, false, &x, &step.position)
            .unwrap_or_else(|| step.inverted());
        let yi = self.term(y);
        let e = self.edge(yi, &fwd)?;
        Ok(((e, true), yi))
    }

    fn word(&mut self, from: u32, steps: &[RewriteStep]) -> Result<Vec<L>> {
        let mut cur = from;
        let mut out = Vec::with_capacity(steps.len());
        for s in steps {
            let (l, next) = self.letter(cur, s)?;
            out.push(l);
            cur = next;
        }
        Ok(out)
    }

    fn target(&self, l: L) -> u32 {
        let e = &self.edges[l.0 as usize];
        if l.1 {
            e.src
        } else {
            e.dst
        }
    }

    fn step(&self, l: L) -> RewriteStep {
        let e = &self.edges[l.0 as usize];
        if l.1 {
            e.back.clone()
        } else {
            e.step.clone()
        }
    }

    fn in_neighbours(&mut self, v: u32) -> Result<Vec<u32>> {
        if let Some(n) = self.in_nbrs.get(&v) {
            return Ok(n.clone());
        }
        let t = self.terms[v as usize].clone();
        let mut out = Vec::new();
        for (s, u) in self.engine.neighbours(&t)? {
            if s.inverse {
                out.push(self.term(u));
            }
        }
        self.in_nbrs.insert(v, out.clone());
        Ok(out)
    }

    /// Faces based at `v`: interchange squares out of `v` and relation
    /// instances whose source matches inside `v`.
    fn cycles(&mut self, v: u32) -> Result<Vec<Vec<L>>> {
        if let Some(c) = self.cycles_at.get(&v) {
            return Ok(c.clone());
        }
        let t = self.terms[v as usize].clone();
        let fwd: Vec<RewriteStep> = self
            .engine
            .enumerate_rewrites(&t)
            .into_iter()
            .filter(|s| !s.inverse)
            .collect();
        let mut out = Vec::new();
        for (i, s1) in fwd.iter().enumerate() {
            for s2 in &fwd[i + 1..] {
                let Some(sq) = self.engine.interchange(&t, s1, s2)? else { continue };
                let e1 = self.edge(v, &sq.s1)?;
                let e2 = self.edge(v, &sq.s2)?;
                let v1 = self.term(sq.v1.clone());
                let v2 = self.term(sq.v2.clone());
                let e2p = self.edge(v1, &sq.s2_after)?;
                let e1p = self.edge(v2, &sq.s1_after)?;
                out.push(vec![(e1, false), (e2p, false), (e1p, true), (e2, true)]);
            }
        }
        for (_, _, ls, rs) in self.engine.relation_instances(&t) {
            let mut w = self.word(v, &ls)?;
            let r = self.word(v, &rs)?;
            w.extend(r.iter().rev().map(|&(e, i)| (e, !i)));
            out.push(w);
        }
        self.cycles_at.insert(v, out.clone());
        Ok(out)
    }
}

fn reduce(w: &[L]) -> Vec<L> {
    let mut out: Vec<L> = Vec::with_capacity(w.len());
    for &l in w {
        match out.last() {
            Some(&(e, i)) if e == l.0 && i != l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

fn inv(l: L) -> L {
    (l.0, !l.1)
}

/// Searches for a homotopy from `p` to `q` (parallel, on normal forms).
pub fn search(engine: &Engine, p: &TwoCellPath, q: &TwoCellPath, budget: usize) -> Result<SearchOutcome> {
    let mut sp = Space {
        engine,
        terms: Vec::new(),
        term_ids: HashMap::new(),
        edges: Vec::new(),
        edge_ids: HashMap::new(),
        cycles_at: HashMap::new(),
        in_nbrs: HashMap::new(),
    };
    let start = sp.term(p.source.clone());
    let wp = reduce(&sp.word(start, &p.steps)?);
    let wq = reduce(&sp.word(start, &q.steps)?);
    let render = |sp: &Space, w: &[L]| render_steps(&w.iter().map(|&l| sp.step(l)).collect::<Vec<_>>());
    if wp == wq {
        return Ok(SearchOutcome::Found(vec![render(&sp, &wp)]));
    }

    // per side: state -> parent state
    let mut seen: [HashMap<Vec<L>, Option<Vec<L>>>; 2] = [HashMap::new(), HashMap::new()];
    let mut frontier: [VecDeque<Vec<L>>; 2] = [VecDeque::new(), VecDeque::new()];
    seen[0].insert(wp.clone(), None);
    seen[1].insert(wq.clone(), None);
    frontier[0].push_back(wp);
    frontier[1].push_back(wq);

    let mut meet: Option<Vec<L>> = None;
    'outer: while seen[0].len() + seen[1].len() < budget {
        let side = if frontier[0].is_empty() {
            1
        } else if frontier[1].is_empty() || frontier[0].len() <= frontier[1].len() {
            0
        } else {
            1
        };
        let Some(state) = frontier[side].pop_front() else { break };
        for next in neighbours(&mut sp, start, &state)? {
            if seen[side].contains_key(&next) {
                continue;
            }
            seen[side].insert(next.clone(), Some(state.clone()));
            if seen[1 - side].contains_key(&next) {
                meet = Some(next);
                break 'outer;
            }
            frontier[side].push_back(next);
        }
        if frontier[0].is_empty() && frontier[1].is_empty() {
            break;
        }
    }
    let Some(m) = meet else {
        return Ok(SearchOutcome::Exhausted(seen[0].len() + seen[1].len()));
    };
    let chain = |side: usize| {
        let mut out = vec![m.clone()];
        let mut cur = m.clone();
        while let Some(Some(prev)) = seen[side].get(&cur) {
            out.push(prev.clone());
            cur = prev.clone();
        }
        out
    };
    let mut from_p = chain(0);
    from_p.reverse();
    let to_q = chain(1);
    let moves = from_p
        .iter()
        .chain(to_q.iter().skip(1))
        .map(|w| render(&sp, w))
        .collect();
    Ok(SearchOutcome::Found(moves))
}

fn neighbours(sp: &mut Space, start: u32, w: &[L]) -> Result<Vec<Vec<L>>> {
    let mut verts = vec![start];
    for &l in w {
        verts.push(sp.target(l));
    }
    let mut cycles: Vec<Vec<L>> = Vec::new();
    let mut bases: Vec<u32> = verts.clone();
    for &v in &verts {
        bases.extend(sp.in_neighbours(v)?);
    }
    bases.sort_unstable();
    bases.dedup();
    for b in bases {
        cycles.extend(sp.cycles(b)?);
    }
    let mut out = Vec::new();
    for c in &cycles {
        let len = c.len();
        let min_k = len.div_ceil(2);
        for orient in [false, true] {
            let cyc: Vec<L> = if orient {
                c.iter().rev().map(|&l| inv(l)).collect()
            } else {
                c.clone()
            };
            for r in 0..len {
                for j in 0..w.len() {
                    if w[j] != cyc[r] {
                        continue;
                    }
                    let mut k = 0;
                    while k < len && j + k < w.len() && w[j + k] == cyc[(r + k) % len] {
                        k += 1;
                    }
                    for kk in min_k.max(1)..=k {
                        // segment cyc[r..r+kk] equals the inverse of the rest of the cycle
                        let mut repl: Vec<L> = Vec::with_capacity(len - kk);
                        for t in 1..=(len - kk) {
                            repl.push(inv(cyc[(r + len - t) % len]));
                        }
                        let mut nw: Vec<L> = w[..j].to_vec();
                        nw.extend(repl);
                        nw.extend_from_slice(&w[j + kk..]);
                        let nw = reduce(&nw);
                        if nw != w {
                            out.push(nw);
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}
