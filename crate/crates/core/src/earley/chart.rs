//! Earley parsing over a semiring, in two phases.
//!
//! Phase one runs an ordinary Earley recognizer but records every way each
//! item and each completed span was derived, giving a deduction hypergraph.
//! Phase two evaluates that graph from the root span: strongly connected
//! components are visited dependencies first, and a cyclic component (from
//! nullable or unit cycles) is iterated in place `|component| + 1` times.
//! With an idempotent semiring a derivation that repeats a node inside a
//! component is subsumed by one that does not, so that many rounds reach
//! every value the fixpoint needs.

use super::semiring::Semiring;
use crate::grammar::{CSym, ConcreteGrammar, Production};
use std::collections::HashMap;
use std::time::Instant;

#[derive(Debug, Clone)]
enum ISym {
    N(u32),
    T(Vec<(char, char)>),
}

#[derive(Debug, Clone, Copy)]
enum Reason {
    Predict,
    Scan(u32),
    /// Previous item and the completed span that advanced it.
    Complete(u32, u32),
}

#[derive(Debug, Clone, Copy)]
struct Item {
    prod: u32,
    dot: u32,
    origin: u32,
}

/// A grammar compiled for repeated parsing.
#[derive(Debug, Clone)]
pub struct Parser<'g> {
    grammar: &'g ConcreteGrammar,
    lhs: Vec<u32>,
    rhs: Vec<Vec<ISym>>,
    by_lhs: Vec<Vec<u32>>,
    start: Option<u32>,
}

impl<'g> Parser<'g> {
    pub fn new(grammar: &'g ConcreteGrammar) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let id = |s: &'g str, ids: &mut HashMap<&'g str, u32>| {
            let n = ids.len() as u32;
            *ids.entry(s).or_insert(n)
        };
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for p in &grammar.productions {
            lhs.push(id(&p.lhs, &mut ids));
            let mut r = Vec::new();
            for s in &p.rhs {
                match s {
                    CSym::N(n) => r.push(ISym::N(id(n, &mut ids))),
                    CSym::Lit(l) => r.extend(l.chars().map(|c| ISym::T(vec![(c, c)]))),
                    CSym::Set(set) => r.push(ISym::T(set.clone())),
                }
            }
            rhs.push(r);
        }
        let mut by_lhs = vec![Vec::new(); ids.len()];
        for (i, &l) in lhs.iter().enumerate() {
            by_lhs[l as usize].push(i as u32);
        }
        let start = ids.get(grammar.start.as_str()).copied();
        Parser { grammar, lhs, rhs, by_lhs, start }
    }

    pub fn grammar(&self) -> &'g ConcreteGrammar {
        self.grammar
    }

    /// Sum over parses of `input` of the product of production weights.
    pub fn parse<S: Semiring>(&self, input: &[char], sr: &S, weight: impl Fn(&Production) -> S::Elem) -> S::Elem {
        self.parse_until(input, sr, weight, None).expect("no deadline")
    }

    /// As [`Parser::parse`], giving up with `None` once `deadline` passes.
    pub fn parse_until<S: Semiring>(
        &self,
        input: &[char],
        sr: &S,
        weight: impl Fn(&Production) -> S::Elem,
        deadline: Option<Instant>,
    ) -> Option<S::Elem> {
        let weights: Vec<S::Elem> = self.grammar.productions.iter().map(&weight).collect();
        let live: Vec<bool> = weights.iter().map(|w| !sr.is_zero(w)).collect();
        let chart = self.build(input, &live, deadline)?;
        let Some(root) = self.start.and_then(|s| chart.nodes.get(&(s, 0, input.len() as u32))) else {
            return Some(sr.zero());
        };
        chart.evaluate(*root, sr, &weights, deadline)
    }

    pub fn recognize(&self, input: &[char], selected: impl Fn(&Production) -> bool) -> bool {
        self.parse(input, &super::Boolean, selected)
    }

    fn build(&self, input: &[char], live: &[bool], deadline: Option<Instant>) -> Option<Chart> {
        let n = input.len();
        let mut ch = Chart::default();
        let mut agenda: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        let mut index: Vec<HashMap<(u32, u32, u32), u32>> = vec![HashMap::new(); n + 1];
        let Some(start) = self.start else { return Some(ch) };
        // waiters[j][B]: items at j whose next symbol is B
        let mut waiters: Vec<HashMap<u32, Vec<u32>>> = vec![HashMap::new(); n + 1];
        let mut predicted: Vec<HashMap<u32, ()>> = vec![HashMap::new(); n + 1];

        let add = |ch: &mut Chart, agenda: &mut Vec<Vec<u32>>, index: &mut Vec<HashMap<(u32, u32, u32), u32>>, pos: usize, it: Item, r: Reason| {
            let key = (it.prod, it.dot, it.origin);
            match index[pos].get(&key) {
                Some(&id) => ch.item_reasons[id as usize].push(r),
                None => {
                    let id = ch.items.len() as u32;
                    ch.items.push(it);
                    ch.item_reasons.push(vec![r]);
                    index[pos].insert(key, id);
                    agenda[pos].push(id);
                }
            }
        };

        for &p in &self.by_lhs[start as usize] {
            if live[p as usize] {
                add(&mut ch, &mut agenda, &mut index, 0, Item { prod: p, dot: 0, origin: 0 }, Reason::Predict);
            }
        }
        predicted[0].insert(start, ());

        let mut steps = 0u32;
        for j in 0..=n {
            let mut cursor = 0;
            while cursor < agenda[j].len() {
                steps = steps.wrapping_add(1);
                if steps % 4096 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                    return None;
                }
                let id = agenda[j][cursor];
                cursor += 1;
                let it = ch.items[id as usize];
                let rhs = &self.rhs[it.prod as usize];
                if it.dot as usize == rhs.len() {
                    let b = self.lhs[it.prod as usize];
                    let key = (b, it.origin, j as u32);
                    if let Some(&c) = ch.nodes.get(&key) {
                        ch.node_reasons[c as usize].push(id);
                        continue;
                    }
                    let c = ch.node_reasons.len() as u32;
                    ch.nodes.insert(key, c);
                    ch.node_reasons.push(vec![id]);
                    let ws = waiters[it.origin as usize].get(&b).cloned().unwrap_or_default();
                    for w in ws {
                        let wi = ch.items[w as usize];
                        add(&mut ch, &mut agenda, &mut index, j, Item { dot: wi.dot + 1, ..wi }, Reason::Complete(w, c));
                    }
                    continue;
                }
                match &rhs[it.dot as usize] {
                    ISym::T(set) => {
                        if let Some(&x) = input.get(j) {
                            if set.iter().any(|&(lo, hi)| lo <= x && x <= hi) {
                                add(&mut ch, &mut agenda, &mut index, j + 1, Item { dot: it.dot + 1, ..it }, Reason::Scan(id));
                            }
                        }
                    }
                    ISym::N(b) => {
                        let b = *b;
                        waiters[j].entry(b).or_default().push(id);
                        if predicted[j].insert(b, ()).is_none() {
                            for &p in &self.by_lhs[b as usize] {
                                if live[p as usize] {
                                    add(&mut ch, &mut agenda, &mut index, j, Item { prod: p, dot: 0, origin: j as u32 }, Reason::Predict);
                                }
                            }
                        }
                        if let Some(&c) = ch.nodes.get(&(b, j as u32, j as u32)) {
                            add(&mut ch, &mut agenda, &mut index, j, Item { dot: it.dot + 1, ..it }, Reason::Complete(id, c));
                        }
                    }
                }
            }
        }
        Some(ch)
    }
}

#[derive(Debug, Default)]
struct Chart {
    items: Vec<Item>,
    item_reasons: Vec<Vec<Reason>>,
    /// (nonterminal, from, to) to span id.
    nodes: HashMap<(u32, u32, u32), u32>,
    /// Complete items that derive each span.
    node_reasons: Vec<Vec<u32>>,
}

/// Graph vertex: an item or a completed span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum V {
    I(u32),
    C(u32),
}

impl Chart {
    fn deps(&self, v: V, out: &mut Vec<V>) {
        out.clear();
        match v {
            V::I(i) => {
                for r in &self.item_reasons[i as usize] {
                    match *r {
                        Reason::Predict => {}
                        Reason::Scan(p) => out.push(V::I(p)),
                        Reason::Complete(p, c) => {
                            out.push(V::I(p));
                            out.push(V::C(c));
                        }
                    }
                }
            }
            V::C(c) => out.extend(self.node_reasons[c as usize].iter().map(|&i| V::I(i))),
        }
    }

    /// Strongly connected components reachable from `root`, dependencies
    /// first (iterative Tarjan).
    fn components(&self, root: V) -> Vec<Vec<V>> {
        let mut index: HashMap<V, (u32, u32, bool)> = HashMap::new(); // index, lowlink, on stack
        let mut stack: Vec<V> = Vec::new();
        let mut out = Vec::new();
        let mut next = 0u32;
        // frames: vertex, its dependencies, position in them
        let mut frames: Vec<(V, Vec<V>, usize)> = Vec::new();
        let mut buf = Vec::new();
        index.insert(root, (0, 0, true));
        next += 1;
        stack.push(root);
        self.deps(root, &mut buf);
        frames.push((root, buf.clone(), 0));
        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                match index.get(&w) {
                    None => {
                        index.insert(w, (next, next, true));
                        next += 1;
                        stack.push(w);
                        self.deps(w, &mut buf);
                        frames.push((w, buf.clone(), 0));
                    }
                    Some(&(wi, _, true)) => {
                        let e = index.get_mut(&v).unwrap();
                        e.1 = e.1.min(wi);
                    }
                    Some(_) => {}
                }
                continue;
            }
            frames.pop();
            let (vi, vl, _) = index[&v];
            if let Some(parent) = frames.last() {
                let p = parent.0;
                let e = index.get_mut(&p).unwrap();
                e.1 = e.1.min(vl);
            }
            if vi == vl {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    index.get_mut(&w).unwrap().2 = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(comp);
            }
        }
        out
    }

    fn evaluate<S: Semiring>(&self, root: u32, sr: &S, weights: &[S::Elem], deadline: Option<Instant>) -> Option<S::Elem> {
        let mut item_val: HashMap<u32, S::Elem> = HashMap::new();
        let mut node_val: HashMap<u32, S::Elem> = HashMap::new();
        let comps = self.components(V::C(root));
        let mut buf = Vec::new();
        for comp in comps {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return None;
            }
            let cyclic = comp.len() > 1 || {
                self.deps(comp[0], &mut buf);
                buf.contains(&comp[0])
            };
            if !cyclic {
                self.update(comp[0], sr, weights, &mut item_val, &mut node_val);
                continue;
            }
            for &v in &comp {
                match v {
                    V::I(i) => item_val.insert(i, sr.zero()),
                    V::C(c) => node_val.insert(c, sr.zero()),
                };
            }
            for _ in 0..=comp.len() {
                let mut changed = false;
                for &v in &comp {
                    changed |= self.update(v, sr, weights, &mut item_val, &mut node_val);
                }
                if !changed {
                    break;
                }
            }
        }
        Some(node_val.remove(&root).unwrap_or_else(|| sr.zero()))
    }

    /// Recompute one vertex from its dependencies; true if it changed.
    fn update<S: Semiring>(&self, v: V, sr: &S, weights: &[S::Elem], iv: &mut HashMap<u32, S::Elem>, nv: &mut HashMap<u32, S::Elem>) -> bool {
        let zero = sr.zero();
        match v {
            V::I(i) => {
                let mut terms = Vec::with_capacity(self.item_reasons[i as usize].len());
                for r in &self.item_reasons[i as usize] {
                    terms.push(match *r {
                        Reason::Predict => sr.one(),
                        Reason::Scan(p) => iv.get(&p).cloned().unwrap_or_else(|| zero.clone()),
                        Reason::Complete(p, c) => {
                            let a = iv.get(&p).cloned().unwrap_or_else(|| zero.clone());
                            let b = nv.get(&c).cloned().unwrap_or_else(|| zero.clone());
                            sr.times(&a, &b)
                        }
                    });
                }
                let val = sr.sum(terms);
                iv.insert(i, val.clone()) != Some(val)
            }
            V::C(c) => {
                let mut terms = Vec::with_capacity(self.node_reasons[c as usize].len());
                for &i in &self.node_reasons[c as usize] {
                    let a = iv.get(&i).cloned().unwrap_or_else(|| zero.clone());
                    terms.push(sr.times(&weights[self.items[i as usize].prod as usize], &a));
                }
                let val = sr.sum(terms);
                nv.insert(c, val.clone()) != Some(val)
            }
        }
    }
}
