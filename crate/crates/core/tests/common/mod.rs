//! Brute-force oracles shared by the property tests and the acceptance
//! harness. Nothing here calls into the engine's parser or solver.
#![allow(dead_code)]

use metagram_core::grammar::{CSym, ConcreteGrammar};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{HashMap, HashSet};

/// Terminal or nonterminal of an oracle grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OSym {
    T(Vec<(char, char)>),
    N(String),
}

/// Does `start` derive `input`? Least fixpoint over all spans, so empty and
/// unit cycles need no special care.
pub fn cyk_accepts(prods: &[(String, Vec<OSym>)], start: &str, input: &[char]) -> bool {
    let n = input.len();
    let mut derives: HashSet<(String, usize, usize)> = HashSet::new();
    loop {
        let mut changed = false;
        for (lhs, rhs) in prods {
            for i in 0..=n {
                // ends[k] = positions reachable after matching rhs[..k] from i
                let mut ends: HashSet<usize> = [i].into_iter().collect();
                for s in rhs {
                    let mut next = HashSet::new();
                    for &p in &ends {
                        match s {
                            OSym::T(set) => {
                                if p < n && set.iter().any(|&(lo, hi)| lo <= input[p] && input[p] <= hi) {
                                    next.insert(p + 1);
                                }
                            }
                            OSym::N(b) => {
                                for q in p..=n {
                                    if derives.contains(&(b.clone(), p, q)) {
                                        next.insert(q);
                                    }
                                }
                            }
                        }
                    }
                    ends = next;
                    if ends.is_empty() {
                        break;
                    }
                }
                for j in ends {
                    changed |= derives.insert((lhs.clone(), i, j));
                }
            }
        }
        if !changed {
            break;
        }
    }
    derives.contains(&(start.to_string(), 0, n))
}

pub fn from_concrete(g: &ConcreteGrammar, keep: impl Fn(usize) -> bool) -> Vec<(String, Vec<OSym>)> {
    g.productions
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, p)| {
            let mut rhs = Vec::new();
            for s in &p.rhs {
                match s {
                    CSym::N(n) => rhs.push(OSym::N(n.clone())),
                    CSym::Lit(l) => rhs.extend(l.chars().map(|c| OSym::T(vec![(c, c)]))),
                    CSym::Set(r) => rhs.push(OSym::T(r.clone())),
                }
            }
            (p.lhs.clone(), rhs)
        })
        .collect()
}

/// Random grammar over nonterminals S, A, B and terminals a, b, c.
pub fn random_grammar(rng: &mut impl Rng, max_prods: usize) -> ConcreteGrammar {
    let names = ["S", "A", "B"];
    let count = rng.gen_range(1..=max_prods);
    let mut rules = Vec::new();
    for _ in 0..count {
        let lhs = names[rng.gen_range(0..3)].to_string();
        let len = rng.gen_range(0..=3);
        let rhs = (0..len)
            .map(|_| match rng.gen_range(0..6) {
                0 | 1 => CSym::N(names[rng.gen_range(0..3)].to_string()),
                2 => CSym::Set(vec![('a', 'b')]),
                3 => CSym::Lit(["ab", "c"][rng.gen_range(0..2)].to_string()),
                _ => CSym::Lit(["a", "b", "c"][rng.gen_range(0..3)].to_string()),
            })
            .collect();
        rules.push((lhs, rhs));
    }
    ConcreteGrammar::from_rules("S", rules)
}

pub fn random_word(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| ['a', 'b', 'c'][rng.gen_range(0..3)]).collect()
}

/// All words over {a, b, c} up to `max_len`.
pub fn all_words(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for c in ['a', 'b', 'c'] {
                next.push(format!("{w}{c}"));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

// Random bounded metagrammars, with their meaning computed directly.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GIdx {
    Lit(u64),
    Param,
    ParamMinus1,
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GSym {
    T(char),
    N(usize, Option<GIdx>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GGuard {
    ParamEq(u64),
    ParamPositive,
    GlobalEq(u64),
}

#[derive(Debug, Clone)]
pub struct GItem {
    pub optional: bool,
    pub name: Option<String>,
    pub guard: Option<GGuard>,
    pub body: Vec<GSym>,
}

#[derive(Debug, Clone)]
pub struct GFamily {
    pub name: String,
    pub indexed: bool,
    pub items: Vec<GItem>,
}

#[derive(Debug, Clone, Copy)]
pub enum GOp {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct GCount {
    pub family: usize,
    pub index: Option<u64>,
    pub op: GOp,
    pub n: u64,
}

/// A bounded metagrammar. Indexed families range over `0..=param_hi`; the
/// global, if any, over `0..=g_hi`, with `g_hi <= param_hi`.
#[derive(Debug, Clone)]
pub struct GenProgram {
    pub global: Option<u64>,
    pub param_hi: u64,
    pub families: Vec<GFamily>,
    pub start_index: Option<GIdx>,
    pub counts: Vec<GCount>,
    pub prefers: Vec<(i64, String)>,
}

impl GenProgram {
    pub fn random(rng: &mut impl Rng) -> GenProgram {
        let param_hi = rng.gen_range(0..=2u64);
        let global = rng.gen_bool(0.5).then(|| rng.gen_range(0..=param_hi));
        let nfam = rng.gen_range(1..=3);
        let mut families: Vec<GFamily> = (0..nfam)
            .map(|f| GFamily { name: ["S", "A", "B"][f].to_string(), indexed: rng.gen_bool(0.4), items: Vec::new() })
            .collect();
        let total = rng.gen_range(1..=8);
        let mut named = 0;
        for _ in 0..total {
            let f = rng.gen_range(0..nfam);
            let indexed = families[f].indexed;
            let guard = match rng.gen_range(0..6) {
                0 if indexed => Some(GGuard::ParamEq(rng.gen_range(0..=param_hi))),
                1 if indexed && param_hi > 0 => Some(GGuard::ParamPositive),
                2 if global.is_some() => Some(GGuard::GlobalEq(rng.gen_range(0..=global.unwrap()))),
                _ => None,
            };
            let len = rng.gen_range(0..=3);
            let body = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.55) {
                        GSym::T(['a', 'b', 'c'][rng.gen_range(0..3)])
                    } else {
                        let t = rng.gen_range(0..nfam);
                        let idx = if !families[t].indexed {
                            None
                        } else {
                            let mut opts = vec![GIdx::Lit(rng.gen_range(0..=param_hi))];
                            if indexed {
                                opts.push(GIdx::Param);
                                if guard == Some(GGuard::ParamPositive) {
                                    opts.push(GIdx::ParamMinus1);
                                }
                            }
                            if global.is_some() {
                                opts.push(GIdx::Global);
                            }
                            Some(*opts.choose(rng).unwrap())
                        };
                        GSym::N(t, idx)
                    }
                })
                .collect();
            let optional = rng.gen_bool(0.75);
            let name = (!indexed && rng.gen_bool(0.4)).then(|| {
                named += 1;
                format!("N{named}")
            });
            families[f].items.push(GItem { optional, name, guard, body });
        }
        let start_index = families[0].indexed.then(|| {
            if global.is_some() && rng.gen_bool(0.6) {
                GIdx::Global
            } else {
                GIdx::Lit(rng.gen_range(0..=param_hi))
            }
        });
        let mut counts = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let family = rng.gen_range(0..nfam);
            let index = families[family].indexed.then(|| rng.gen_range(0..=param_hi));
            let op = [GOp::Eq, GOp::Le, GOp::Ge][rng.gen_range(0..3)];
            counts.push(GCount { family, index, op, n: rng.gen_range(0..=2) });
        }
        let names: Vec<String> = families.iter().flat_map(|f| f.items.iter().filter_map(|i| i.name.clone())).collect();
        let mut prefers = Vec::new();
        for n in names {
            if rng.gen_bool(0.6) {
                prefers.push((rng.gen_range(-3..=3i64), n));
            }
        }
        GenProgram { global, param_hi, families, start_index, counts, prefers }
    }

    pub fn candidate_count(&self) -> usize {
        self.families.iter().map(|f| f.items.len()).sum()
    }

    pub fn source(&self) -> String {
        let mut out = String::new();
        if let Some(g) = self.global {
            out.push_str(&format!("exists g : [0, {g}].\n"));
        }
        let idx = |i: &GIdx| match i {
            GIdx::Lit(n) => n.to_string(),
            GIdx::Param => "i".into(),
            GIdx::ParamMinus1 => "i-1".into(),
            GIdx::Global => "g".into(),
        };
        for f in &self.families {
            out.push_str(&f.name);
            if f.indexed {
                out.push_str(&format!("{{i : [0, {}]}}", self.param_hi));
            }
            out.push_str(" ->");
            for it in &f.items {
                out.push_str(if it.optional { "\n  ? " } else { "\n  | " });
                match it.guard {
                    Some(GGuard::ParamEq(n)) => out.push_str(&format!("if (i = {n}) then ")),
                    Some(GGuard::ParamPositive) => out.push_str("if (i > 0) then "),
                    Some(GGuard::GlobalEq(n)) => out.push_str(&format!("if (g = {n}) then ")),
                    None => {}
                }
                if it.body.is_empty() {
                    out.push_str("\"\"");
                }
                let parts: Vec<String> = it
                    .body
                    .iter()
                    .map(|s| match s {
                        GSym::T(c) => format!("\"{c}\""),
                        GSym::N(t, None) => self.families[*t].name.clone(),
                        GSym::N(t, Some(i)) => format!("{}{{{}}}", self.families[*t].name, idx(i)),
                    })
                    .collect();
                out.push_str(&parts.join(" "));
                if let Some(n) = &it.name {
                    out.push_str(&format!(" as {n}"));
                }
            }
            out.push_str(".\n");
        }
        for c in &self.counts {
            let name = &self.families[c.family].name;
            let target = match c.index {
                Some(i) => format!("{name}{{{i}}}"),
                None => name.clone(),
            };
            let op = match c.op {
                GOp::Eq => "=",
                GOp::Le => "<=",
                GOp::Ge => ">=",
            };
            out.push_str(&format!("constraint(|Productions({target})| {op} {}).\n", c.n));
        }
        for (w, n) in &self.prefers {
            out.push_str(&format!("prefer {w} {n}.\n"));
        }
        out.push_str("start S");
        if let Some(i) = &self.start_index {
            out.push_str(&format!("{{{}}}", idx(i)));
        }
        out.push('\n');
        out
    }

    fn instances(&self) -> Vec<(usize, Option<u64>)> {
        let mut out = Vec::new();
        for (f, fam) in self.families.iter().enumerate() {
            if fam.indexed {
                out.extend((0..=self.param_hi).map(|i| (f, Some(i))));
            } else {
                out.push((f, None));
            }
        }
        out
    }

    fn flat(&self, f: usize, i: Option<u64>) -> String {
        match i {
            Some(i) => format!("{}_{i}", self.families[f].name),
            None => self.families[f].name.clone(),
        }
    }

    /// Every member grammar of the program: the language-relevant
    /// productions, the count per instance, and the names included.
    pub fn members(&self) -> Vec<Member> {
        let globals: Vec<Option<u64>> = match self.global {
            Some(hi) => (0..=hi).map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for g in globals {
            // (instance, item) pairs whose guard holds
            let mut slots: Vec<(usize, Option<u64>, usize)> = Vec::new();
            for (f, i) in self.instances() {
                for (k, it) in self.families[f].items.iter().enumerate() {
                    let holds = match it.guard {
                        None => true,
                        Some(GGuard::ParamEq(n)) => i == Some(n),
                        Some(GGuard::ParamPositive) => i.is_some_and(|i| i > 0),
                        Some(GGuard::GlobalEq(n)) => g == Some(n),
                    };
                    if holds {
                        slots.push((f, i, k));
                    }
                }
            }
            let free: Vec<usize> = (0..slots.len()).filter(|&s| self.families[slots[s].0].items[slots[s].2].optional).collect();
            for mask in 0u64..(1 << free.len()) {
                let mut on = vec![true; slots.len()];
                for (b, &s) in free.iter().enumerate() {
                    on[s] = mask >> b & 1 == 1;
                }
                let mut prods = Vec::new();
                let mut counts: HashMap<String, u64> = HashMap::new();
                let mut names = HashSet::new();
                for (s, &(f, i, k)) in slots.iter().enumerate() {
                    if !on[s] {
                        continue;
                    }
                    let it = &self.families[f].items[k];
                    *counts.entry(self.flat(f, i)).or_default() += 1;
                    if let Some(n) = &it.name {
                        names.insert(n.clone());
                    }
                    let rhs = it
                        .body
                        .iter()
                        .map(|s| match s {
                            GSym::T(c) => OSym::T(vec![(*c, *c)]),
                            GSym::N(t, None) => OSym::N(self.flat(*t, None)),
                            GSym::N(t, Some(x)) => {
                                let v = match x {
                                    GIdx::Lit(n) => *n,
                                    GIdx::Param => i.unwrap(),
                                    GIdx::ParamMinus1 => i.unwrap() - 1,
                                    GIdx::Global => g.unwrap(),
                                };
                                OSym::N(self.flat(*t, Some(v)))
                            }
                        })
                        .collect();
                    prods.push((self.flat(f, i), rhs));
                }
                let start = match self.start_index {
                    None => self.flat(0, None),
                    Some(GIdx::Lit(n)) => self.flat(0, Some(n)),
                    Some(GIdx::Global) => self.flat(0, g),
                    Some(_) => unreachable!(),
                };
                out.push(Member { prods, counts, names, start });
            }
        }
        out
    }

    /// Best rank over members consistent with the constraints and examples.
    pub fn oracle(&self, pos: &[String], neg: &[String]) -> Option<i64> {
        let mut best: Option<i64> = None;
        for m in self.members() {
            let ok = self.counts.iter().all(|c| {
                let have = m.counts.get(&self.flat(c.family, c.index)).copied().unwrap_or(0);
                match c.op {
                    GOp::Eq => have == c.n,
                    GOp::Le => have <= c.n,
                    GOp::Ge => have >= c.n,
                }
            });
            if !ok {
                continue;
            }
            let rank: i64 = self.prefers.iter().filter(|(_, n)| m.names.contains(n)).map(|(w, _)| *w).sum();
            if best.is_some_and(|b| b >= rank) {
                continue;
            }
            let accepts = |w: &String| cyk_accepts(&m.prods, &m.start, &w.chars().collect::<Vec<_>>());
            if pos.iter().all(accepts) && !neg.iter().any(accepts) {
                best = Some(rank);
            }
        }
        best
    }

    pub fn member_count(&self) -> usize {
        self.members().len()
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    pub prods: Vec<(String, Vec<OSym>)>,
    pub counts: HashMap<String, u64>,
    pub names: HashSet<String>,
    pub start: String,
}

/// A random program with at most `max_members` members, plus examples that
/// some member (when `consistent`) separates.
pub fn random_job(rng: &mut impl Rng, max_members: usize) -> (GenProgram, Vec<String>, Vec<String>) {
    loop {
        let p = GenProgram::random(rng);
        let members = p.members();
        if members.len() > max_members || members.is_empty() {
            continue;
        }
        let words = all_words(4);
        let (pos, neg) = if rng.gen_bool(0.7) {
            let m = &members[rng.gen_range(0..members.len())];
            let (inn, out): (Vec<String>, Vec<String>) =
                words.into_iter().partition(|w| cyk_accepts(&m.prods, &m.start, &w.chars().collect::<Vec<_>>()));
            let (np, nn) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
            let pos: Vec<String> = inn.choose_multiple(rng, np).cloned().collect();
            let neg: Vec<String> = out.choose_multiple(rng, nn).cloned().collect();
            (pos, neg)
        } else {
            let pos: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| random_word(rng, 6)).collect();
            let neg: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| random_word(rng, 6)).filter(|w| !pos.contains(w)).collect();
            (pos, neg)
        };
        return (p, pos, neg);
    }
}
