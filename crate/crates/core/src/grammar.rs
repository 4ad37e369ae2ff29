//! Flat context-free grammars whose productions carry indicator variables.

use crate::solver::Var;
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CSym {
    /// Nonterminal, by flat name.
    N(String),
    /// Nonempty literal string.
    Lit(String),
    /// One character from any of the inclusive ranges.
    Set(Vec<(char, char)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub pid: usize,
    pub indicator: Var,
    pub lhs: String,
    pub rhs: Vec<CSym>,
    pub source_rid: String,
    /// Index variables in effect when the production was instantiated.
    pub env: BTreeMap<String, u64>,
    /// Helper and synthetic start productions; excluded from counting.
    pub synthesized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteGrammar {
    pub productions: Vec<Production>,
    pub start: String,
}

impl ConcreteGrammar {
    /// A grammar from bare `(lhs, rhs)` pairs; pids and indicators are positions.
    pub fn from_rules(start: &str, rules: Vec<(String, Vec<CSym>)>) -> Self {
        let productions = rules
            .into_iter()
            .enumerate()
            .map(|(i, (lhs, rhs))| Production {
                pid: i,
                indicator: i as Var,
                lhs,
                rhs,
                source_rid: String::new(),
                env: BTreeMap::new(),
                synthesized: false,
            })
            .collect();
        ConcreteGrammar { productions, start: start.to_string() }
    }

    pub fn production(&self, pid: usize) -> Option<&Production> {
        self.productions.iter().find(|p| p.pid == pid)
    }

    /// Keep the productions satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&Production) -> bool) -> ConcreteGrammar {
        ConcreteGrammar {
            productions: self.productions.iter().filter(|p| keep(p)).cloned().collect(),
            start: self.start.clone(),
        }
    }

    /// Drop productions whose lhs is not reachable from the start symbol.
    pub fn reachable(&self) -> ConcreteGrammar {
        let mut by_lhs: HashMap<&str, Vec<&Production>> = HashMap::new();
        for p in &self.productions {
            by_lhs.entry(&p.lhs).or_default().push(p);
        }
        let mut seen: HashSet<&str> = HashSet::new();
        let mut stack = vec![self.start.as_str()];
        seen.insert(&self.start);
        while let Some(n) = stack.pop() {
            for p in by_lhs.get(n).into_iter().flatten() {
                for s in &p.rhs {
                    if let CSym::N(m) = s {
                        if seen.insert(m) {
                            stack.push(m);
                        }
                    }
                }
            }
        }
        self.restrict(|p| seen.contains(p.lhs.as_str()))
    }

    /// Nonterminals appearing as a lhs or on a rhs, in first-appearance order.
    pub fn nonterminals(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let names = std::iter::once(self.start.as_str()).chain(self.productions.iter().flat_map(|p| {
            std::iter::once(p.lhs.as_str()).chain(p.rhs.iter().filter_map(|s| match s {
                CSym::N(n) => Some(n.as_str()),
                _ => None,
            }))
        }));
        for n in names {
            if seen.insert(n) {
                out.push(n);
            }
        }
        out
    }
}
