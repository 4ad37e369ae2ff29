//! Monotone boolean formulas over indicator variables, hash-consed.
//!
//! Only local simplifications are applied: nested `Or`/`And` are flattened,
//! duplicate children dropped, and the unit and annihilator laws used. Two
//! equivalent formulas may therefore get different ids; deciding equivalence
//! is left to the solver.

use super::semiring::Semiring;
use crate::solver::{Formula, Var};
use std::cell::RefCell;
use std::collections::HashMap;

pub type ProvId = u32;

pub const ZERO: ProvId = 0;
pub const ONE: ProvId = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProvNode {
    Zero,
    One,
    Var(Var),
    Or(Vec<ProvId>),
    And(Vec<ProvId>),
}

#[derive(Debug, Default)]
struct Arena {
    nodes: Vec<ProvNode>,
    index: HashMap<ProvNode, ProvId>,
}

impl Arena {
    fn intern(&mut self, n: ProvNode) -> ProvId {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as ProvId;
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }
}

/// The conditional-table semiring. One arena per instance; not `Sync`, so
/// concurrent parses each use their own.
#[derive(Debug)]
pub struct Provenance {
    arena: RefCell<Arena>,
}

impl Default for Provenance {
    fn default() -> Self {
        Self::new()
    }
}

impl Provenance {
    pub fn new() -> Self {
        let mut a = Arena::default();
        a.intern(ProvNode::Zero);
        a.intern(ProvNode::One);
        Provenance { arena: RefCell::new(a) }
    }

    pub fn var(&self, v: Var) -> ProvId {
        self.arena.borrow_mut().intern(ProvNode::Var(v))
    }

    pub fn node(&self, id: ProvId) -> ProvNode {
        self.arena.borrow().nodes[id as usize].clone()
    }

    pub fn len(&self) -> usize {
        self.arena.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn nary(&self, items: Vec<ProvId>, disj: bool) -> ProvId {
        let (unit, absorbing) = if disj { (ZERO, ONE) } else { (ONE, ZERO) };
        let mut arena = self.arena.borrow_mut();
        let mut kids = Vec::with_capacity(items.len());
        for id in items {
            if id == absorbing {
                return absorbing;
            }
            if id == unit {
                continue;
            }
            match &arena.nodes[id as usize] {
                ProvNode::Or(cs) if disj => kids.extend_from_slice(cs),
                ProvNode::And(cs) if !disj => kids.extend_from_slice(cs),
                _ => kids.push(id),
            }
        }
        kids.sort_unstable();
        kids.dedup();
        match kids.len() {
            0 => unit,
            1 => kids[0],
            _ => arena.intern(if disj { ProvNode::Or(kids) } else { ProvNode::And(kids) }),
        }
    }

    /// The same formula over the solver's representation.
    pub fn to_formula(&self, id: ProvId) -> Formula {
        let arena = self.arena.borrow();
        let mut memo: HashMap<ProvId, Formula> = HashMap::new();
        to_formula_rec(&arena.nodes, id, &mut memo)
    }

    pub fn eval(&self, id: ProvId, assignment: &dyn Fn(Var) -> bool) -> bool {
        let arena = self.arena.borrow();
        let mut memo: HashMap<ProvId, bool> = HashMap::new();
        eval_rec(&arena.nodes, id, assignment, &mut memo)
    }

    /// Indicator variables mentioned by `id`.
    pub fn vars(&self, id: ProvId) -> Vec<Var> {
        let arena = self.arena.borrow();
        let mut seen = vec![false; arena.nodes.len()];
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n as usize], true) {
                continue;
            }
            match &arena.nodes[n as usize] {
                ProvNode::Var(v) => out.push(*v),
                ProvNode::Or(cs) | ProvNode::And(cs) => stack.extend(cs),
                _ => {}
            }
        }
        out.sort_unstable();
        out
    }
}

fn to_formula_rec(nodes: &[ProvNode], id: ProvId, memo: &mut HashMap<ProvId, Formula>) -> Formula {
    if let Some(f) = memo.get(&id) {
        return f.clone();
    }
    let f = match &nodes[id as usize] {
        ProvNode::Zero => Formula::fals(),
        ProvNode::One => Formula::tru(),
        ProvNode::Var(v) => Formula::var(*v),
        ProvNode::Or(cs) => Formula::or(cs.iter().map(|&c| to_formula_rec(nodes, c, memo)).collect::<Vec<_>>()),
        ProvNode::And(cs) => Formula::and(cs.iter().map(|&c| to_formula_rec(nodes, c, memo)).collect::<Vec<_>>()),
    };
    memo.insert(id, f.clone());
    f
}

fn eval_rec(nodes: &[ProvNode], id: ProvId, a: &dyn Fn(Var) -> bool, memo: &mut HashMap<ProvId, bool>) -> bool {
    if let Some(&b) = memo.get(&id) {
        return b;
    }
    let b = match &nodes[id as usize] {
        ProvNode::Zero => false,
        ProvNode::One => true,
        ProvNode::Var(v) => a(*v),
        ProvNode::Or(cs) => cs.iter().any(|&c| eval_rec(nodes, c, a, memo)),
        ProvNode::And(cs) => cs.iter().all(|&c| eval_rec(nodes, c, a, memo)),
    };
    memo.insert(id, b);
    b
}

impl Semiring for Provenance {
    type Elem = ProvId;

    fn zero(&self) -> ProvId {
        ZERO
    }
    fn one(&self) -> ProvId {
        ONE
    }
    fn plus(&self, a: &ProvId, b: &ProvId) -> ProvId {
        self.nary(vec![*a, *b], true)
    }
    fn times(&self, a: &ProvId, b: &ProvId) -> ProvId {
        self.nary(vec![*a, *b], false)
    }
    fn sum(&self, items: Vec<ProvId>) -> ProvId {
        self.nary(items, true)
    }
    fn product(&self, items: Vec<ProvId>) -> ProvId {
        self.nary(items, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_and_flattening() {
        let p = Provenance::new();
        let (a, b, c) = (p.var(0), p.var(1), p.var(2));
        assert_eq!(p.plus(&a, &ZERO), a);
        assert_eq!(p.times(&a, &ONE), a);
        assert_eq!(p.times(&a, &ZERO), ZERO);
        assert_eq!(p.plus(&a, &a), a);
        let ab = p.plus(&a, &b);
        assert_eq!(p.plus(&ab, &c), p.plus(&a, &p.plus(&c, &b)));
        assert_eq!(p.node(p.plus(&ab, &c)), ProvNode::Or(vec![a, b, c]));
    }

    #[test]
    fn all_true_satisfies_nonzero() {
        let p = Provenance::new();
        let x = p.times(&p.var(3), &p.plus(&p.var(1), &p.var(2)));
        assert!(p.eval(x, &|_| true));
        assert!(!p.eval(ZERO, &|_| true));
        assert_eq!(p.vars(x), vec![1, 2, 3]);
    }
}
