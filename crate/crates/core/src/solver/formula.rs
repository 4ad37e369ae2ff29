//! Propositional formulas as shared DAGs over numbered variables.

use crate::surface::CmpOp;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub type Var = u32;

#[derive(Clone)]
pub struct Formula(Arc<Node>);

#[derive(Debug)]
pub enum Node {
    Const(bool),
    Var(Var),
    Not(Formula),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Xor(Formula, Formula),
    Implies(Formula, Formula),
    Iff(Formula, Formula),
    /// `|{f in items : f}| op bound`
    Card { items: Vec<Formula>, op: CmpOp, bound: u64 },
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Formula {
    fn mk(n: Node) -> Formula {
        Formula(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Identity of the shared node; stable while any clone is alive.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(b: bool) -> Formula {
        Formula::mk(Node::Const(b))
    }

    pub fn tru() -> Formula {
        Formula::constant(true)
    }

    pub fn fals() -> Formula {
        Formula::constant(false)
    }

    pub fn var(v: Var) -> Formula {
        Formula::mk(Node::Var(v))
    }

    pub fn as_const(&self) -> Option<bool> {
        match *self.0 {
            Node::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f.node() {
            Node::Const(b) => Formula::constant(!b),
            Node::Not(inner) => inner.clone(),
            _ => Formula::mk(Node::Not(f)),
        }
    }

    pub fn and(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f.node() {
                Node::Const(true) => {}
                Node::Const(false) => return Formula::fals(),
                Node::And(inner) => out.extend(inner.iter().cloned()),
                _ => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::tru(),
            1 => out.pop().unwrap(),
            _ => Formula::mk(Node::And(out)),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f.node() {
                Node::Const(false) => {}
                Node::Const(true) => return Formula::tru(),
                Node::Or(inner) => out.extend(inner.iter().cloned()),
                _ => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::fals(),
            1 => out.pop().unwrap(),
            _ => Formula::mk(Node::Or(out)),
        }
    }

    pub fn xor(a: Formula, b: Formula) -> Formula {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Formula::constant(x != y),
            (Some(false), None) => b,
            (Some(true), None) => Formula::not(b),
            (None, Some(false)) => a,
            (None, Some(true)) => Formula::not(a),
            (None, None) => Formula::mk(Node::Xor(a, b)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a.as_const(), b.as_const()) {
            (Some(false), _) | (_, Some(true)) => Formula::tru(),
            (Some(true), _) => b,
            (_, Some(false)) => Formula::not(a),
            (None, None) => Formula::mk(Node::Implies(a, b)),
        }
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Formula::constant(x == y),
            (Some(true), None) => b,
            (Some(false), None) => Formula::not(b),
            (None, Some(true)) => a,
            (None, Some(false)) => Formula::not(a),
            (None, None) => Formula::mk(Node::Iff(a, b)),
        }
    }

    /// Cardinality comparison. Constant items are folded into the bound.
    pub fn card(items: Vec<Formula>, op: CmpOp, bound: u64) -> Formula {
        let mut trues = 0u64;
        let mut rest = Vec::new();
        for f in items {
            match f.as_const() {
                Some(true) => trues += 1,
                Some(false) => {}
                None => rest.push(f),
            }
        }
        let n = rest.len() as u64;
        // count = trues + c with c in 0..=n; decide op against bound
        let shifted = bound as i128 - trues as i128;
        let always = (0..=n as i128).all(|c| op.holds_i(c, shifted));
        let never = (0..=n as i128).all(|c| !op.holds_i(c, shifted));
        if always {
            return Formula::tru();
        }
        if never {
            return Formula::fals();
        }
        Formula::mk(Node::Card { items: rest, op, bound: shifted as u64 })
    }

    /// Exactly one of `items`.
    pub fn exactly_one(items: Vec<Formula>) -> Formula {
        Formula::card(items, CmpOp::Eq, 1)
    }

    pub fn eval(&self, assign: &dyn Fn(Var) -> bool) -> bool {
        let mut memo = HashMap::new();
        self.eval_memo(assign, &mut memo)
    }

    fn eval_memo(&self, assign: &dyn Fn(Var) -> bool, memo: &mut HashMap<usize, bool>) -> bool {
        if let Some(&b) = memo.get(&self.id()) {
            return b;
        }
        let v = match self.node() {
            Node::Const(b) => *b,
            Node::Var(v) => assign(*v),
            Node::Not(f) => !f.eval_memo(assign, memo),
            Node::And(fs) => fs.iter().all(|f| f.eval_memo(assign, memo)),
            Node::Or(fs) => fs.iter().any(|f| f.eval_memo(assign, memo)),
            Node::Xor(a, b) => a.eval_memo(assign, memo) != b.eval_memo(assign, memo),
            Node::Implies(a, b) => !a.eval_memo(assign, memo) || b.eval_memo(assign, memo),
            Node::Iff(a, b) => a.eval_memo(assign, memo) == b.eval_memo(assign, memo),
            Node::Card { items, op, bound } => {
                let c = items.iter().filter(|f| f.eval_memo(assign, memo)).count() as u64;
                op.holds(c, *bound)
            }
        };
        memo.insert(self.id(), v);
        v
    }

    /// Variables occurring in the formula, sorted.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = std::collections::HashSet::new();
        let mut out = std::collections::BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if !seen.insert(f.id()) {
                continue;
            }
            match f.node() {
                Node::Const(_) => {}
                Node::Var(v) => {
                    out.insert(*v);
                }
                Node::Not(a) => stack.push(a.clone()),
                Node::And(fs) | Node::Or(fs) | Node::Card { items: fs, .. } => stack.extend(fs.iter().cloned()),
                Node::Xor(a, b) | Node::Implies(a, b) | Node::Iff(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        out.into_iter().collect()
    }
}

impl CmpOp {
    pub(crate) fn holds_i(self, a: i128, b: i128) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Bidirectional map between variable names and numbers.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, Var>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The variable called `name`, created on first use.
    pub fn var(&mut self, name: &str) -> Var {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len() as Var;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn get(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_folding() {
        let x = Formula::var(0);
        assert!(Formula::and([Formula::tru(), Formula::fals(), x.clone()]).as_const() == Some(false));
        assert_eq!(Formula::or([Formula::fals(), x.clone()]).vars(), vec![0]);
        assert_eq!(Formula::card(vec![Formula::tru(), Formula::tru()], CmpOp::Eq, 2).as_const(), Some(true));
        assert_eq!(Formula::card(vec![Formula::tru(), x.clone()], CmpOp::Lt, 1).as_const(), Some(false));
        assert!(Formula::card(vec![Formula::tru(), x], CmpOp::Eq, 2).as_const().is_none());
    }

    #[test]
    fn card_eval() {
        let f = Formula::card((0..4).map(Formula::var).collect(), CmpOp::Eq, 2);
        for m in 0u32..16 {
            assert_eq!(f.eval(&|v| m >> v & 1 == 1), m.count_ones() == 2);
        }
    }
}
