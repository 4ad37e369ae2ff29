//! Definitional CNF conversion.
//!
//! Every compound subformula gets a fresh variable constrained to be
//! equivalent to it, so models of the CNF restricted to the original variables
//! are exactly the models of the formula. Shared subformulas are encoded once.
//!
//! Cardinality nodes use a totalizer: a balanced tree of unary counters whose
//! output `o_j` at each node is equivalent to "at least `j` of the leaves
//! below are true". Both implication directions are emitted at every merge,
//! so the outputs are functionally determined by the inputs, which keeps the
//! encoding exact under negation. Size is O(n^2) clauses for n items.

use super::formula::{Formula, Node, Var};
use crate::surface::CmpOp;
use std::collections::HashMap;
use std::ops::Not;

/// A literal: variable number and sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        Lit(v << 1)
    }

    pub fn neg(v: Var) -> Lit {
        Lit(v << 1 | 1)
    }

    pub fn new(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    /// Dense index, `2 * var + sign`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn holds(self, assignment: &[bool]) -> bool {
        assignment[self.var() as usize] != self.is_neg()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl std::fmt::Debug for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", if self.is_neg() { "-" } else { "" }, self.var())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.holds(assignment)))
    }
}

/// Incremental Tseitin encoder. Variables below the initial `num_vars` are
/// the caller's; everything above is auxiliary.
pub struct CnfBuilder {
    cnf: Cnf,
    memo: HashMap<usize, Lit>,
    // keeps memoized nodes alive so their addresses are not reused
    keep: Vec<Formula>,
    true_lit: Option<Lit>,
}

impl CnfBuilder {
    pub fn new(num_vars: u32) -> Self {
        CnfBuilder { cnf: Cnf { num_vars, clauses: Vec::new() }, memo: HashMap::new(), keep: Vec::new(), true_lit: None }
    }

    pub fn fresh(&mut self) -> Lit {
        let v = self.cnf.num_vars;
        self.cnf.num_vars += 1;
        Lit::pos(v)
    }

    pub fn num_vars(&self) -> u32 {
        self.cnf.num_vars
    }

    pub fn add_clause(&mut self, c: Vec<Lit>) {
        self.cnf.clauses.push(c);
    }

    fn true_lit(&mut self) -> Lit {
        if let Some(l) = self.true_lit {
            return l;
        }
        let l = self.fresh();
        self.add_clause(vec![l]);
        self.true_lit = Some(l);
        l
    }

    /// Require `f` to hold.
    pub fn assert(&mut self, f: &Formula) {
        match f.node() {
            Node::Const(true) => {}
            Node::Const(false) => self.add_clause(Vec::new()),
            Node::And(fs) => fs.iter().for_each(|g| self.assert(g)),
            Node::Or(fs) => {
                let c = fs.iter().map(|g| self.lit(g)).collect();
                self.add_clause(c);
            }
            _ => {
                let l = self.lit(f);
                self.add_clause(vec![l]);
            }
        }
    }

    /// A literal equivalent to `f`.
    pub fn lit(&mut self, f: &Formula) -> Lit {
        if let Some(&l) = self.memo.get(&f.id()) {
            return l;
        }
        let l = match f.node() {
            Node::Const(b) => {
                let t = self.true_lit();
                if *b {
                    t
                } else {
                    !t
                }
            }
            Node::Var(v) => {
                assert!(*v < self.cnf.num_vars, "variable {v} out of range");
                Lit::pos(*v)
            }
            Node::Not(g) => !self.lit(g),
            Node::And(fs) => {
                let ls: Vec<Lit> = fs.iter().map(|g| self.lit(g)).collect();
                self.define_and(&ls)
            }
            Node::Or(fs) => {
                let ls: Vec<Lit> = fs.iter().map(|g| !self.lit(g)).collect();
                !self.define_and(&ls)
            }
            Node::Xor(a, b) => {
                let (a, b) = (self.lit(a), self.lit(b));
                let x = self.fresh();
                self.add_clause(vec![!x, a, b]);
                self.add_clause(vec![!x, !a, !b]);
                self.add_clause(vec![x, !a, b]);
                self.add_clause(vec![x, a, !b]);
                x
            }
            Node::Implies(a, b) => {
                let (a, b) = (self.lit(a), self.lit(b));
                !self.define_and(&[a, !b])
            }
            Node::Iff(a, b) => {
                let (a, b) = (self.lit(a), self.lit(b));
                let x = self.fresh();
                self.add_clause(vec![!x, !a, b]);
                self.add_clause(vec![!x, a, !b]);
                self.add_clause(vec![x, a, b]);
                self.add_clause(vec![x, !a, !b]);
                x
            }
            Node::Card { items, op, bound } => {
                let ls: Vec<Lit> = items.iter().map(|g| self.lit(g)).collect();
                self.card(&ls, *op, *bound)
            }
        };
        self.memo.insert(f.id(), l);
        self.keep.push(f.clone());
        l
    }

    fn define_and(&mut self, ls: &[Lit]) -> Lit {
        let x = self.fresh();
        let mut long = vec![x];
        for &l in ls {
            self.add_clause(vec![!x, l]);
            long.push(!l);
        }
        self.add_clause(long);
        x
    }

    /// `ge[j]` is equivalent to "at least j+1 of `ls` hold".
    fn totalizer(&mut self, ls: &[Lit]) -> Vec<Lit> {
        if ls.len() == 1 {
            return vec![ls[0]];
        }
        let (l, r) = ls.split_at(ls.len() / 2);
        let a = self.totalizer(l);
        let b = self.totalizer(r);
        let (p, q) = (a.len(), b.len());
        let out: Vec<Lit> = (0..p + q).map(|_| self.fresh()).collect();
        // index 0 means "at least 0" (true) on the inputs
        let at = |v: &Vec<Lit>, i: usize| -> Option<Lit> { if i == 0 { None } else { v.get(i - 1).copied() } };
        for i in 0..=p {
            for j in 0..=q {
                if i + j >= 1 {
                    // a>=i and b>=j imply out>=i+j
                    let mut c = vec![out[i + j - 1]];
                    c.extend(at(&a, i).map(|x| !x));
                    c.extend(at(&b, j).map(|x| !x));
                    self.add_clause(c);
                }
                if i + j < p + q {
                    // a<i+1 and b<j+1 imply out<i+j+1
                    let mut c = vec![!out[i + j]];
                    if i < p {
                        c.push(a[i]);
                    }
                    if j < q {
                        c.push(b[j]);
                    }
                    self.add_clause(c);
                }
            }
        }
        out
    }

    fn card(&mut self, ls: &[Lit], op: CmpOp, bound: u64) -> Lit {
        let n = ls.len() as u64;
        let t = self.true_lit();
        if ls.is_empty() {
            return if op.holds(0, bound) { t } else { !t };
        }
        let ge = self.totalizer(ls);
        // at_least(b): count >= b
        let at_least = |b: u64| -> Lit {
            if b == 0 {
                t
            } else if b > n {
                !t
            } else {
                ge[b as usize - 1]
            }
        };
        match op {
            CmpOp::Ge => at_least(bound),
            CmpOp::Gt => at_least(bound + 1),
            CmpOp::Lt => !at_least(bound),
            CmpOp::Le => !at_least(bound + 1),
            CmpOp::Eq => {
                let (lo, hi) = (at_least(bound), !at_least(bound + 1));
                self.define_and(&[lo, hi])
            }
            CmpOp::Ne => {
                let (lo, hi) = (at_least(bound), !at_least(bound + 1));
                !self.define_and(&[lo, hi])
            }
        }
    }

    pub fn finish(self) -> Cnf {
        self.cnf
    }
}

/// Convert `f` over variables `0..num_vars` to an equisatisfiable CNF.
pub fn to_cnf(f: &Formula, num_vars: u32) -> Cnf {
    let mut b = CnfBuilder::new(num_vars);
    b.assert(f);
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_var() {
        let c = to_cnf(&Formula::var(0), 1);
        assert_eq!(c.clauses, vec![vec![Lit::pos(0)]]);
    }

    #[test]
    fn pick_one_of_each_pair() {
        let v = Formula::var;
        let f = Formula::and([
            Formula::or([v(0), v(1)]),
            Formula::or([v(2), v(3)]),
            Formula::or([v(4), v(5)]),
        ]);
        let c = to_cnf(&f, 6);
        assert_eq!(c.clauses.len(), 3);
        let models = (0u32..64).filter(|m| c.satisfied_by(&(0..6).map(|i| m >> i & 1 == 1).collect::<Vec<_>>())).count();
        assert_eq!(models, 27);
    }
}
