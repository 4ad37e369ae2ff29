//! Desugaring of a surface program into a candidate space: flat guarded
//! candidate rules, regex operators compiled to helper rules, and directives
//! as conditions over production indicators.

use crate::surface::{
    Atom, Binder, BodyItem, BoolExpr, CmpOp, ExistDecl, IndexExpr, NontermRef, ProdExpr, StrPart, SurfaceProgram,
};
use std::collections::HashMap;

pub type Rid = String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    /// One character from any of the inclusive ranges.
    Set(Vec<(char, char)>),
    /// A nonempty literal string.
    Literal(String),
    Nonterm(String, Option<IndexExpr>),
    /// A helper family, instantiated together with its parent production.
    Helper(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Mandatory(Option<String>),
    Optional(Option<String>),
    Synthesized { parent: Rid },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComprehensionRange {
    pub binder: String,
    pub lo: IndexExpr,
    pub hi: IndexExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRule {
    pub rid: Rid,
    pub lhs: String,
    pub guard: Cond,
    pub rhs: Vec<Symbol>,
    pub origin: Origin,
    /// Present for comprehension items that were not expanded: one candidate
    /// per binder value.
    pub comprehension: Option<ComprehensionRange>,
}

impl CandidateRule {
    pub fn is_synthesized(&self) -> bool {
        matches!(self.origin, Origin::Synthesized { .. })
    }

    /// The top-level rule this one belongs to.
    pub fn root_rid(&self) -> &str {
        match &self.origin {
            Origin::Synthesized { parent } => parent,
            _ => &self.rid,
        }
    }
}

/// A nonterminal family: one lhs name with its index parameter and local
/// existential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub name: String,
    pub param: Option<Binder>,
    pub local: Option<Binder>,
    /// For helper families, the rule whose right-hand side produced them.
    pub helper_of: Option<Rid>,
}

/// Directive conditions over index arithmetic and production indicators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    True,
    False,
    Cmp(IndexExpr, CmpOp, IndexExpr),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Xor(Box<Cond>, Box<Cond>),
    Implies(Box<Cond>, Box<Cond>),
    /// Indicator of a named production, at an index when its rule is indexed.
    Named { name: String, rid: Rid, index: Option<IndexExpr> },
    /// `|productions(family{index})| op rhs`
    Count { family: String, index: Option<IndexExpr>, op: CmpOp, rhs: IndexExpr },
    /// Every instance of the rule whose guard holds is included.
    Included(Rid),
}

impl Cond {
    /// Variables of index expressions in the condition.
    pub fn index_vars(&self, out: &mut Vec<String>) {
        let mut push = |e: &IndexExpr| {
            if let Some(v) = e.var() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        };
        match self {
            Cond::True | Cond::False | Cond::Included(_) => {}
            Cond::Cmp(a, _, b) => {
                push(a);
                push(b);
            }
            Cond::Not(x) => x.index_vars(out),
            Cond::And(a, b) | Cond::Or(a, b) | Cond::Xor(a, b) | Cond::Implies(a, b) => {
                a.index_vars(out);
                b.index_vars(out);
            }
            Cond::Named { index, .. } => {
                if let Some(e) = index {
                    push(e);
                }
            }
            Cond::Count { index, rhs, .. } => {
                if let Some(e) = index {
                    push(e);
                }
                push(rhs);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub forall: Option<Binder>,
    pub cond: Cond,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preference {
    pub forall: Option<Binder>,
    pub weight: i64,
    pub cond: Cond,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emit {
    pub forall: Option<Binder>,
    pub template: Vec<StrPart>,
    pub cond: Cond,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpace {
    pub families: Vec<Family>,
    pub rules: Vec<CandidateRule>,
    pub globals: Vec<ExistDecl>,
    pub constraints: Vec<Constraint>,
    pub preferences: Vec<Preference>,
    pub emits: Vec<Emit>,
    pub start: NontermRef,
}

impl CandidateSpace {
    pub fn family(&self, name: &str) -> Option<&Family> {
        self.families.iter().find(|f| f.name == name)
    }

    pub fn rule(&self, rid: &str) -> Option<&CandidateRule> {
        self.rules.iter().find(|r| r.rid == rid)
    }
}

/// Supply of helper names derived from a parent rid.
pub struct FreshNames {
    next: HashMap<String, usize>,
}

impl FreshNames {
    pub fn new() -> Self {
        FreshNames { next: HashMap::new() }
    }

    pub fn fresh(&mut self, parent: &str) -> String {
        let n = self.next.entry(parent.to_string()).or_insert(0);
        let name = format!("{parent}#{n}");
        *n += 1;
        name
    }
}

impl Default for FreshNames {
    fn default() -> Self {
        Self::new()
    }
}

/// Lower a validated program. The program must have a start declaration.
pub fn lower_program(prog: &SurfaceProgram) -> CandidateSpace {
    let mut names: HashMap<&str, Rid> = HashMap::new();
    for r in &prog.rules {
        for (i, item) in r.body.iter().enumerate() {
            if let BodyItem::Mandatory(_, Some(n)) | BodyItem::Optional(_, Some(n)) = item {
                names.insert(&n.name, rid_of(&r.lhs, i));
            }
        }
    }
    let mut space = CandidateSpace {
        families: Vec::new(),
        rules: Vec::new(),
        globals: prog.existentials.clone(),
        constraints: Vec::new(),
        preferences: Vec::new(),
        emits: Vec::new(),
        start: prog.start.clone().expect("validated program has a start declaration"),
    };
    let mut fresh = FreshNames::new();
    for r in &prog.rules {
        space.families.push(Family {
            name: r.lhs.clone(),
            param: r.param.clone(),
            local: r.local_existential.clone(),
            helper_of: None,
        });
        for (i, item) in r.body.iter().enumerate() {
            let rid = rid_of(&r.lhs, i);
            match item {
                BodyItem::Mandatory(p, n) => {
                    let origin = Origin::Mandatory(n.as_ref().map(|n| n.name.clone()));
                    push_item(&mut space, &mut fresh, &rid, &r.lhs, p, origin, None);
                    space.constraints.push(Constraint { forall: None, cond: Cond::Included(rid) });
                }
                BodyItem::Optional(p, n) => {
                    let origin = Origin::Optional(n.as_ref().map(|n| n.name.clone()));
                    push_item(&mut space, &mut fresh, &rid, &r.lhs, p, origin, None);
                }
                BodyItem::Comprehension { binder, lo, hi, template, .. } => {
                    let expanded = match (lo, hi) {
                        (IndexExpr::Nat(lo), IndexExpr::Nat(hi)) => (*lo..=*hi)
                            .map(|v| subst_prod(template, binder, v).map(|p| (v, p)))
                            .collect::<Option<Vec<_>>>(),
                        _ => None,
                    };
                    match expanded {
                        Some(items) => {
                            for (v, p) in items {
                                let rid = format!("{rid}[{v}]");
                                push_item(&mut space, &mut fresh, &rid, &r.lhs, &p, Origin::Optional(None), None);
                            }
                        }
                        None => {
                            let range = ComprehensionRange { binder: binder.clone(), lo: lo.clone(), hi: hi.clone() };
                            push_item(&mut space, &mut fresh, &rid, &r.lhs, template, Origin::Optional(None), Some(range));
                        }
                    }
                }
            }
        }
    }
    for d in &prog.directives {
        let forall = d.forall.clone();
        match &d.kind {
            crate::surface::DirectiveKind::Constraint(b) => {
                space.constraints.push(Constraint { forall, cond: lower_cond(b, &names) });
            }
            crate::surface::DirectiveKind::Prefer(w, b) => {
                space.preferences.push(Preference { forall, weight: *w, cond: lower_cond(b, &names) });
            }
            crate::surface::DirectiveKind::Emit(parts, b) => {
                space.emits.push(Emit { forall, template: parts.clone(), cond: lower_cond(b, &names) });
            }
        }
    }
    space
}

fn rid_of(lhs: &str, item: usize) -> Rid {
    format!("{lhs}.{item}")
}

fn push_item(
    space: &mut CandidateSpace,
    fresh: &mut FreshNames,
    rid: &str,
    lhs: &str,
    p: &ProdExpr,
    origin: Origin,
    comprehension: Option<ComprehensionRange>,
) {
    let (guard, body) = split_guard(p);
    let (rhs, helpers) = compile_regex(&body, rid, fresh);
    space.rules.push(CandidateRule { rid: rid.to_string(), lhs: lhs.to_string(), guard, rhs, origin, comprehension });
    for h in helpers {
        if space.family(&h.lhs).is_none() {
            space.families.push(Family { name: h.lhs.clone(), param: None, local: None, helper_of: Some(rid.to_string()) });
        }
        space.rules.push(h);
    }
}

/// Peel leading `if b then` guards off a production.
fn split_guard(p: &ProdExpr) -> (Cond, ProdExpr) {
    let mut guard = Cond::True;
    let mut cur = p.clone();
    while let [Atom::Guard(b, rest)] = cur.atoms.as_slice() {
        let g = lower_cond(b, &HashMap::new());
        guard = if guard == Cond::True { g } else { Cond::And(Box::new(guard), Box::new(g)) };
        cur = (**rest).clone();
    }
    (guard, cur)
}

/// Compile regex operators in `rhs` to helper rules tied to `parent_rid`.
///
/// `p*` becomes a helper `T` with `T -> ""` and `T -> p T`; a group becomes a
/// helper with one rule per alternative; a guard that is not leading becomes
/// a helper whose single rule carries the guard.
pub fn compile_regex(rhs: &ProdExpr, parent_rid: &str, fresh: &mut FreshNames) -> (Vec<Symbol>, Vec<CandidateRule>) {
    let mut helpers = Vec::new();
    let syms = compile_seq(&rhs.atoms, parent_rid, fresh, &mut helpers);
    (syms, helpers)
}

fn compile_seq(atoms: &[Atom], parent: &str, fresh: &mut FreshNames, helpers: &mut Vec<CandidateRule>) -> Vec<Symbol> {
    let mut out = Vec::new();
    for a in atoms {
        match a {
            Atom::Terminal(s) if s.is_empty() => {}
            Atom::Terminal(s) => out.push(Symbol::Literal(s.clone())),
            Atom::CharRange(lo, hi) => out.push(Symbol::Set(vec![(*lo, *hi)])),
            Atom::Nonterm(r) => out.push(Symbol::Nonterm(r.name.clone(), r.index.clone())),
            Atom::Star(inner) => {
                let t = fresh.fresh(parent);
                helpers.push(helper_rule(parent, &t, 0, Cond::True, Vec::new()));
                let mut body = compile_seq(&inner.atoms, parent, fresh, helpers);
                body.push(Symbol::Helper(t.clone()));
                helpers.push(helper_rule(parent, &t, 1, Cond::True, body));
                out.push(Symbol::Helper(t));
            }
            Atom::Group(alts) => {
                let t = fresh.fresh(parent);
                for (i, alt) in alts.iter().enumerate() {
                    let (guard, alt) = split_guard(alt);
                    let body = compile_seq(&alt.atoms, parent, fresh, helpers);
                    helpers.push(helper_rule(parent, &t, i, guard, body));
                }
                out.push(Symbol::Helper(t));
            }
            Atom::Guard(b, rest) => {
                let t = fresh.fresh(parent);
                let guard = lower_cond(b, &HashMap::new());
                let body = compile_seq(&rest.atoms, parent, fresh, helpers);
                helpers.push(helper_rule(parent, &t, 0, guard, body));
                out.push(Symbol::Helper(t));
            }
        }
    }
    out
}

fn helper_rule(parent: &str, name: &str, i: usize, guard: Cond, rhs: Vec<Symbol>) -> CandidateRule {
    CandidateRule {
        rid: format!("{name}.{i}"),
        lhs: name.to_string(),
        guard,
        rhs,
        origin: Origin::Synthesized { parent: parent.to_string() },
        comprehension: None,
    }
}

fn lower_cond(b: &BoolExpr, names: &HashMap<&str, Rid>) -> Cond {
    let bx = |x: &BoolExpr| Box::new(lower_cond(x, names));
    match b {
        BoolExpr::True => Cond::True,
        BoolExpr::False => Cond::False,
        BoolExpr::Cmp(l, op, r, _) => Cond::Cmp(l.clone(), *op, r.clone()),
        BoolExpr::Not(x) => Cond::Not(bx(x)),
        BoolExpr::And(l, r) => Cond::And(bx(l), bx(r)),
        BoolExpr::Or(l, r) => Cond::Or(bx(l), bx(r)),
        BoolExpr::Xor(l, r) => Cond::Xor(bx(l), bx(r)),
        BoolExpr::Implies(l, r) => Cond::Implies(bx(l), bx(r)),
        BoolExpr::Indicator(r) => Cond::Named {
            name: r.name.clone(),
            rid: names.get(r.name.as_str()).cloned().unwrap_or_default(),
            index: r.index.clone(),
        },
        BoolExpr::Count(r, op, e) => Cond::Count { family: r.name.clone(), index: r.index.clone(), op: *op, rhs: e.clone() },
    }
}

fn subst_index(e: &IndexExpr, var: &str, val: u64) -> Option<IndexExpr> {
    Some(match e {
        IndexExpr::Var(v) if v == var => IndexExpr::Nat(val),
        IndexExpr::Minus(v, n) if v == var => IndexExpr::Nat(val.checked_sub(*n)?),
        other => other.clone(),
    })
}

fn subst_bool(b: &BoolExpr, var: &str, val: u64) -> Option<BoolExpr> {
    let bx = |x: &BoolExpr| subst_bool(x, var, val).map(Box::new);
    let r = |r: &NontermRef| -> Option<NontermRef> {
        Some(NontermRef {
            name: r.name.clone(),
            index: match &r.index {
                Some(e) => Some(subst_index(e, var, val)?),
                None => None,
            },
            span: r.span.clone(),
        })
    };
    Some(match b {
        BoolExpr::True | BoolExpr::False => b.clone(),
        BoolExpr::Cmp(l, op, rr, s) => BoolExpr::Cmp(subst_index(l, var, val)?, *op, subst_index(rr, var, val)?, s.clone()),
        BoolExpr::Not(x) => BoolExpr::Not(bx(x)?),
        BoolExpr::And(l, rr) => BoolExpr::And(bx(l)?, bx(rr)?),
        BoolExpr::Or(l, rr) => BoolExpr::Or(bx(l)?, bx(rr)?),
        BoolExpr::Xor(l, rr) => BoolExpr::Xor(bx(l)?, bx(rr)?),
        BoolExpr::Implies(l, rr) => BoolExpr::Implies(bx(l)?, bx(rr)?),
        BoolExpr::Indicator(n) => BoolExpr::Indicator(r(n)?),
        BoolExpr::Count(n, op, e) => BoolExpr::Count(r(n)?, *op, subst_index(e, var, val)?),
    })
}

/// Substitute `val` for `var` in a production. `None` if some `var - n`
/// would be negative.
fn subst_prod(p: &ProdExpr, var: &str, val: u64) -> Option<ProdExpr> {
    let mut atoms = Vec::with_capacity(p.atoms.len());
    for a in &p.atoms {
        atoms.push(match a {
            Atom::Terminal(_) | Atom::CharRange(..) => a.clone(),
            Atom::Nonterm(r) => Atom::Nonterm(NontermRef {
                name: r.name.clone(),
                index: match &r.index {
                    Some(e) => Some(subst_index(e, var, val)?),
                    None => None,
                },
                span: r.span.clone(),
            }),
            Atom::Star(inner) => Atom::Star(Box::new(subst_prod(inner, var, val)?)),
            Atom::Group(alts) => Atom::Group(alts.iter().map(|x| subst_prod(x, var, val)).collect::<Option<_>>()?),
            Atom::Guard(b, rest) => Atom::Guard(subst_bool(b, var, val)?, Box::new(subst_prod(rest, var, val)?)),
        });
    }
    Some(ProdExpr { atoms, span: p.span.clone() })
}
