//! Depth-bounded instantiation of a candidate space.
//!
//! At depth `k` every index ranges over `0..k` (intersected with declared
//! ranges). Indexed families are copied per index, existentials get
//! exactly-one selector variables, and rule guards become conditions on those
//! selectors. The result is a flat grammar whose productions carry indicator
//! variables, plus hard constraints, soft terms and emit conditions over them.

use crate::grammar::{CSym, ConcreteGrammar, Production};
use crate::lowering::{CandidateRule, CandidateSpace, Cond, Family, Symbol};
use crate::solver::{Formula, Var, VarTable};
use crate::surface::{IndexExpr, IndexType, StrPart};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use thiserror::Error;

pub type Env = BTreeMap<String, u64>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConcretizeError {
    #[error("index `{expr}` is negative when {env}")]
    IndexUnderflow { expr: String, env: String },
    #[error("start symbol {name}{{{index}}} does not exist at depth {depth}")]
    UnboundedStart { name: String, index: u64, depth: u64 },
    #[error("variable `{0}` is unbound")]
    Unbound(String),
}

fn show_env(env: &Env) -> String {
    let parts: Vec<String> = env.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    parts.join(", ")
}

fn show_expr(e: &IndexExpr) -> String {
    match e {
        IndexExpr::Nat(n) => n.to_string(),
        IndexExpr::Var(v) => v.clone(),
        IndexExpr::Minus(v, n) => format!("{v}-{n}"),
    }
}

/// Evaluate an index expression over the naturals.
pub fn eval_index_expr(e: &IndexExpr, env: &Env) -> Result<u64, ConcretizeError> {
    let get = |v: &str| env.get(v).copied().ok_or_else(|| ConcretizeError::Unbound(v.to_string()));
    match e {
        IndexExpr::Nat(n) => Ok(*n),
        IndexExpr::Var(v) => get(v),
        IndexExpr::Minus(v, n) => get(v)?.checked_sub(*n).ok_or_else(|| ConcretizeError::IndexUnderflow {
            expr: show_expr(e),
            env: show_env(env),
        }),
    }
}

/// Flat name of a family instance.
pub fn idmap(name: &str, index: Option<u64>) -> String {
    match index {
        Some(i) => format!("{name}_{i}"),
        None => name.to_string(),
    }
}

/// Name of the synthetic start symbol used when the start index is chosen by
/// an existential.
pub const SYNTHETIC_START: &str = "#Start";

#[derive(Debug, Clone)]
pub struct EmitEntry {
    pub message: String,
    pub cond: Formula,
}

#[derive(Debug, Clone)]
pub struct Concretization {
    pub depth: u64,
    pub grammar: ConcreteGrammar,
    pub vars: VarTable,
    /// Conjuncts of the hard constraint formula.
    pub hard: Vec<Formula>,
    pub soft: Vec<(i64, Formula)>,
    pub emits: Vec<EmitEntry>,
    /// Condition under which each production's guard holds, by pid.
    pub guards: Vec<Formula>,
}

impl Concretization {
    pub fn hard_formula(&self) -> Formula {
        Formula::and(self.hard.iter().cloned())
    }
}

/// The single depth that decides a bounded space, if the space is bounded:
/// every existential has a range type. Indices are never incremented, so no
/// instance index exceeds the largest constant in the program.
pub fn exact_depth(space: &CandidateSpace) -> Option<u64> {
    if space.globals.iter().any(|g| !g.bound.is_bounded()) {
        return None;
    }
    if space.families.iter().any(|f| f.local.as_ref().is_some_and(|l| !l.ty.is_bounded())) {
        return None;
    }
    let mut max = 0u64;
    let mut ty = |t: &IndexType| {
        if let IndexType::Range(_, hi) = t {
            max = max.max(*hi);
        }
    };
    space.globals.iter().for_each(|g| ty(&g.bound));
    for f in &space.families {
        if let Some(p) = &f.param {
            ty(&p.ty);
        }
        if let Some(l) = &f.local {
            ty(&l.ty);
        }
    }
    for b in space.constraints.iter().map(|c| &c.forall).chain(space.preferences.iter().map(|p| &p.forall)).chain(space.emits.iter().map(|e| &e.forall)).flatten() {
        ty(&b.ty);
    }
    let mut consts = Vec::new();
    let mut e = |x: &IndexExpr| {
        if let IndexExpr::Nat(n) = x {
            consts.push(*n);
        }
    };
    if let Some(i) = &space.start.index {
        e(i);
    }
    // Comparison constants and count bounds never name an instance.
    for r in &space.rules {
        for s in &r.rhs {
            if let Symbol::Nonterm(_, Some(i)) = s {
                e(i);
            }
        }
        if let Some(c) = &r.comprehension {
            e(&c.lo);
            e(&c.hi);
        }
    }
    for c in space.constraints.iter().map(|c| &c.cond).chain(space.preferences.iter().map(|p| &p.cond)).chain(space.emits.iter().map(|e| &e.cond)) {
        let mut refs = Vec::new();
        cond_refs(c, &mut refs);
        refs.into_iter().filter_map(|(_, i)| i).for_each(&mut e);
    }
    for x in space.emits.iter().flat_map(|e| &e.template) {
        if let StrPart::Index(i) = x {
            e(i);
        }
    }
    let m = consts.into_iter().fold(max, u64::max);
    Some(m + 1)
}

/// Evaluate a condition built only from comparisons.
fn eval_guard(c: &Cond, env: &Env) -> Result<bool, ConcretizeError> {
    Ok(match c {
        Cond::True => true,
        Cond::False => false,
        Cond::Cmp(a, op, b) => op.holds(eval_index_expr(a, env)?, eval_index_expr(b, env)?),
        Cond::Not(x) => !eval_guard(x, env)?,
        Cond::And(a, b) => eval_guard(a, env)? && eval_guard(b, env)?,
        Cond::Or(a, b) => eval_guard(a, env)? || eval_guard(b, env)?,
        Cond::Xor(a, b) => eval_guard(a, env)? != eval_guard(b, env)?,
        Cond::Implies(a, b) => !eval_guard(a, env)? || eval_guard(b, env)?,
        Cond::Named { .. } | Cond::Count { .. } | Cond::Included(_) => {
            unreachable!("guards only compare indices")
        }
    })
}

/// Right-hand side symbol with indices evaluated; helpers still by family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum KSym {
    N(String, Option<u64>),
    Lit(String),
    Set(Vec<(char, char)>),
    H(String),
}

/// Everything that distinguishes one instantiation of a rule from another.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    binder: Option<u64>,
    rhs: Vec<KSym>,
    /// For each helper rule of the parent: its evaluated rhs, if its guard holds.
    helpers: Vec<Option<Vec<KSym>>>,
}

struct Ctx<'a> {
    space: &'a CandidateSpace,
    k: u64,
    vars: VarTable,
    hard: Vec<Formula>,
    prods: Vec<Production>,
    guards: Vec<Formula>,
    families: HashMap<&'a str, &'a Family>,
    rules_of: HashMap<&'a str, Vec<&'a CandidateRule>>,
    /// helper rules below each top-level rid, in order
    helpers_of: HashMap<&'a str, Vec<&'a CandidateRule>>,
    globals: Vec<(String, Vec<u64>)>,
    materialized: HashSet<(String, Option<u64>)>,
    queue: VecDeque<(String, Option<u64>)>,
    helper_counter: HashMap<String, usize>,
    /// non-synthesized pids by lhs
    by_lhs: HashMap<String, Vec<usize>>,
    /// pids by (source rid, lhs)
    by_rid: HashMap<(String, String), Vec<usize>>,
    /// all pids by source rid
    by_rid_all: HashMap<String, Vec<usize>>,
    soft_out: Vec<(i64, Formula)>,
    emit_out: Vec<EmitEntry>,
}

pub fn concretize(space: &CandidateSpace, k: u64) -> Result<Concretization, ConcretizeError> {
    assert!(k >= 1, "depth must be at least 1");
    let mut families = HashMap::new();
    for f in &space.families {
        families.insert(f.name.as_str(), f);
    }
    let mut rules_of: HashMap<&str, Vec<&CandidateRule>> = HashMap::new();
    let mut helpers_of: HashMap<&str, Vec<&CandidateRule>> = HashMap::new();
    for r in &space.rules {
        if r.is_synthesized() {
            helpers_of.entry(r.root_rid()).or_default().push(r);
        } else {
            rules_of.entry(r.lhs.as_str()).or_default().push(r);
        }
    }
    let mut ctx = Ctx {
        space,
        k,
        vars: VarTable::new(),
        hard: Vec::new(),
        prods: Vec::new(),
        guards: Vec::new(),
        families,
        rules_of,
        helpers_of,
        globals: Vec::new(),
        materialized: HashSet::new(),
        queue: VecDeque::new(),
        helper_counter: HashMap::new(),
        by_lhs: HashMap::new(),
        by_rid: HashMap::new(),
        by_rid_all: HashMap::new(),
        soft_out: Vec::new(),
        emit_out: Vec::new(),
    };
    for g in &space.globals {
        let values: Vec<u64> = g.bound.values(k).collect();
        let sels: Vec<Formula> = values.iter().map(|v| Formula::var(ctx.vars.var(&format!("{}={v}", g.name)))).collect();
        ctx.hard.push(Formula::exactly_one(sels));
        ctx.globals.push((g.name.clone(), values));
    }
    let start = ctx.start()?;
    ctx.directive_roots()?;
    while let Some((name, idx)) = ctx.queue.pop_front() {
        ctx.materialize(&name, idx)?;
    }
    ctx.directives()?;
    Ok(Concretization {
        depth: k,
        grammar: ConcreteGrammar { productions: ctx.prods, start },
        vars: ctx.vars,
        hard: ctx.hard,
        soft: ctx.soft_out,
        emits: ctx.emit_out,
        guards: ctx.guards,
    })
}

type Choice = (String, u64, Formula);

impl<'a> Ctx<'a> {
    fn in_domain(&self, name: &str, idx: Option<u64>) -> bool {
        match self.families.get(name) {
            None => false,
            Some(f) => match (&f.param, idx) {
                (None, None) => true,
                (Some(p), Some(i)) => i < self.k && p.ty.contains(i),
                _ => false,
            },
        }
    }

    /// Flat name of an instance, scheduling it for materialization.
    fn reference(&mut self, name: &str, idx: Option<u64>) -> String {
        if self.in_domain(name, idx) && self.materialized.insert((name.to_string(), idx)) {
            self.queue.push_back((name.to_string(), idx));
        }
        idmap(name, idx)
    }

    fn global_values(&self, name: &str) -> Option<&[u64]> {
        self.globals.iter().find(|(g, _)| g == name).map(|(_, v)| v.as_slice())
    }

    fn selector(&mut self, g: &str, v: u64) -> Formula {
        Formula::var(self.vars.var(&format!("{g}={v}")))
    }

    fn fresh_var(&mut self, base: &str) -> Var {
        if self.vars.get(base).is_none() {
            return self.vars.var(base);
        }
        let mut n = 2;
        loop {
            let name = format!("{base}/{n}");
            if self.vars.get(&name).is_none() {
                return self.vars.var(&name);
            }
            n += 1;
        }
    }

    fn push_production(&mut self, mut p: Production, guard: Formula) -> usize {
        let pid = self.prods.len();
        p.pid = pid;
        if !p.synthesized {
            self.by_lhs.entry(p.lhs.clone()).or_default().push(pid);
            self.by_rid.entry((p.source_rid.clone(), p.lhs.clone())).or_default().push(pid);
            self.by_rid_all.entry(p.source_rid.clone()).or_default().push(pid);
        }
        self.prods.push(p);
        self.guards.push(guard);
        pid
    }

    fn start(&mut self) -> Result<String, ConcretizeError> {
        let s = &self.space.start;
        match &s.index {
            None => Ok(self.reference(&s.name, None)),
            Some(IndexExpr::Nat(n)) => {
                if !self.in_domain(&s.name, Some(*n)) {
                    return Err(ConcretizeError::UnboundedStart { name: s.name.clone(), index: *n, depth: self.k });
                }
                Ok(self.reference(&s.name, Some(*n)))
            }
            Some(e) => {
                let var = e.var().expect("non-literal index has a variable").to_string();
                let values = self.global_values(&var).ok_or_else(|| ConcretizeError::Unbound(var.clone()))?.to_vec();
                let mut inds = Vec::new();
                for v in values {
                    let env: Env = [(var.clone(), v)].into_iter().collect();
                    let Ok(idx) = eval_index_expr(e, &env) else { continue };
                    if !self.in_domain(&s.name, Some(idx)) {
                        continue;
                    }
                    let target = self.reference(&s.name, Some(idx));
                    let sel = self.selector(&var, v);
                    let ind = self.fresh_var(&format!("{SYNTHETIC_START}->{target}"));
                    self.hard.push(Formula::iff(Formula::var(ind), sel.clone()));
                    inds.push(Formula::var(ind));
                    let p = Production {
                        pid: 0,
                        indicator: ind,
                        lhs: SYNTHETIC_START.to_string(),
                        rhs: vec![CSym::N(target)],
                        source_rid: SYNTHETIC_START.to_string(),
                        env,
                        synthesized: true,
                    };
                    self.push_production(p, sel);
                }
                self.hard.push(Formula::or(inds));
                Ok(SYNTHETIC_START.to_string())
            }
        }
    }

    fn family_of_rid(&self, rid: &str) -> Option<&'a str> {
        self.space.rule(rid).map(|r| r.lhs.as_str())
    }

    /// Instances named by directives are part of the space even when the
    /// start symbol cannot reach them.
    fn directive_roots(&mut self) -> Result<(), ConcretizeError> {
        let space = self.space;
        let items = space
            .constraints
            .iter()
            .map(|c| (&c.forall, &c.cond))
            .chain(space.preferences.iter().map(|p| (&p.forall, &p.cond)))
            .chain(space.emits.iter().map(|e| (&e.forall, &e.cond)));
        for (forall, cond) in items {
            let mut refs = Vec::new();
            cond_refs(cond, &mut refs);
            for (family, index) in refs {
                let family = match family {
                    RefTarget::Family(f) => f,
                    RefTarget::Rid(r) => match self.family_of_rid(r) {
                        Some(f) => f,
                        None => continue,
                    },
                };
                let Some(e) = index else {
                    self.reference(family, None);
                    continue;
                };
                let Some(x) = e.var() else {
                    if let IndexExpr::Nat(n) = e {
                        self.reference(family, Some(*n));
                    }
                    continue;
                };
                let values: Vec<u64> = match forall {
                    Some(b) if b.name == x => b.ty.values(self.k).collect(),
                    _ => self.global_values(x).map(|v| v.to_vec()).unwrap_or_default(),
                };
                for v in values {
                    let env: Env = [(x.to_string(), v)].into_iter().collect();
                    if let Ok(i) = eval_index_expr(e, &env) {
                        self.reference(family, Some(i));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval_syms(&mut self, syms: &[Symbol], env: &Env) -> Result<Vec<KSym>, ConcretizeError> {
        syms.iter()
            .map(|s| {
                Ok(match s {
                    Symbol::Set(r) => KSym::Set(r.clone()),
                    Symbol::Literal(l) => KSym::Lit(l.clone()),
                    Symbol::Helper(h) => KSym::H(h.clone()),
                    Symbol::Nonterm(n, None) => KSym::N(n.clone(), None),
                    Symbol::Nonterm(n, Some(e)) => KSym::N(n.clone(), Some(eval_index_expr(e, env)?)),
                })
            })
            .collect()
    }

    fn materialize(&mut self, name: &str, idx: Option<u64>) -> Result<(), ConcretizeError> {
        let fam = self.families[name];
        let flat = idmap(name, idx);
        let mut base = Env::new();
        if let (Some(p), Some(i)) = (&fam.param, idx) {
            base.insert(p.name.clone(), i);
        }
        let mut local: Vec<Choice> = Vec::new();
        if let Some(l) = &fam.local {
            for v in l.ty.values(self.k) {
                let sel = Formula::var(self.vars.var(&format!("{flat}.{}={v}", l.name)));
                local.push((l.name.clone(), v, sel));
            }
            self.hard.push(Formula::exactly_one(local.iter().map(|c| c.2.clone()).collect()));
        }
        let rules = self.rules_of.get(name).cloned().unwrap_or_default();
        for r in rules {
            let helpers = self.helpers_of.get(r.rid.as_str()).cloned().unwrap_or_default();
            let mut mentioned = Vec::new();
            rule_vars(r, &mut mentioned);
            for h in &helpers {
                rule_vars(h, &mut mentioned);
            }
            let binder = r.comprehension.as_ref().map(|c| c.binder.as_str());
            let mut dims: Vec<Vec<Choice>> = Vec::new();
            for v in mentioned {
                if Some(v.as_str()) == binder || base.contains_key(&v) {
                    continue;
                }
                if fam.local.as_ref().is_some_and(|l| l.name == v) {
                    dims.push(local.clone());
                } else if let Some(vals) = self.global_values(&v) {
                    let vals = vals.to_vec();
                    dims.push(vals.into_iter().map(|x| (v.clone(), x, self.selector(&v, x))).collect());
                } else {
                    return Err(ConcretizeError::Unbound(v));
                }
            }

            let mut groups: Vec<(Key, Vec<Formula>, Env)> = Vec::new();
            let mut index: HashMap<Key, usize> = HashMap::new();
            for choice in cartesian(&dims) {
                let mut env = base.clone();
                for (n, v, _) in &choice {
                    env.insert(n.clone(), *v);
                }
                if !eval_guard(&r.guard, &env)? {
                    continue;
                }
                let conj = Formula::and(choice.iter().map(|c| c.2.clone()));
                let binder_values: Vec<Option<u64>> = match &r.comprehension {
                    Some(c) => {
                        let lo = eval_index_expr(&c.lo, &env)?;
                        let hi = eval_index_expr(&c.hi, &env)?;
                        (lo..=hi).map(Some).collect()
                    }
                    None => vec![None],
                };
                for bv in binder_values {
                    let mut env2 = env.clone();
                    if let (Some(b), Some(v)) = (binder, bv) {
                        env2.insert(b.to_string(), v);
                    }
                    let rhs = self.eval_syms(&r.rhs, &env2)?;
                    let mut hs = Vec::with_capacity(helpers.len());
                    for h in &helpers {
                        hs.push(if eval_guard(&h.guard, &env2)? { Some(self.eval_syms(&h.rhs, &env2)?) } else { None });
                    }
                    let key = Key { binder: bv, rhs, helpers: hs };
                    match index.get(&key) {
                        Some(&g) => groups[g].1.push(conj.clone()),
                        None => {
                            index.insert(key.clone(), groups.len());
                            groups.push((key, vec![conj.clone()], env2));
                        }
                    }
                }
            }

            for (key, conjs, env) in groups {
                let guard = Formula::or(conjs);
                let mut var_name = format!("{}@{flat}", r.rid);
                if let (Some(b), Some(v)) = (binder, key.binder) {
                    var_name.push_str(&format!("[{b}={v}]"));
                }
                let ind = self.fresh_var(&var_name);
                self.hard.push(Formula::implies(Formula::var(ind), guard.clone()));
                let mut helper_flat: HashMap<&str, String> = HashMap::new();
                for h in &helpers {
                    if !helper_flat.contains_key(h.lhs.as_str()) {
                        let c = self.helper_counter.entry(flat.clone()).or_insert(0);
                        helper_flat.insert(&h.lhs, format!("{flat}#{c}"));
                        *c += 1;
                    }
                }
                let rhs = self.resolve(&key.rhs, &helper_flat);
                let p = Production {
                    pid: 0,
                    indicator: ind,
                    lhs: flat.clone(),
                    rhs,
                    source_rid: r.rid.clone(),
                    env: env.clone(),
                    synthesized: false,
                };
                self.push_production(p, guard.clone());
                for (h, hrhs) in helpers.iter().zip(&key.helpers) {
                    let Some(hrhs) = hrhs else { continue };
                    let rhs = self.resolve(hrhs, &helper_flat);
                    let p = Production {
                        pid: 0,
                        indicator: ind,
                        lhs: helper_flat[h.lhs.as_str()].clone(),
                        rhs,
                        source_rid: h.rid.clone(),
                        env: env.clone(),
                        synthesized: true,
                    };
                    self.push_production(p, guard.clone());
                }
            }
        }
        Ok(())
    }

    fn resolve(&mut self, syms: &[KSym], helper_flat: &HashMap<&str, String>) -> Vec<CSym> {
        syms.iter()
            .map(|s| match s {
                KSym::N(n, i) => CSym::N(self.reference(n, *i)),
                KSym::Lit(l) => CSym::Lit(l.clone()),
                KSym::Set(r) => CSym::Set(r.clone()),
                KSym::H(h) => CSym::N(helper_flat[h.as_str()].clone()),
            })
            .collect()
    }

    fn directives(&mut self) -> Result<(), ConcretizeError> {
        let space = self.space;
        for c in &space.constraints {
            for env in self.forall_envs(&c.forall, &c.cond) {
                let f = self.with_globals(&c.cond, &[], &env)?.into_iter().map(|(_, f)| f);
                let f = Formula::or(f);
                self.hard.push(f);
            }
        }
        for p in &space.preferences {
            for env in self.forall_envs(&p.forall, &p.cond) {
                let f = Formula::or(self.with_globals(&p.cond, &[], &env)?.into_iter().map(|(_, f)| f));
                self.soft_out.push((p.weight, f));
            }
        }
        for e in &space.emits {
            for env in self.forall_envs(&e.forall, &e.cond) {
                for (env2, f) in self.with_globals(&e.cond, &e.template, &env)? {
                    if f.as_const() == Some(false) {
                        continue;
                    }
                    let mut message = String::new();
                    for part in &e.template {
                        match part {
                            StrPart::Lit(s) => message.push_str(s),
                            StrPart::Index(x) => message.push_str(&eval_index_expr(x, &env2)?.to_string()),
                        }
                    }
                    self.emit_out.push(EmitEntry { message, cond: f });
                }
            }
        }
        Ok(())
    }

    /// Environments for each instance of a directive. An instance is skipped
    /// when it names a family instance outside the family's index domain.
    fn forall_envs(&self, forall: &Option<crate::surface::Binder>, cond: &Cond) -> Vec<Env> {
        let Some(b) = forall else { return vec![Env::new()] };
        let mut refs = Vec::new();
        cond_refs(cond, &mut refs);
        let mut out = Vec::new();
        'values: for v in b.ty.values(self.k) {
            let env: Env = [(b.name.clone(), v)].into_iter().collect();
            for (target, index) in &refs {
                let Some(e) = index else { continue };
                if e.var() != Some(b.name.as_str()) {
                    continue;
                }
                let family = match target {
                    RefTarget::Family(f) => Some(*f),
                    RefTarget::Rid(r) => self.family_of_rid(r),
                };
                let Some(family) = family else { continue };
                if let Ok(i) = eval_index_expr(e, &env) {
                    if !self.in_domain(family, Some(i)) {
                        continue 'values;
                    }
                }
            }
            out.push(env);
        }
        out
    }

    /// Evaluate `cond` once per assignment to the globals it (or `template`)
    /// mentions, each conjoined with that assignment's selectors.
    fn with_globals(&mut self, cond: &Cond, template: &[StrPart], env: &Env) -> Result<Vec<(Env, Formula)>, ConcretizeError> {
        let mut names = Vec::new();
        cond.index_vars(&mut names);
        for p in template {
            if let StrPart::Index(e) = p {
                if let Some(v) = e.var() {
                    if !names.iter().any(|n| n == v) {
                        names.push(v.to_string());
                    }
                }
            }
        }
        let mut dims: Vec<Vec<Choice>> = Vec::new();
        for n in names {
            if env.contains_key(&n) {
                continue;
            }
            let vals = self.global_values(&n).ok_or_else(|| ConcretizeError::Unbound(n.clone()))?.to_vec();
            dims.push(vals.into_iter().map(|x| (n.clone(), x, self.selector(&n, x))).collect());
        }
        let mut out = Vec::new();
        for choice in cartesian(&dims) {
            let mut env2 = env.clone();
            for (n, v, _) in &choice {
                env2.insert(n.clone(), *v);
            }
            let body = self.eval_cond(cond, &env2)?;
            let f = Formula::and(choice.iter().map(|c| c.2.clone()).chain(std::iter::once(body)));
            out.push((env2, f));
        }
        Ok(out)
    }

    fn indicators(&self, pids: Option<&Vec<usize>>) -> Vec<Formula> {
        pids.into_iter().flatten().map(|&p| Formula::var(self.prods[p].indicator)).collect()
    }

    /// Conditions evaluate lazily: the right operand of a connective is not
    /// evaluated when the left one decides it.
    fn eval_cond(&mut self, c: &Cond, env: &Env) -> Result<Formula, ConcretizeError> {
        Ok(match c {
            Cond::True => Formula::tru(),
            Cond::False => Formula::fals(),
            Cond::Cmp(a, op, b) => Formula::constant(op.holds(eval_index_expr(a, env)?, eval_index_expr(b, env)?)),
            Cond::Not(x) => Formula::not(self.eval_cond(x, env)?),
            Cond::And(a, b) => {
                let fa = self.eval_cond(a, env)?;
                if fa.as_const() == Some(false) {
                    return Ok(fa);
                }
                Formula::and([fa, self.eval_cond(b, env)?])
            }
            Cond::Or(a, b) => {
                let fa = self.eval_cond(a, env)?;
                if fa.as_const() == Some(true) {
                    return Ok(fa);
                }
                Formula::or([fa, self.eval_cond(b, env)?])
            }
            Cond::Implies(a, b) => {
                let fa = self.eval_cond(a, env)?;
                if fa.as_const() == Some(false) {
                    return Ok(Formula::tru());
                }
                Formula::implies(fa, self.eval_cond(b, env)?)
            }
            Cond::Xor(a, b) => Formula::xor(self.eval_cond(a, env)?, self.eval_cond(b, env)?),
            Cond::Named { rid, index, .. } => {
                let Some(family) = self.family_of_rid(rid) else { return Ok(Formula::fals()) };
                let idx = index.as_ref().map(|e| eval_index_expr(e, env)).transpose()?;
                let flat = idmap(family, idx);
                Formula::or(self.indicators(self.by_rid.get(&(rid.clone(), flat))))
            }
            Cond::Count { family, index, op, rhs } => {
                let idx = index.as_ref().map(|e| eval_index_expr(e, env)).transpose()?;
                let n = eval_index_expr(rhs, env)?;
                let flat = idmap(family, idx);
                Formula::card(self.indicators(self.by_lhs.get(&flat)), *op, n)
            }
            Cond::Included(rid) => {
                let pids = self.by_rid_all.get(rid).cloned().unwrap_or_default();
                Formula::and(pids.iter().map(|&p| Formula::implies(self.guards[p].clone(), Formula::var(self.prods[p].indicator))))
            }
        })
    }
}

enum RefTarget<'c> {
    Family(&'c str),
    Rid(&'c str),
}

fn cond_refs<'c>(c: &'c Cond, out: &mut Vec<(RefTarget<'c>, Option<&'c IndexExpr>)>) {
    match c {
        Cond::True | Cond::False | Cond::Cmp(..) | Cond::Included(_) => {}
        Cond::Not(x) => cond_refs(x, out),
        Cond::And(a, b) | Cond::Or(a, b) | Cond::Xor(a, b) | Cond::Implies(a, b) => {
            cond_refs(a, out);
            cond_refs(b, out);
        }
        Cond::Named { rid, index, .. } => out.push((RefTarget::Rid(rid), index.as_ref())),
        Cond::Count { family, index, .. } => out.push((RefTarget::Family(family), index.as_ref())),
    }
}

fn rule_vars(r: &CandidateRule, out: &mut Vec<String>) {
    r.guard.index_vars(out);
    let mut push = |e: &IndexExpr| {
        if let Some(v) = e.var() {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
    };
    for s in &r.rhs {
        if let Symbol::Nonterm(_, Some(e)) = s {
            push(e);
        }
    }
    if let Some(c) = &r.comprehension {
        push(&c.lo);
        push(&c.hi);
    }
}

fn cartesian(dims: &[Vec<Choice>]) -> Vec<Vec<Choice>> {
    let mut out: Vec<Vec<Choice>> = vec![Vec::new()];
    for d in dims {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for c in d {
                let mut p = prefix.clone();
                p.push(c.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}
