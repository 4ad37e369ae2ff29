use super::ast::*;
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    MissingStart,
    UndefinedNonterminal,
    UndeclaredVariable,
    ArityMismatch,
    DuplicateName,
    UnknownIndicator,
    Shadowing,
    NegativeIndex,
    /// Guards may only test index expressions.
    InvalidGuard,
    /// A plain nonterminal name collides with the flattened name of an indexed one.
    NameClash,
    UnusedExistential,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.span, self.message)
    }
}

/// Check scoping, arity and naming invariants. An empty result means the
/// program is well formed.
pub fn validate(prog: &SurfaceProgram) -> Vec<Diagnostic> {
    let mut v = Validator::new(prog);
    v.run();
    v.diags
}

struct Validator<'a> {
    prog: &'a SurfaceProgram,
    diags: Vec<Diagnostic>,
    /// rule name -> parameter type, if indexed
    rules: HashMap<&'a str, Option<IndexType>>,
    /// item name -> (declaring rule indexed?)
    names: HashMap<&'a str, bool>,
    globals: HashMap<&'a str, IndexType>,
    used_globals: HashSet<String>,
}

type Scope = Vec<(String, IndexType)>;

impl<'a> Validator<'a> {
    fn new(prog: &'a SurfaceProgram) -> Self {
        Validator {
            prog,
            diags: Vec::new(),
            rules: HashMap::new(),
            names: HashMap::new(),
            globals: HashMap::new(),
            used_globals: HashSet::new(),
        }
    }

    fn err(&mut self, kind: DiagnosticKind, span: &SourceSpan, message: String) {
        self.diags.push(Diagnostic { severity: Severity::Error, kind, message, span: span.clone() });
    }

    fn run(&mut self) {
        let prog = self.prog;
        for r in &prog.rules {
            if self.rules.insert(&r.lhs, r.param.as_ref().map(|p| p.ty)).is_some() {
                self.err(DiagnosticKind::DuplicateName, &r.span, format!("rule `{}` is defined twice", r.lhs));
            }
        }
        for r in &prog.rules {
            for item in &r.body {
                if let BodyItem::Mandatory(_, Some(n)) | BodyItem::Optional(_, Some(n)) = item {
                    if self.rules.contains_key(n.name.as_str()) || self.names.insert(&n.name, r.param.is_some()).is_some() {
                        self.err(DiagnosticKind::DuplicateName, &n.span, format!("name `{}` is already in use", n.name));
                    }
                }
            }
        }
        for e in &prog.existentials {
            if self.globals.insert(&e.name, e.bound).is_some() {
                self.err(DiagnosticKind::DuplicateName, &e.span, format!("existential `{}` is declared twice", e.name));
            }
        }
        self.check_name_clashes();

        for r in &prog.rules {
            self.rule(r);
        }
        for d in &prog.directives {
            let mut scope: Scope = Vec::new();
            if let Some(b) = &d.forall {
                if self.globals.contains_key(b.name.as_str()) {
                    self.err(DiagnosticKind::Shadowing, &d.span, format!("binder `{}` shadows an existential", b.name));
                }
                scope.push((b.name.clone(), b.ty));
            }
            match &d.kind {
                DirectiveKind::Constraint(b) | DirectiveKind::Prefer(_, b) => self.bool_expr(b, &scope, &d.span, false),
                DirectiveKind::Emit(parts, b) => {
                    for p in parts {
                        if let StrPart::Index(e) = p {
                            self.index_expr(e, &scope, &d.span);
                        }
                    }
                    self.bool_expr(b, &scope, &d.span, false);
                }
            }
        }
        match &prog.start {
            None => {
                let span = SourceSpan::new(prog.name.clone(), 1, 1);
                self.err(DiagnosticKind::MissingStart, &span, "no start declaration".into());
            }
            Some(s) => self.nonterm_ref(s, &Vec::new()),
        }
        for e in &prog.existentials {
            if !self.used_globals.contains(&e.name) {
                self.diags.push(Diagnostic {
                    severity: Severity::Warning,
                    kind: DiagnosticKind::UnusedExistential,
                    message: format!("existential `{}` is never used", e.name),
                    span: e.span.clone(),
                });
            }
        }
    }

    fn check_name_clashes(&mut self) {
        let indexed: Vec<&str> = self.prog.rules.iter().filter(|r| r.param.is_some()).map(|r| r.lhs.as_str()).collect();
        for r in &self.prog.rules {
            if r.param.is_some() {
                continue;
            }
            for base in &indexed {
                if let Some(rest) = r.lhs.strip_prefix(base).and_then(|s| s.strip_prefix('_')) {
                    if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                        self.err(
                            DiagnosticKind::NameClash,
                            &r.span,
                            format!("`{}` collides with an instance of indexed rule `{base}`", r.lhs),
                        );
                    }
                }
            }
        }
    }

    fn rule(&mut self, r: &'a RuleDecl) {
        let mut scope: Scope = Vec::new();
        if let Some(p) = &r.param {
            if self.globals.contains_key(p.name.as_str()) {
                self.err(DiagnosticKind::Shadowing, &r.span, format!("parameter `{}` shadows an existential", p.name));
            }
            scope.push((p.name.clone(), p.ty));
        }
        if let Some(l) = &r.local_existential {
            if self.globals.contains_key(l.name.as_str()) || scope.iter().any(|(n, _)| *n == l.name) {
                self.err(DiagnosticKind::Shadowing, &r.span, format!("local existential `{}` shadows a variable", l.name));
            }
            scope.push((l.name.clone(), l.ty));
        }
        for item in &r.body {
            match item {
                BodyItem::Mandatory(p, n) | BodyItem::Optional(p, n) => {
                    self.prod(p, &scope, true);
                    if let Some(n) = n {
                        if let Some(ix) = &n.index {
                            if r.param.as_ref().map(|p| &p.name) != Some(ix) {
                                self.err(
                                    DiagnosticKind::ArityMismatch,
                                    &n.span,
                                    format!("`{}` may only be indexed by the rule parameter", n.name),
                                );
                            }
                        }
                    }
                }
                BodyItem::Comprehension { binder, lo, hi, template, span } => {
                    self.index_expr(lo, &scope, span);
                    self.index_expr(hi, &scope, span);
                    if scope.iter().any(|(n, _)| n == binder) || self.globals.contains_key(binder.as_str()) {
                        self.err(DiagnosticKind::Shadowing, span, format!("comprehension variable `{binder}` shadows a variable"));
                    }
                    let mut inner = scope.clone();
                    inner.push((binder.clone(), IndexType::Nat));
                    self.prod(template, &inner, true);
                }
            }
        }
    }

    fn prod(&mut self, p: &ProdExpr, scope: &Scope, guard_allowed: bool) {
        for a in &p.atoms {
            match a {
                Atom::Terminal(_) => {}
                Atom::CharRange(lo, hi) => {
                    if lo > hi {
                        self.err(DiagnosticKind::InvalidGuard, &p.span, format!("empty character range {lo:?}-{hi:?}"));
                    }
                }
                Atom::Nonterm(r) => self.nonterm_ref(r, scope),
                Atom::Star(inner) => self.prod(inner, scope, guard_allowed),
                Atom::Group(alts) => alts.iter().for_each(|alt| self.prod(alt, scope, guard_allowed)),
                Atom::Guard(b, inner) => {
                    self.bool_expr(b, scope, &p.span, true);
                    self.prod(inner, scope, guard_allowed);
                }
            }
        }
    }

    fn lookup(&mut self, var: &str, scope: &Scope) -> Option<IndexType> {
        if let Some((_, t)) = scope.iter().rev().find(|(n, _)| n == var) {
            return Some(*t);
        }
        if let Some(t) = self.globals.get(var) {
            self.used_globals.insert(var.to_string());
            return Some(*t);
        }
        None
    }

    fn index_expr(&mut self, e: &IndexExpr, scope: &Scope, span: &SourceSpan) {
        let Some(var) = e.var() else { return };
        match self.lookup(var, scope) {
            None => self.err(DiagnosticKind::UndeclaredVariable, span, format!("undeclared variable `{var}`")),
            Some(ty) => {
                if let (IndexExpr::Minus(_, n), IndexType::Range(_, hi)) = (e, ty) {
                    if hi < *n {
                        self.err(
                            DiagnosticKind::NegativeIndex,
                            span,
                            format!("`{var}-{n}` is negative for every value of `{var}`"),
                        );
                    }
                }
            }
        }
    }

    fn nonterm_ref(&mut self, r: &NontermRef, scope: &Scope) {
        if let Some(e) = &r.index {
            self.index_expr(e, scope, &r.span);
        }
        match self.rules.get(r.name.as_str()) {
            None => self.err(DiagnosticKind::UndefinedNonterminal, &r.span, format!("undefined nonterminal `{}`", r.name)),
            Some(param) => {
                if param.is_some() != r.index.is_some() {
                    let msg = if param.is_some() {
                        format!("`{}` is indexed and needs an index", r.name)
                    } else {
                        format!("`{}` takes no index", r.name)
                    };
                    self.err(DiagnosticKind::ArityMismatch, &r.span, msg);
                }
            }
        }
    }

    fn bool_expr(&mut self, b: &BoolExpr, scope: &Scope, span: &SourceSpan, in_guard: bool) {
        match b {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(l, _, r, s) => {
                self.index_expr(l, scope, s);
                self.index_expr(r, scope, s);
            }
            BoolExpr::Not(x) => self.bool_expr(x, scope, span, in_guard),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) | BoolExpr::Xor(l, r) | BoolExpr::Implies(l, r) => {
                self.bool_expr(l, scope, span, in_guard);
                self.bool_expr(r, scope, span, in_guard);
            }
            BoolExpr::Indicator(r) => {
                if in_guard {
                    self.err(DiagnosticKind::InvalidGuard, &r.span, "guards cannot mention production names".into());
                    return;
                }
                if let Some(e) = &r.index {
                    self.index_expr(e, scope, &r.span);
                }
                match self.names.get(r.name.as_str()) {
                    None => self.err(DiagnosticKind::UnknownIndicator, &r.span, format!("no production is named `{}`", r.name)),
                    Some(&indexed) => {
                        if indexed != r.index.is_some() {
                            let msg = if indexed {
                                format!("`{}` belongs to an indexed rule and needs an index", r.name)
                            } else {
                                format!("`{}` takes no index", r.name)
                            };
                            self.err(DiagnosticKind::ArityMismatch, &r.span, msg);
                        }
                    }
                }
            }
            BoolExpr::Count(r, _, e) => {
                if in_guard {
                    self.err(DiagnosticKind::InvalidGuard, &r.span, "guards cannot count productions".into());
                    return;
                }
                self.nonterm_ref(r, scope);
                self.index_expr(e, scope, &r.span);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_program;

    fn kinds(src: &str) -> Vec<DiagnosticKind> {
        let p = parse_program(src, "t").unwrap();
        validate(&p).into_iter().filter(|d| d.severity == Severity::Error).map(|d| d.kind).collect()
    }

    #[test]
    fn undeclared_existential() {
        assert_eq!(
            kinds("S -> [? \"a\" for j = 0 to maxlen].\nstart S"),
            vec![DiagnosticKind::UndeclaredVariable]
        );
    }

    #[test]
    fn indexed_self_reference_without_index() {
        assert_eq!(kinds("A{i} -> A.\nstart A{0}"), vec![DiagnosticKind::ArityMismatch]);
    }

    #[test]
    fn named_indexed_item_needs_index() {
        let src = "C{i : nat} -> ? \"a\" as Num{i} ? \"b\".\nconstraint Num.\nstart C{0}";
        assert_eq!(kinds(src), vec![DiagnosticKind::ArityMismatch]);
    }

    #[test]
    fn provably_negative_index() {
        assert_eq!(kinds("exists g : [0, 0].\nA{i} -> \"a\".\nS -> A{g-1}.\nstart S"), vec![DiagnosticKind::NegativeIndex]);
    }

    #[test]
    fn guard_cannot_mention_names() {
        let src = "S -> ? \"a\" as X | if X then \"b\".\nstart S";
        assert_eq!(kinds(src), vec![DiagnosticKind::InvalidGuard]);
    }

    #[test]
    fn clash_with_flattened_name() {
        let src = "A{i} -> \"a\".\nA_1 -> \"b\".\nS -> A{0} A_1.\nstart S";
        assert_eq!(kinds(src), vec![DiagnosticKind::NameClash]);
    }

    #[test]
    fn missing_start() {
        assert_eq!(kinds("S -> \"a\"."), vec![DiagnosticKind::MissingStart]);
    }

    #[test]
    fn diagnostics_point_into_source() {
        let src = "exists n : nat.\nS -> [? \"a\" for j = 0 to m].\nstart S";
        let p = parse_program(src, "t").unwrap();
        let lines: Vec<&str> = src.lines().collect();
        for d in validate(&p) {
            let line = lines[d.span.line as usize - 1];
            assert!((d.span.column as usize) <= line.chars().count());
        }
    }
}
