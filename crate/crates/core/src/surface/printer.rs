use super::ast::*;
use std::fmt::Write;
use std::sync::Arc;

/// Render a program as metagrammar source. Re-parsing the output yields a
/// program equal to the input up to spans.
pub fn print_program(prog: &SurfaceProgram) -> String {
    let mut out = String::new();
    if !prog.imports.is_empty() {
        let names: Vec<&str> = prog.imports.iter().map(|i| i.name.as_str()).collect();
        let _ = writeln!(out, "import {}.", names.join(", "));
    }
    for e in &prog.existentials {
        let _ = writeln!(out, "exists {} : {}.", e.name, index_type(&e.bound));
    }
    for r in &prog.rules {
        out.push_str(&r.lhs);
        if let Some(p) = &r.param {
            let _ = write!(out, "{{{} : {}}}", p.name, index_type(&p.ty));
        }
        out.push_str(" ->");
        if let Some(l) = &r.local_existential {
            let _ = write!(out, " exists {} : {}.", l.name, index_type(&l.ty));
        }
        for item in &r.body {
            out.push_str("\n    ");
            match item {
                BodyItem::Mandatory(p, n) | BodyItem::Optional(p, n) => {
                    out.push_str(if matches!(item, BodyItem::Mandatory(..)) { "| " } else { "? " });
                    prod(&mut out, p);
                    if let Some(n) = n {
                        let _ = write!(out, " as {}", n.name);
                        if let Some(i) = &n.index {
                            let _ = write!(out, "{{{i}}}");
                        }
                    }
                }
                BodyItem::Comprehension { binder, lo, hi, template, .. } => {
                    out.push_str("[? ");
                    prod(&mut out, template);
                    let _ = write!(out, " for {binder} = {} to {}]", index(lo), index(hi));
                }
            }
        }
        out.push_str(".\n");
    }
    for d in &prog.directives {
        if let Some(b) = &d.forall {
            let _ = write!(out, "forall ({} : {}) : ", b.name, index_type(&b.ty));
        }
        match &d.kind {
            DirectiveKind::Constraint(b) => {
                let _ = write!(out, "constraint {}", bool_expr(b));
            }
            DirectiveKind::Prefer(w, b) => {
                let _ = write!(out, "prefer {w} {}", bool_expr(b));
            }
            DirectiveKind::Emit(parts, b) => {
                let parts: Vec<String> = parts
                    .iter()
                    .map(|p| match p {
                        StrPart::Lit(s) => quote(s),
                        StrPart::Index(e) => format!("str({})", index(e)),
                    })
                    .collect();
                let _ = write!(out, "emit {} if {}", parts.join(" + "), bool_expr(b));
            }
        }
        out.push_str(".\n");
    }
    if let Some(s) = &prog.start {
        let _ = writeln!(out, "start {}.", nonterm(s));
    }
    out
}

fn index_type(t: &IndexType) -> String {
    match t {
        IndexType::Nat => "nat".into(),
        IndexType::Range(lo, hi) => format!("[{lo}, {hi}]"),
    }
}

pub(crate) fn index(e: &IndexExpr) -> String {
    match e {
        IndexExpr::Nat(n) => n.to_string(),
        IndexExpr::Var(v) => v.clone(),
        IndexExpr::Minus(v, n) => format!("{v}-{n}"),
    }
}

fn nonterm(r: &NontermRef) -> String {
    match &r.index {
        Some(e) => format!("{}{{{}}}", r.name, index(e)),
        None => r.name.clone(),
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            '\r' => q.push_str("\\r"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn prod(out: &mut String, p: &ProdExpr) {
    let mut first = true;
    for a in &p.atoms {
        if !first {
            out.push(' ');
        }
        first = false;
        atom(out, a);
    }
}

fn atom(out: &mut String, a: &Atom) {
    match a {
        Atom::Terminal(s) => out.push_str(&quote(s)),
        Atom::CharRange(lo, hi) => {
            let _ = write!(out, "[{}-{}]", quote(&lo.to_string()), quote(&hi.to_string()));
        }
        Atom::Nonterm(r) => out.push_str(&nonterm(r)),
        Atom::Star(inner) => {
            if inner.atoms.len() == 1 {
                atom(out, &inner.atoms[0]);
            } else {
                out.push('(');
                prod(out, inner);
                out.push(')');
            }
            out.push('*');
        }
        Atom::Group(alts) => {
            out.push('(');
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                prod(out, alt);
            }
            out.push(')');
        }
        Atom::Guard(b, rest) => {
            let _ = write!(out, "if {} then ", bool_expr(b));
            prod(out, rest);
        }
    }
}

pub(crate) fn bool_expr(b: &BoolExpr) -> String {
    match b {
        BoolExpr::True => "true".into(),
        BoolExpr::False => "false".into(),
        BoolExpr::Cmp(l, op, r, _) => format!("({} {} {})", index(l), op.symbol(), index(r)),
        BoolExpr::Not(x) => format!("!({})", bool_expr(x)),
        BoolExpr::And(l, r) => format!("({} && {})", bool_expr(l), bool_expr(r)),
        BoolExpr::Or(l, r) => format!("({} || {})", bool_expr(l), bool_expr(r)),
        BoolExpr::Xor(l, r) => format!("({} XOR {})", bool_expr(l), bool_expr(r)),
        BoolExpr::Implies(l, r) => format!("({} => {})", bool_expr(l), bool_expr(r)),
        BoolExpr::Indicator(r) => nonterm(r),
        BoolExpr::Count(r, op, e) => format!("(|productions({})| {} {})", nonterm(r), op.symbol(), index(e)),
    }
}

/// Replace every span with a fixed placeholder, for structural comparison.
pub fn erase_spans(prog: &SurfaceProgram) -> SurfaceProgram {
    let blank = SourceSpan::new(Arc::<str>::from(""), 1, 1);
    let mut p = prog.clone();
    p.name = Arc::from("");
    for i in &mut p.imports {
        i.span = blank.clone();
    }
    for e in &mut p.existentials {
        e.span = blank.clone();
    }
    for r in &mut p.rules {
        r.span = blank.clone();
        for item in &mut r.body {
            match item {
                BodyItem::Mandatory(pe, n) | BodyItem::Optional(pe, n) => {
                    erase_prod(pe, &blank);
                    if let Some(n) = n {
                        n.span = blank.clone();
                    }
                }
                BodyItem::Comprehension { template, span, .. } => {
                    *span = blank.clone();
                    erase_prod(template, &blank);
                }
            }
        }
    }
    for d in &mut p.directives {
        d.span = blank.clone();
        match &mut d.kind {
            DirectiveKind::Constraint(b) | DirectiveKind::Prefer(_, b) | DirectiveKind::Emit(_, b) => erase_bool(b, &blank),
        }
    }
    if let Some(s) = &mut p.start {
        s.span = blank;
    }
    p
}

fn erase_prod(p: &mut ProdExpr, blank: &SourceSpan) {
    p.span = blank.clone();
    for a in &mut p.atoms {
        match a {
            Atom::Nonterm(r) => r.span = blank.clone(),
            Atom::Star(inner) => erase_prod(inner, blank),
            Atom::Group(alts) => alts.iter_mut().for_each(|p| erase_prod(p, blank)),
            Atom::Guard(b, inner) => {
                erase_bool(b, blank);
                erase_prod(inner, blank);
            }
            Atom::Terminal(_) | Atom::CharRange(..) => {}
        }
    }
}

fn erase_bool(b: &mut BoolExpr, blank: &SourceSpan) {
    match b {
        BoolExpr::True | BoolExpr::False => {}
        BoolExpr::Cmp(_, _, _, s) => *s = blank.clone(),
        BoolExpr::Not(x) => erase_bool(x, blank),
        BoolExpr::And(l, r) | BoolExpr::Or(l, r) | BoolExpr::Xor(l, r) | BoolExpr::Implies(l, r) => {
            erase_bool(l, blank);
            erase_bool(r, blank);
        }
        BoolExpr::Indicator(r) | BoolExpr::Count(r, _, _) => r.span = blank.clone(),
    }
}
