//! SMT-LIB2 text form of a weighted instance, and parsing of solver replies.
//!
//! Script layout, one command per line:
//!
//! ```text
//! (set-option :produce-models true)
//! (declare-const v0 Bool) ; <variable name>
//! (assert (or v0 (not v3)))
//! (assert-soft v2 :weight 3)
//! (check-sat)
//! (get-model)
//! (get-objectives)
//! ```
//!
//! Variable `i` is always the constant `vi`; the original name follows as a
//! comment. Unit clauses are asserted without `or`, the empty clause as
//! `false`. Soft literals with a negative weight are written as their
//! negation with the absolute weight; weight 0 is omitted. The reply must
//! start with `sat`, `unsat` or `unknown`; after `sat` a model is read from
//! `(define-fun vi () Bool true|false)` entries, either inside `(model ...)`
//! or a bare list. Variables the model omits are false.

use super::cnf::Lit;
use super::maxsat::{Model, WeightedInstance};
use super::SolverError;
use std::fmt::Write;

pub fn emit_smtlib(inst: &WeightedInstance) -> String {
    let mut out = String::from("(set-option :produce-models true)\n");
    for v in 0..inst.num_vars {
        let _ = write!(out, "(declare-const v{v} Bool)");
        if let Some(n) = inst.names.get(v as usize) {
            let _ = write!(out, " ; {}", n.replace('\n', " "));
        }
        out.push('\n');
    }
    for c in &inst.hard {
        match c.len() {
            0 => out.push_str("(assert false)\n"),
            1 => {
                let _ = writeln!(out, "(assert {})", lit(c[0]));
            }
            _ => {
                let parts: Vec<String> = c.iter().map(|&l| lit(l)).collect();
                let _ = writeln!(out, "(assert (or {}))", parts.join(" "));
            }
        }
    }
    for &(w, l) in &inst.soft {
        let (w, l) = if w < 0 { (w.unsigned_abs(), !l) } else { (w as u64, l) };
        if w > 0 {
            let _ = writeln!(out, "(assert-soft {} :weight {w})", lit(l));
        }
    }
    out.push_str("(check-sat)\n(get-model)\n(get-objectives)\n");
    out
}

fn lit(l: Lit) -> String {
    if l.is_neg() {
        format!("(not v{})", l.var())
    } else {
        format!("v{}", l.var())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }
}

/// Parse a sequence of s-expressions. `;` comments are skipped.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexp::List(done));
            }
            '"' => {
                let mut s = String::from("\"");
                loop {
                    match chars.next() {
                        None => return Err("unterminated string".into()),
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                    }
                }
                s.push('"');
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            '|' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err("unterminated quoted symbol".into()),
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::from(c);
                while chars.peek().is_some_and(|&c| !c.is_whitespace() && c != '(' && c != ')' && c != ';') {
                    s.push(chars.next().unwrap());
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

fn var_index(name: &str, num_vars: u32) -> Option<u32> {
    let v: u32 = name.strip_prefix('v')?.parse().ok()?;
    (v < num_vars).then_some(v)
}

/// Read a solver reply back into a model of `inst`.
pub fn parse_external_model(text: &str, inst: &WeightedInstance) -> Result<Option<Model>, SolverError> {
    let bad = |m: &str| SolverError::External(format!("unparseable solver output: {m}"));
    let sexps = parse_sexps(text).map_err(|e| bad(&e))?;
    let status = sexps.first().and_then(Sexp::atom).ok_or_else(|| bad("missing check-sat result"))?;
    match status {
        "unsat" => return Ok(None),
        "sat" => {}
        "unknown" => return Err(SolverError::External("solver answered unknown".into())),
        other => return Err(bad(other)),
    }
    let mut assignment = vec![false; inst.num_vars as usize];
    let mut found = false;
    for s in &sexps[1..] {
        let Sexp::List(items) = s else { continue };
        let body = match items.first().and_then(Sexp::atom) {
            Some("model") => &items[1..],
            Some("error") => return Err(SolverError::External(format!("solver error: {items:?}"))),
            _ => &items[..],
        };
        for def in body {
            let Sexp::List(d) = def else { continue };
            if d.len() != 5 || d[0].atom() != Some("define-fun") {
                continue;
            }
            let (Some(name), Some(val)) = (d[1].atom(), d[4].atom()) else { continue };
            let Some(v) = var_index(name, inst.num_vars) else { continue };
            assignment[v as usize] = match val {
                "true" => true,
                "false" => false,
                other => return Err(bad(&format!("value {other} for {name}"))),
            };
            found = true;
        }
    }
    if !found && inst.num_vars > 0 {
        return Err(bad("no model"));
    }
    if !inst.hard_satisfied(&assignment) {
        return Err(SolverError::External("solver model violates a hard clause".into()));
    }
    let rank = inst.rank_of(&assignment)?;
    Ok(Some(Model { assignment, rank }))
}

/// Parse a script in the dialect written by [`emit_smtlib`].
pub fn parse_script(text: &str) -> Result<WeightedInstance, String> {
    let mut inst = WeightedInstance::default();
    let mut names: Vec<(u32, String)> = Vec::new();
    for line in text.lines() {
        if let (Some(rest), Some(idx)) = (line.strip_prefix("(declare-const v"), line.find(" ; ")) {
            if let Some(v) = rest.split_whitespace().next().and_then(|s| s.parse::<u32>().ok()) {
                names.push((v, line[idx + 3..].to_string()));
            }
        }
    }
    let sexps = parse_sexps(text)?;
    let parse_lit = |s: &Sexp, n: u32| -> Result<Lit, String> {
        match s {
            Sexp::Atom(a) => var_index(a, n).map(Lit::pos).ok_or(format!("unknown constant {a}")),
            Sexp::List(l) if l.len() == 2 && l[0].atom() == Some("not") => {
                let a = l[1].atom().ok_or("nested negation")?;
                var_index(a, n).map(Lit::neg).ok_or(format!("unknown constant {a}"))
            }
            other => Err(format!("expected a literal, found {other:?}")),
        }
    };
    for s in &sexps {
        let Sexp::List(cmd) = s else { return Err(format!("unexpected atom {s:?}")) };
        match cmd.first().and_then(Sexp::atom) {
            Some("declare-const") => {
                let name = cmd.get(1).and_then(Sexp::atom).ok_or("declare-const without name")?;
                let v: u32 = name.strip_prefix('v').and_then(|s| s.parse().ok()).ok_or(format!("bad constant {name}"))?;
                if v != inst.num_vars {
                    return Err(format!("constants must be declared in order, got {name}"));
                }
                inst.num_vars += 1;
            }
            Some("assert") => {
                let body = cmd.get(1).ok_or("empty assert")?;
                let clause = match body {
                    Sexp::Atom(a) if a == "false" => Vec::new(),
                    Sexp::List(l) if l.first().and_then(Sexp::atom) == Some("or") => {
                        l[1..].iter().map(|x| parse_lit(x, inst.num_vars)).collect::<Result<_, _>>()?
                    }
                    other => vec![parse_lit(other, inst.num_vars)?],
                };
                inst.hard.push(clause);
            }
            Some("assert-soft") => {
                let l = parse_lit(cmd.get(1).ok_or("empty assert-soft")?, inst.num_vars)?;
                let mut w = 1i64;
                if let (Some(k), Some(val)) = (cmd.get(2).and_then(Sexp::atom), cmd.get(3).and_then(Sexp::atom)) {
                    if k == ":weight" {
                        w = val.parse().map_err(|_| format!("bad weight {val}"))?;
                    }
                }
                inst.soft.push((w, l));
            }
            Some("set-option" | "check-sat" | "get-model" | "get-objectives" | "set-logic" | "exit") => {}
            other => return Err(format!("unsupported command {other:?}")),
        }
    }
    inst.names = vec![String::new(); inst.num_vars as usize];
    for (v, n) in names {
        if let Some(slot) = inst.names.get_mut(v as usize) {
            *slot = n;
        }
    }
    Ok(inst)
}

/// Reply text in the shape the bridge expects, for a solved instance.
pub fn format_reply(model: Option<&Model>) -> String {
    let Some(m) = model else { return "unsat\n".into() };
    let mut out = String::from("sat\n(model\n");
    for (v, b) in m.assignment.iter().enumerate() {
        let _ = writeln!(out, "  (define-fun v{v} () Bool {b})");
    }
    let _ = write!(out, ")\n(objectives\n  (rank {})\n)\n", m.rank);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_var_one_assert() {
        let inst = WeightedInstance { num_vars: 1, hard: vec![vec![Lit::pos(0)]], soft: vec![], names: vec!["x".into()] };
        let text = emit_smtlib(&inst);
        assert_eq!(text.matches("declare-const").count(), 1);
        assert_eq!(text.matches("(assert ").count(), 1);
        let m = parse_external_model("sat\n(model (define-fun v0 () Bool true))", &inst).unwrap().unwrap();
        assert_eq!(m.assignment, vec![true]);
    }

    #[test]
    fn soft_weight_printed() {
        let inst = WeightedInstance { num_vars: 1, hard: vec![], soft: vec![(1, Lit::pos(0))], names: vec![] };
        let text = emit_smtlib(&inst);
        assert_eq!(text.matches("(assert-soft v0 :weight 1)").count(), 1);
    }

    #[test]
    fn bare_model_list_and_unsat() {
        let inst = WeightedInstance { num_vars: 2, hard: vec![], soft: vec![(2, Lit::neg(1))], names: vec![] };
        let m = parse_external_model("sat\n((define-fun v1 () Bool false))\n", &inst).unwrap().unwrap();
        assert_eq!(m.rank, 2);
        assert_eq!(parse_external_model("unsat\n", &inst).unwrap(), None);
        assert!(parse_external_model("garbage", &inst).is_err());
    }

    #[test]
    fn script_round_trip() {
        let inst = WeightedInstance {
            num_vars: 3,
            hard: vec![vec![Lit::pos(0), Lit::neg(2)], vec![], vec![Lit::neg(1)]],
            soft: vec![(4, Lit::pos(1)), (-2, Lit::pos(2))],
            names: vec!["a".into(), "b".into(), "c".into()],
        };
        let back = parse_script(&emit_smtlib(&inst)).unwrap();
        assert_eq!(back.hard, inst.hard);
        assert_eq!(back.soft, vec![(4, Lit::pos(1)), (2, Lit::neg(2))]);
        assert_eq!(back.names, inst.names);
    }
}
