//! Plain-text form of a concrete grammar.
//!
//! ```text
//! Date -> Month Sep Day Sep Year .
//! Sep -> "/" .
//! Digit -> ["0"-"9"] .
//! Empty -> "" .
//! start Date
//! ```
//!
//! One production per line, ended by ` .`; `""` alone is the empty
//! right-hand side. Sets list inclusive ranges separated by commas.

use metagram_core::grammar::{CSym, ConcreteGrammar};
use std::collections::BTreeMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct GrammarTextError {
    pub line: usize,
    pub message: String,
}

pub fn serialize(g: &ConcreteGrammar) -> String {
    let mut out = String::new();
    for p in &g.productions {
        out.push_str(&p.lhs);
        out.push_str(" ->");
        if p.rhs.is_empty() {
            out.push_str(" \"\"");
        }
        for s in &p.rhs {
            out.push(' ');
            match s {
                CSym::N(n) => out.push_str(n),
                CSym::Lit(l) => quote(l, &mut out),
                CSym::Set(ranges) => {
                    out.push('[');
                    for (i, (lo, hi)) in ranges.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        quote(&lo.to_string(), &mut out);
                        out.push('-');
                        quote(&hi.to_string(), &mut out);
                    }
                    out.push(']');
                }
            }
        }
        out.push_str(" .\n");
    }
    let _ = writeln!(out, "start {}", g.start);
    out
}

fn quote(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

pub fn parse(text: &str) -> Result<ConcreteGrammar, GrammarTextError> {
    let mut rules = Vec::new();
    let mut start = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| GrammarTextError { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        if start.is_some() {
            return Err(err("nothing may follow the start line".into()));
        }
        let mut cur = Cursor { chars: trimmed.chars().collect(), pos: 0 };
        let head = cur.ident().ok_or_else(|| err("expected a nonterminal".into()))?;
        cur.skip_ws();
        if head == "start" && !cur.peek_str("->") {
            let s = cur.ident().ok_or_else(|| err("expected the start nonterminal".into()))?;
            cur.skip_ws();
            if !cur.at_end() {
                return Err(err("unexpected text after the start symbol".into()));
            }
            start = Some(s);
            continue;
        }
        if !cur.eat_str("->") {
            return Err(err("expected `->`".into()));
        }
        let mut rhs = Vec::new();
        loop {
            cur.skip_ws();
            match cur.peek() {
                None => return Err(err("missing final ` .`".into())),
                Some('.') => {
                    cur.pos += 1;
                    cur.skip_ws();
                    if !cur.at_end() {
                        return Err(err("unexpected text after ` .`".into()));
                    }
                    break;
                }
                Some('"') => {
                    let s = cur.string().map_err(err)?;
                    if !s.is_empty() {
                        rhs.push(CSym::Lit(s));
                    }
                }
                Some('[') => {
                    cur.pos += 1;
                    let mut ranges = Vec::new();
                    loop {
                        cur.skip_ws();
                        let lo = cur.single_char().map_err(err)?;
                        cur.skip_ws();
                        if !cur.eat_str("-") {
                            return Err(err("expected `-` in a character range".into()));
                        }
                        cur.skip_ws();
                        let hi = cur.single_char().map_err(err)?;
                        if lo > hi {
                            return Err(err(format!("empty range {lo:?}-{hi:?}")));
                        }
                        ranges.push((lo, hi));
                        cur.skip_ws();
                        if cur.eat_str(",") {
                            continue;
                        }
                        if cur.eat_str("]") {
                            break;
                        }
                        return Err(err("expected `,` or `]`".into()));
                    }
                    rhs.push(CSym::Set(ranges));
                }
                Some(_) => {
                    let n = cur.ident().ok_or_else(|| err(format!("unexpected character {:?}", cur.peek().unwrap())))?;
                    rhs.push(CSym::N(n));
                }
            }
        }
        rules.push((head, rhs));
    }
    let start = start.ok_or(GrammarTextError { line: text.lines().count(), message: "missing `start` line".into() })?;
    Ok(ConcreteGrammar::from_rules(&start, rules))
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek_str(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let ok = self.peek_str(s);
        if ok {
            self.pos += s.chars().count();
        }
        ok
    }

    fn ident(&mut self) -> Option<String> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '#' => {}
            _ => return None,
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '#') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn string(&mut self) -> Result<String, String> {
        if !self.eat_str("\"") {
            return Err("expected a quoted string".into());
        }
        let mut s = String::new();
        loop {
            let c = self.peek().ok_or("unterminated string")?;
            self.pos += 1;
            match c {
                '"' => return Ok(s),
                '\\' => {
                    let e = self.peek().ok_or("unterminated escape")?;
                    self.pos += 1;
                    match e {
                        '"' => s.push('"'),
                        '\\' => s.push('\\'),
                        'n' => s.push('\n'),
                        't' => s.push('\t'),
                        'r' => s.push('\r'),
                        'u' => {
                            if !self.eat_str("{") {
                                return Err("expected `{` after \\u".into());
                            }
                            let from = self.pos;
                            while self.peek().is_some_and(|c| c != '}') {
                                self.pos += 1;
                            }
                            let hex: String = self.chars[from..self.pos].iter().collect();
                            if !self.eat_str("}") {
                                return Err("unterminated \\u escape".into());
                            }
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or(format!("bad escape \\u{{{hex}}}"))?;
                            s.push(ch);
                        }
                        other => return Err(format!("unknown escape \\{other}")),
                    }
                }
                c => s.push(c),
            }
        }
    }

    fn single_char(&mut self) -> Result<char, String> {
        let s = self.string()?;
        let mut it = s.chars();
        match (it.next(), it.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(format!("range bound {s:?} must be exactly one character")),
        }
    }
}

/// Production multiset plus start symbol, for comparing grammars up to
/// ordering.
pub fn shape(g: &ConcreteGrammar) -> (String, BTreeMap<(String, Vec<CSym>), usize>) {
    let mut m = BTreeMap::new();
    for p in &g.productions {
        *m.entry((p.lhs.clone(), p.rhs.clone())).or_insert(0) += 1;
    }
    (g.start.clone(), m)
}

pub fn isomorphic(a: &ConcreteGrammar, b: &ConcreteGrammar) -> bool {
    shape(a) == shape(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DATES: &str = "\
Date -> Month Sep Day Sep Year .
Sep -> \"/\" .
Digit -> [\"0\"-\"9\"] .
Year -> Digit Digit .
Month -> Digit .
Month -> \"0\" Digit .
Month -> \"10\" .
Month -> \"11\" .
Month -> \"12\" .
Day -> [\"1\"-\"9\"] .
Day -> \"0\" [\"1\"-\"9\"] .
Day -> [\"1\"-\"2\"] Digit .
Day -> \"30\" .
Day -> \"31\" .
start Date
";

    #[test]
    fn dates_round_trip() {
        let g = parse(DATES).unwrap();
        assert_eq!(g.productions.len(), 14);
        assert_eq!(serialize(&g), DATES);
    }

    #[test]
    fn escapes_and_epsilon() {
        let g = ConcreteGrammar::from_rules(
            "S",
            vec![
                ("S".into(), vec![]),
                ("S".into(), vec![CSym::Lit("a\"b\\c\n\t\u{1}".into()), CSym::N("T#0".into())]),
                ("T#0".into(), vec![CSym::Set(vec![('"', '"'), ('a', 'z')])]),
            ],
        );
        let text = serialize(&g);
        assert!(isomorphic(&parse(&text).unwrap(), &g), "{text}");
    }

    #[test]
    fn malformed() {
        for bad in ["", "S -> \"a\"\nstart S", "S -> [\"ab\"-\"c\"] .\nstart S", "start S\nS -> \"a\" .", "S => \"a\" .\nstart S"] {
            assert!(parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn a_nonterminal_called_start() {
        let g = parse("start -> \"x\" .\nstart start\n").unwrap();
        assert_eq!(g.start, "start");
        assert_eq!(g.productions.len(), 1);
    }
}
