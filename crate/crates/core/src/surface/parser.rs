use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SurfaceError;
use std::collections::HashMap;
use std::sync::Arc;

/// Parse a complete metagrammar file.
///
/// Rules must end with `.`; for `import`, `exists`, `start` and directives the
/// trailing `.` is optional. When the program has no imports, every nonterminal
/// reference must name a rule of this file.
pub fn parse_program(source: &str, name: &str) -> Result<SurfaceProgram, SurfaceError> {
    let file: Arc<str> = Arc::from(name);
    let tokens = tokenize(source, &file)?;
    let mut p = Parser { toks: tokens, pos: 0 };
    let prog = p.program(file)?;
    check_duplicates(&prog)?;
    if prog.imports.is_empty() {
        check_references(&prog)?;
    }
    Ok(prog)
}

const KEYWORDS: &[&str] = &[
    "import", "exists", "start", "constraint", "prefer", "emit", "forall", "if", "then", "for",
    "to", "as", "named", "nat",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SurfaceError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(SurfaceError::Syntax {
            span: self.span(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.advance().span)
        } else {
            self.error(what)
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let span = self.advance().span;
                Ok((s, span))
            }
            _ => self.error(what),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Nat(n) => {
                self.advance();
                Ok(n)
            }
            _ => self.error("a natural number"),
        }
    }

    fn program(&mut self, file: Arc<str>) -> PResult<SurfaceProgram> {
        let mut prog = SurfaceProgram {
            name: file,
            imports: Vec::new(),
            existentials: Vec::new(),
            rules: Vec::new(),
            directives: Vec::new(),
            start: None,
        };
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "import" => {
                        self.advance();
                        loop {
                            let (name, span) = self.ident("a library name")?;
                            prog.imports.push(Import { name, span });
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.eat(&Tok::Dot);
                    }
                    "exists" => {
                        let span = self.advance().span;
                        let (name, _) = self.ident("an existential variable name")?;
                        let bound = if self.eat(&Tok::Colon) { self.index_type()? } else { IndexType::Nat };
                        prog.existentials.push(ExistDecl { name, bound, span });
                        self.eat(&Tok::Dot);
                    }
                    "start" => {
                        let span = self.advance().span;
                        let r = self.nonterm_ref()?;
                        if prog.start.is_some() {
                            return Err(SurfaceError::Syntax {
                                span,
                                message: "duplicate start declaration".into(),
                            });
                        }
                        prog.start = Some(r);
                        self.eat(&Tok::Dot);
                    }
                    "constraint" | "prefer" | "emit" | "forall" => {
                        let d = self.directive()?;
                        prog.directives.push(d);
                        self.eat(&Tok::Dot);
                    }
                    _ => {
                        let r = self.rule()?;
                        prog.rules.push(r);
                    }
                },
                _ => return self.error("a rule, directive, or declaration"),
            }
        }
        Ok(prog)
    }

    fn index_type(&mut self) -> PResult<IndexType> {
        if self.eat_kw("nat") {
            return Ok(IndexType::Nat);
        }
        let span = self.span();
        if self.eat(&Tok::LBracket) {
            let lo = self.nat()?;
            self.expect(Tok::Comma, "`,`")?;
            let hi = self.nat()?;
            self.expect(Tok::RBracket, "`]`")?;
            if lo > hi {
                return Err(SurfaceError::Syntax {
                    span,
                    message: format!("empty range [{lo},{hi}]"),
                });
            }
            return Ok(IndexType::Range(lo, hi));
        }
        self.error("`nat` or a range `[lo,hi]`")
    }

    fn binder(&mut self) -> PResult<Binder> {
        let (name, _) = self.ident("a variable name")?;
        let ty = if self.eat(&Tok::Colon) { self.index_type()? } else { IndexType::Nat };
        Ok(Binder { name, ty })
    }

    fn directive(&mut self) -> PResult<Directive> {
        let span = self.span();
        let forall = if self.eat_kw("forall") {
            self.expect(Tok::LParen, "`(`")?;
            let b = self.binder()?;
            self.expect(Tok::RParen, "`)`")?;
            self.eat(&Tok::Colon);
            Some(b)
        } else {
            None
        };
        let kind = if self.eat_kw("constraint") {
            DirectiveKind::Constraint(self.bool_expr()?)
        } else if self.eat_kw("prefer") {
            let neg = self.eat(&Tok::Minus);
            let n = self.nat()?;
            let w = i64::try_from(n).map_err(|_| SurfaceError::Syntax {
                span: span.clone(),
                message: "preference weight out of range".into(),
            })?;
            DirectiveKind::Prefer(if neg { -w } else { w }, self.bool_expr()?)
        } else if self.eat_kw("emit") {
            let mut parts = vec![self.str_part()?];
            while self.eat(&Tok::Plus) {
                parts.push(self.str_part()?);
            }
            if !self.eat_kw("if") {
                return self.error("`if`");
            }
            DirectiveKind::Emit(parts, self.bool_expr()?)
        } else {
            return self.error("`constraint`, `prefer`, or `emit`");
        };
        Ok(Directive { forall, kind, span })
    }

    fn str_part(&mut self) -> PResult<StrPart> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(StrPart::Lit(s))
            }
            Tok::Ident(s) if s == "str" => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.index_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(StrPart::Index(e))
            }
            _ => self.error("a string literal or `str(...)`"),
        }
    }

    fn rule(&mut self) -> PResult<RuleDecl> {
        let (lhs, span) = self.ident("a rule name")?;
        let param = if self.eat(&Tok::LBrace) {
            let b = self.binder()?;
            self.expect(Tok::RBrace, "`}`")?;
            Some(b)
        } else {
            None
        };
        self.expect(Tok::Arrow, "`->`")?;
        let local_existential = if self.eat_kw("exists") {
            let b = self.binder()?;
            self.expect(Tok::Dot, "`.` after a local existential")?;
            Some(b)
        } else {
            None
        };
        let mut body = Vec::new();
        let mut first = true;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.advance();
                    break;
                }
                Tok::Question => {
                    self.advance();
                    let p = self.prod_seq()?;
                    let n = self.item_name()?;
                    body.push(BodyItem::Optional(p, n));
                }
                Tok::Bar => {
                    self.advance();
                    let p = self.prod_seq()?;
                    let n = self.item_name()?;
                    body.push(BodyItem::Mandatory(p, n));
                }
                Tok::LBracket if *self.peek_at(1) == Tok::Question => {
                    body.push(self.comprehension()?);
                }
                _ if first => {
                    let p = self.prod_seq()?;
                    if p.atoms.is_empty() {
                        return self.error("a production, `?`, `|`, or `.`");
                    }
                    let n = self.item_name()?;
                    body.push(BodyItem::Mandatory(p, n));
                }
                _ => return self.error("`?`, `|`, or `.`"),
            }
            first = false;
        }
        Ok(RuleDecl { lhs, param, local_existential, body, span })
    }

    fn item_name(&mut self) -> PResult<Option<ItemName>> {
        if self.eat_kw("as") || self.eat_kw("named") {
            let (name, span) = self.ident("a production name")?;
            let index = if self.eat(&Tok::LBrace) {
                let (v, _) = self.ident("the rule's index variable")?;
                self.expect(Tok::RBrace, "`}`")?;
                Some(v)
            } else {
                None
            };
            Ok(Some(ItemName { name, index, span }))
        } else {
            Ok(None)
        }
    }

    fn comprehension(&mut self) -> PResult<BodyItem> {
        let span = self.expect(Tok::LBracket, "`[`")?;
        self.expect(Tok::Question, "`?`")?;
        let template = self.prod_seq()?;
        if !self.eat_kw("for") {
            return self.error("`for`");
        }
        let (binder, _) = self.ident("a comprehension variable")?;
        self.expect(Tok::Eq, "`=`")?;
        let lo = self.index_expr()?;
        if !self.eat_kw("to") {
            return self.error("`to`");
        }
        let hi = self.index_expr()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(BodyItem::Comprehension { binder, lo, hi, template, span })
    }

    /// A sequence of atoms, up to the next item marker or closing token.
    fn prod_seq(&mut self) -> PResult<ProdExpr> {
        let span = self.span();
        let mut atoms = Vec::new();
        loop {
            let atom = match self.peek().clone() {
                Tok::Str(s) => {
                    self.advance();
                    Atom::Terminal(s)
                }
                Tok::LBracket if matches!(self.peek_at(1), Tok::Str(_)) => self.char_range()?,
                Tok::LParen => {
                    self.advance();
                    let mut alts = vec![self.prod_seq()?];
                    while self.eat(&Tok::Bar) {
                        alts.push(self.prod_seq()?);
                    }
                    self.expect(Tok::RParen, "`)` or `|`")?;
                    Atom::Group(alts)
                }
                Tok::Ident(s) if s == "if" => {
                    self.advance();
                    let b = self.bool_expr()?;
                    if !self.eat_kw("then") {
                        return self.error("`then`");
                    }
                    let rest = self.prod_seq()?;
                    atoms.push(Atom::Guard(b, Box::new(rest)));
                    break;
                }
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Atom::Nonterm(self.nonterm_ref()?),
                _ => break,
            };
            let mut atom = atom;
            while self.eat(&Tok::Star) {
                let inner = ProdExpr { atoms: vec![atom], span: span.clone() };
                atom = Atom::Star(Box::new(inner));
            }
            atoms.push(atom);
        }
        Ok(ProdExpr { atoms, span })
    }

    fn char_range(&mut self) -> PResult<Atom> {
        let span = self.expect(Tok::LBracket, "`[`")?;
        let lo = self.single_char()?;
        let hi = if self.eat(&Tok::Minus) { self.single_char()? } else { lo };
        self.expect(Tok::RBracket, "`]`")?;
        if lo > hi {
            return Err(SurfaceError::Syntax {
                span,
                message: format!("character range {lo:?}-{hi:?} is empty"),
            });
        }
        Ok(Atom::CharRange(lo, hi))
    }

    fn single_char(&mut self) -> PResult<char> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Str(s) => {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => {
                        self.advance();
                        Ok(c)
                    }
                    _ => Err(SurfaceError::Syntax {
                        span,
                        message: format!("character range bound {s:?} must be a single character"),
                    }),
                }
            }
            _ => self.error("a one-character string"),
        }
    }

    fn nonterm_ref(&mut self) -> PResult<NontermRef> {
        let (name, span) = self.ident("a nonterminal")?;
        let index = if self.eat(&Tok::LBrace) {
            let e = self.index_expr()?;
            self.expect(Tok::RBrace, "`}`")?;
            Some(e)
        } else {
            None
        };
        Ok(NontermRef { name, index, span })
    }

    fn index_expr(&mut self) -> PResult<IndexExpr> {
        let span = self.span();
        let base = match self.peek().clone() {
            Tok::Nat(n) => {
                self.advance();
                IndexExpr::Nat(n)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                IndexExpr::Var(s)
            }
            _ => return self.error("an index expression"),
        };
        let mut e = base;
        while *self.peek() == Tok::Minus && matches!(self.peek_at(1), Tok::Nat(_)) {
            self.advance();
            let n = self.nat()?;
            e = match e {
                IndexExpr::Nat(m) => match m.checked_sub(n) {
                    Some(v) => IndexExpr::Nat(v),
                    None => {
                        return Err(SurfaceError::Syntax {
                            span,
                            message: format!("index expression {m} - {n} is negative"),
                        })
                    }
                },
                IndexExpr::Var(v) if n == 0 => IndexExpr::Var(v),
                IndexExpr::Var(v) => IndexExpr::Minus(v, n),
                IndexExpr::Minus(v, m) => IndexExpr::Minus(v, m + n),
            };
        }
        Ok(e)
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        };
        self.advance();
        Some(op)
    }

    fn bool_expr(&mut self) -> PResult<BoolExpr> {
        let lhs = self.bool_or()?;
        if self.eat(&Tok::FatArrow) {
            let rhs = self.bool_expr()?;
            return Ok(BoolExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn bool_or(&mut self) -> PResult<BoolExpr> {
        let mut e = self.bool_xor()?;
        while self.eat(&Tok::BarBar) || self.eat_kw("OR") {
            let r = self.bool_xor()?;
            e = BoolExpr::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn bool_xor(&mut self) -> PResult<BoolExpr> {
        let mut e = self.bool_and()?;
        while self.eat_kw("XOR") {
            let r = self.bool_and()?;
            e = BoolExpr::Xor(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn bool_and(&mut self) -> PResult<BoolExpr> {
        let mut e = self.bool_not()?;
        while self.eat(&Tok::AmpAmp) || self.eat_kw("AND") {
            let r = self.bool_not()?;
            e = BoolExpr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn bool_not(&mut self) -> PResult<BoolExpr> {
        if self.eat(&Tok::Bang) || self.eat_kw("NOT") {
            return Ok(BoolExpr::Not(Box::new(self.bool_not()?)));
        }
        self.bool_primary()
    }

    fn bool_primary(&mut self) -> PResult<BoolExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(BoolExpr::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(BoolExpr::False)
            }
            Tok::LParen => {
                self.advance();
                let e = self.bool_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Bar => {
                self.advance();
                match self.peek() {
                    Tok::Ident(s) if s.eq_ignore_ascii_case("productions") || s.eq_ignore_ascii_case("production") => {
                        self.advance();
                    }
                    _ => return self.error("`productions`"),
                }
                self.expect(Tok::LParen, "`(`")?;
                let r = self.nonterm_ref()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Bar, "`|`")?;
                let Some(op) = self.cmp_op() else {
                    return self.error("a comparison operator");
                };
                let rhs = self.index_expr()?;
                Ok(BoolExpr::Count(r, op, rhs))
            }
            Tok::Nat(_) => {
                let l = self.index_expr()?;
                let Some(op) = self.cmp_op() else {
                    return self.error("a comparison operator");
                };
                let r = self.index_expr()?;
                Ok(BoolExpr::Cmp(l, op, r, span))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let is_cmp = matches!(
                    self.peek_at(1),
                    Tok::Eq | Tok::Ne | Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge | Tok::Minus
                );
                if is_cmp {
                    let l = self.index_expr()?;
                    let Some(op) = self.cmp_op() else {
                        return self.error("a comparison operator");
                    };
                    let r = self.index_expr()?;
                    Ok(BoolExpr::Cmp(l, op, r, span))
                } else {
                    Ok(BoolExpr::Indicator(self.nonterm_ref()?))
                }
            }
            _ => self.error("a boolean expression"),
        }
    }
}

fn check_duplicates(prog: &SurfaceProgram) -> PResult<()> {
    let mut seen: HashMap<&str, &SourceSpan> = HashMap::new();
    for r in &prog.rules {
        if let Some(first) = seen.insert(&r.lhs, &r.span) {
            return Err(SurfaceError::DuplicateName {
                name: r.lhs.clone(),
                span: r.span.clone(),
                first: first.clone(),
            });
        }
    }
    for r in &prog.rules {
        for item in &r.body {
            if let BodyItem::Optional(_, Some(n)) | BodyItem::Mandatory(_, Some(n)) = item {
                if let Some(first) = seen.insert(&n.name, &n.span) {
                    return Err(SurfaceError::DuplicateName {
                        name: n.name.clone(),
                        span: n.span.clone(),
                        first: first.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn check_references(prog: &SurfaceProgram) -> PResult<()> {
    let mut missing = None;
    super::visit_nonterm_refs(prog, &mut |r| {
        if missing.is_none() && prog.rule(&r.name).is_none() {
            missing = Some(r.clone());
        }
    });
    if let Some(start) = &prog.start {
        if missing.is_none() && prog.rule(&start.name).is_none() {
            missing = Some(start.clone());
        }
    }
    match missing {
        Some(r) => Err(SurfaceError::Name { name: r.name, span: r.span }),
        None => Ok(()),
    }
}
