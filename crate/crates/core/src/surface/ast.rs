//! Syntax tree of a metagrammar source file.

use std::fmt;
use std::sync::Arc;

/// Position of a syntax node in its source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in Unicode scalars.
    pub column: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<Arc<str>>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan { file: file.into(), line, column }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Domain of an index parameter or existential variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexType {
    /// Unbounded naturals; bounded only by the instantiation depth.
    Nat,
    /// Inclusive range.
    Range(u64, u64),
}

impl IndexType {
    pub fn is_bounded(&self) -> bool {
        matches!(self, IndexType::Range(..))
    }

    /// Values of this type that are below `depth`.
    pub fn values(&self, depth: u64) -> std::ops::Range<u64> {
        match *self {
            IndexType::Nat => 0..depth,
            IndexType::Range(lo, hi) => lo.min(depth)..(hi + 1).min(depth),
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        match *self {
            IndexType::Nat => true,
            IndexType::Range(lo, hi) => lo <= v && v <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexExpr {
    Nat(u64),
    Var(String),
    /// `var - n`, with `n >= 1`.
    Minus(String, u64),
}

impl IndexExpr {
    pub fn var(&self) -> Option<&str> {
        match self {
            IndexExpr::Nat(_) => None,
            IndexExpr::Var(v) | IndexExpr::Minus(v, _) => Some(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }
}

/// A reference to a nonterminal, possibly indexed: `Row{len-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NontermRef {
    pub name: String,
    pub index: Option<IndexExpr>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    True,
    False,
    Cmp(IndexExpr, CmpOp, IndexExpr, SourceSpan),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
    /// A named candidate production, true iff it is included.
    Indicator(NontermRef),
    /// `|productions(N)| op e`
    Count(NontermRef, CmpOp, IndexExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// A literal string; may be empty (epsilon).
    Terminal(String),
    /// An inclusive range of Unicode scalars.
    CharRange(char, char),
    Nonterm(NontermRef),
    Star(Box<ProdExpr>),
    Group(Vec<ProdExpr>),
    /// `if b then p`; the production extends to the end of the enclosing sequence.
    Guard(BoolExpr, Box<ProdExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProdExpr {
    pub atoms: Vec<Atom>,
    pub span: SourceSpan,
}

/// A name given to a body item with `as`/`named`, optionally indexed by the rule parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemName {
    pub name: String,
    pub index: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyItem {
    /// `| p`: always included (subject to its guard).
    Mandatory(ProdExpr, Option<ItemName>),
    /// `? p`: a candidate production.
    Optional(ProdExpr, Option<ItemName>),
    /// `[? p for v = lo to hi]`
    Comprehension {
        binder: String,
        lo: IndexExpr,
        hi: IndexExpr,
        template: ProdExpr,
        span: SourceSpan,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    pub name: String,
    pub ty: IndexType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDecl {
    pub lhs: String,
    pub param: Option<Binder>,
    pub local_existential: Option<Binder>,
    pub body: Vec<BodyItem>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistDecl {
    pub name: String,
    pub bound: IndexType,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrPart {
    Lit(String),
    /// `str(e)`
    Index(IndexExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DirectiveKind {
    Constraint(BoolExpr),
    Prefer(i64, BoolExpr),
    Emit(Vec<StrPart>, BoolExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Directive {
    pub forall: Option<Binder>,
    pub kind: DirectiveKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub name: Arc<str>,
    pub imports: Vec<Import>,
    pub existentials: Vec<ExistDecl>,
    pub rules: Vec<RuleDecl>,
    pub directives: Vec<Directive>,
    /// `None` only for library files, which have no start declaration.
    pub start: Option<NontermRef>,
}

impl SurfaceProgram {
    pub fn rule(&self, name: &str) -> Option<&RuleDecl> {
        self.rules.iter().find(|r| r.lhs == name)
    }
}
