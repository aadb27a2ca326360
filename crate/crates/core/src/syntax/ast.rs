//! Surface syntax tree. Method-call sugar and chained comparisons are already
//! desugared by the parser, so `a.push(3).contains(3)` is stored as
//! `contains(push(a, 3), 3)`.

use std::path::PathBuf;

use super::span::{FileId, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub struct ProgramAst {
    pub file: FileId,
    pub path: PathBuf,
    /// `module a::b;` header, if present.
    pub module: Option<PathRef>,
    pub decls: Vec<Declaration>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathRef {
    pub segments: Vec<String>,
    pub span: SourceSpan,
}

impl PathRef {
    pub fn joined(&self) -> String {
        self.segments.join("::")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeExpr {
    pub name: PathRef,
    pub args: Vec<TypeExpr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub span: SourceSpan,
}

impl Declaration {
    pub fn name(&self) -> Option<&Ident> {
        match &self.kind {
            DeclKind::SpecFn(f) => Some(&f.name),
            DeclKind::ProofFn(f) | DeclKind::AxiomFn(f) => Some(&f.name),
            DeclKind::BroadcastGroup { name, .. } => Some(name),
            DeclKind::SortDecl { name, .. } => Some(name),
            DeclKind::ConstDecl { name, .. } => Some(name),
            DeclKind::BroadcastUse(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclKind {
    SpecFn(SpecFn),
    ProofFn(ProofFn),
    /// Trusted, bodiless lemma. Shares the `ProofFn` shape with `body` empty.
    AxiomFn(ProofFn),
    BroadcastGroup { name: Ident, members: Vec<PathRef> },
    BroadcastUse(Vec<PathRef>),
    SortDecl { name: Ident, params: Vec<Ident> },
    ConstDecl { name: Ident, ty: TypeExpr, value: Option<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecFn {
    pub name: Ident,
    pub type_params: Vec<Ident>,
    pub params: Vec<Param>,
    pub ret: TypeExpr,
    /// `None` for an uninterpreted function.
    pub body: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofFn {
    pub name: Ident,
    pub broadcast: bool,
    pub type_params: Vec<Ident>,
    pub params: Vec<Param>,
    pub requires: Vec<Expr>,
    pub ensures: Vec<Expr>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Iff => "<==>",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
    /// Set by a `#[trigger]` prefix.
    pub trigger: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(i128),
    Bool(bool),
    Var(String),
    Call { func: PathRef, args: Vec<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
    Forall { binders: Vec<Binder>, all_triggers: bool, body: Box<Expr> },
    Exists { binders: Vec<Binder>, body: Box<Expr> },
    If { cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assert(Expr),
    AssertBy(Expr, Vec<Stmt>),
    Let { name: Ident, ty: Option<TypeExpr>, value: Expr },
    LemmaCall { func: PathRef, args: Vec<Expr> },
    BroadcastUse(Vec<PathRef>),
}

impl StmtKind {
    pub fn is_assert(&self) -> bool {
        matches!(self, StmtKind::Assert(_) | StmtKind::AssertBy(..))
    }
}
