//! Typed, name-resolved expression IR shared by vcgen, triggers and the
//! engine.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::SourceSpan;
use crate::triggers::TriggerSelection;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    /// Declared sort, possibly generic (`prelude::seq::Seq<int>`).
    Sort { path: String, args: Vec<Type> },
    /// Type parameter of the enclosing generic declaration. Inside a task it
    /// behaves as an abstract sort.
    Param(String),
}

impl Type {
    pub fn is_int(&self) -> bool {
        matches!(self, Type::Int)
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Type::Bool)
    }

    pub fn subst(&self, map: &BTreeMap<String, Type>) -> Type {
        match self {
            Type::Param(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            Type::Sort { path, args } => Type::Sort {
                path: path.clone(),
                args: args.iter().map(|a| a.subst(map)).collect(),
            },
            other => other.clone(),
        }
    }

    /// Every type occurring in `self`, including itself.
    pub fn collect_into(&self, out: &mut std::collections::BTreeSet<Type>) {
        out.insert(self.clone());
        if let Type::Sort { args, .. } = self {
            for a in args {
                a.collect_into(out);
            }
        }
    }

    /// Short display name without module qualification.
    pub fn short(&self) -> String {
        match self {
            Type::Int => "int".into(),
            Type::Bool => "bool".into(),
            Type::Param(p) => p.clone(),
            Type::Sort { path, args } => {
                let name = path.rsplit("::").next().unwrap_or(path);
                if args.is_empty() {
                    name.to_string()
                } else {
                    let a: Vec<_> = args.iter().map(Type::short).collect();
                    format!("{name}<{}>", a.join(", "))
                }
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Bool => write!(f, "bool"),
            Type::Param(p) => write!(f, "{p}"),
            Type::Sort { path, args } => {
                write!(f, "{path}")?;
                if !args.is_empty() {
                    write!(f, "<")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ">")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub id: VarId,
    pub name: String,
}

/// Reference to a function at a ground instantiation. `layer` selects a fuel
/// copy of a recursive spec function; user code always uses layer 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnRef {
    pub path: String,
    pub type_args: Vec<Type>,
    pub layer: u32,
}

impl FnRef {
    pub fn new(path: impl Into<String>, type_args: Vec<Type>) -> Self {
        FnRef {
            path: path.into(),
            type_args,
            layer: 0,
        }
    }

    pub fn short_name(&self) -> &str {
        self.path.rsplit("::").next().unwrap_or(&self.path)
    }

    /// Unique symbol name for this instantiation and fuel layer.
    pub fn mangled(&self) -> String {
        let mut s = self.path.clone();
        if !self.type_args.is_empty() {
            let a: Vec<_> = self.type_args.iter().map(|t| t.to_string()).collect();
            s.push('<');
            s.push_str(&a.join(","));
            s.push('>');
        }
        if self.layer > 0 {
            s.push_str(&format!("@{}", self.layer));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "%",
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, ArithOp::Add | ArithOp::Mul)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Logic {
    And,
    Or,
    Implies,
    Iff,
}

impl Logic {
    pub fn symbol(self) -> &'static str {
        match self {
            Logic::And => "&&",
            Logic::Or => "||",
            Logic::Implies => "==>",
            Logic::Iff => "<==>",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub var: Var,
    pub ty: Type,
    /// Declared as `nat`; the `0 <= x` guard is already part of the body.
    pub nat: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quantifier {
    pub forall: bool,
    pub binders: Vec<Binder>,
    pub all_triggers: bool,
    pub body: TExpr,
    /// Filled in by trigger selection before the quantifier reaches the
    /// engine.
    pub triggers: Option<TriggerSelection>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TExprKind {
    Int(i128),
    Bool(bool),
    Var(Var),
    Call(FnRef, Vec<TExpr>),
    Arith(ArithOp, Box<TExpr>, Box<TExpr>),
    Neg(Box<TExpr>),
    Cmp(CmpOp, Box<TExpr>, Box<TExpr>),
    Eq(Box<TExpr>, Box<TExpr>),
    Not(Box<TExpr>),
    Logic(Logic, Box<TExpr>, Box<TExpr>),
    Ite(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    Quant(Box<Quantifier>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: Type,
    pub span: SourceSpan,
    /// Manual `#[trigger]` mark.
    pub trigger: bool,
}

impl TExpr {
    pub fn new(kind: TExprKind, ty: Type, span: SourceSpan) -> Self {
        TExpr {
            kind,
            ty,
            span,
            trigger: false,
        }
    }

    pub fn int(n: i128, span: SourceSpan) -> Self {
        TExpr::new(TExprKind::Int(n), Type::Int, span)
    }

    pub fn boolean(b: bool, span: SourceSpan) -> Self {
        TExpr::new(TExprKind::Bool(b), Type::Bool, span)
    }

    pub fn var(v: Var, ty: Type, span: SourceSpan) -> Self {
        TExpr::new(TExprKind::Var(v), ty, span)
    }

    pub fn logic(op: Logic, a: TExpr, b: TExpr) -> Self {
        let span = a.span;
        TExpr::new(TExprKind::Logic(op, Box::new(a), Box::new(b)), Type::Bool, span)
    }

    pub fn not(a: TExpr) -> Self {
        let span = a.span;
        TExpr::new(TExprKind::Not(Box::new(a)), Type::Bool, span)
    }

    pub fn eq(a: TExpr, b: TExpr) -> Self {
        let span = a.span;
        TExpr::new(TExprKind::Eq(Box::new(a), Box::new(b)), Type::Bool, span)
    }

    pub fn cmp(op: CmpOp, a: TExpr, b: TExpr) -> Self {
        let span = a.span;
        TExpr::new(TExprKind::Cmp(op, Box::new(a), Box::new(b)), Type::Bool, span)
    }

    /// Conjunction of `items`; `true` when empty.
    pub fn conj(items: Vec<TExpr>, span: SourceSpan) -> TExpr {
        let mut it = items.into_iter();
        match it.next() {
            None => TExpr::boolean(true, span),
            Some(first) => it.fold(first, |acc, e| TExpr::logic(Logic::And, acc, e)),
        }
    }

    pub fn children(&self) -> Vec<&TExpr> {
        match &self.kind {
            TExprKind::Int(_) | TExprKind::Bool(_) | TExprKind::Var(_) => vec![],
            TExprKind::Call(_, args) => args.iter().collect(),
            TExprKind::Arith(_, a, b)
            | TExprKind::Cmp(_, a, b)
            | TExprKind::Eq(a, b)
            | TExprKind::Logic(_, a, b) => vec![a, b],
            TExprKind::Neg(a) | TExprKind::Not(a) => vec![a],
            TExprKind::Ite(c, a, b) => vec![c, a, b],
            TExprKind::Quant(q) => vec![&q.body],
        }
    }

    /// Pre-order traversal, not descending into nested quantifiers when
    /// `into_quants` is false.
    pub fn walk<'a>(&'a self, into_quants: bool, f: &mut dyn FnMut(&'a TExpr)) {
        f(self);
        if let TExprKind::Quant(q) = &self.kind {
            if !into_quants {
                return;
            }
            q.body.walk(into_quants, f);
            return;
        }
        for c in self.children() {
            c.walk(into_quants, f);
        }
    }

    /// Number of nodes; used as the "specificity" of a trigger term.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> std::collections::BTreeSet<VarId> {
        let mut out = std::collections::BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<VarId>, out: &mut std::collections::BTreeSet<VarId>) {
        match &self.kind {
            TExprKind::Var(v) => {
                if !bound.contains(&v.id) {
                    out.insert(v.id);
                }
            }
            TExprKind::Quant(q) => {
                let n = bound.len();
                bound.extend(q.binders.iter().map(|b| b.var.id));
                q.body.free_vars_into(bound, out);
                if let Some(sel) = &q.triggers {
                    for g in &sel.groups {
                        for t in &g.exprs {
                            t.free_vars_into(bound, out);
                        }
                    }
                }
                bound.truncate(n);
            }
            _ => {
                for c in self.children() {
                    c.free_vars_into(bound, out);
                }
            }
        }
    }

    /// Replace free variables. Substituted expressions must not capture
    /// binders; binder ids are globally unique so this holds by construction.
    pub fn subst(&self, map: &BTreeMap<VarId, TExpr>) -> TExpr {
        if map.is_empty() {
            return self.clone();
        }
        let kind = match &self.kind {
            TExprKind::Var(v) => {
                if let Some(e) = map.get(&v.id) {
                    let mut e = e.clone();
                    e.trigger = self.trigger;
                    return e;
                }
                TExprKind::Var(v.clone())
            }
            TExprKind::Int(n) => TExprKind::Int(*n),
            TExprKind::Bool(b) => TExprKind::Bool(*b),
            TExprKind::Call(f, args) => TExprKind::Call(f.clone(), args.iter().map(|a| a.subst(map)).collect()),
            TExprKind::Arith(op, a, b) => TExprKind::Arith(*op, Box::new(a.subst(map)), Box::new(b.subst(map))),
            TExprKind::Neg(a) => TExprKind::Neg(Box::new(a.subst(map))),
            TExprKind::Cmp(op, a, b) => TExprKind::Cmp(*op, Box::new(a.subst(map)), Box::new(b.subst(map))),
            TExprKind::Eq(a, b) => TExprKind::Eq(Box::new(a.subst(map)), Box::new(b.subst(map))),
            TExprKind::Not(a) => TExprKind::Not(Box::new(a.subst(map))),
            TExprKind::Logic(op, a, b) => TExprKind::Logic(*op, Box::new(a.subst(map)), Box::new(b.subst(map))),
            TExprKind::Ite(c, a, b) => TExprKind::Ite(
                Box::new(c.subst(map)),
                Box::new(a.subst(map)),
                Box::new(b.subst(map)),
            ),
            TExprKind::Quant(q) => {
                let mut q2 = (**q).clone();
                q2.body = q.body.subst(map);
                if let Some(sel) = &mut q2.triggers {
                    for g in &mut sel.groups {
                        for t in &mut g.exprs {
                            *t = t.subst(map);
                        }
                    }
                }
                TExprKind::Quant(Box::new(q2))
            }
        };
        TExpr {
            kind,
            ty: self.ty.clone(),
            span: self.span,
            trigger: self.trigger,
        }
    }

    /// Apply a type substitution and rewrite function references to the
    /// resulting ground instantiations.
    pub fn subst_types(&self, map: &BTreeMap<String, Type>) -> TExpr {
        if map.is_empty() {
            return self.clone();
        }
        let mut out = self.clone();
        out.map_types(&mut |t| t.subst(map));
        out
    }

    fn map_types(&mut self, f: &mut dyn FnMut(&Type) -> Type) {
        self.ty = f(&self.ty);
        match &mut self.kind {
            TExprKind::Var(_) | TExprKind::Int(_) | TExprKind::Bool(_) => {}
            TExprKind::Call(fr, args) => {
                fr.type_args = fr.type_args.iter().map(|t| f(t)).collect();
                for a in args {
                    a.map_types(f);
                }
            }
            TExprKind::Arith(_, a, b) | TExprKind::Cmp(_, a, b) | TExprKind::Eq(a, b) | TExprKind::Logic(_, a, b) => {
                a.map_types(f);
                b.map_types(f);
            }
            TExprKind::Neg(a) | TExprKind::Not(a) => a.map_types(f),
            TExprKind::Ite(c, a, b) => {
                c.map_types(f);
                a.map_types(f);
                b.map_types(f);
            }
            TExprKind::Quant(q) => {
                for b in &mut q.binders {
                    b.ty = f(&b.ty);
                }
                q.body.map_types(f);
                if let Some(sel) = &mut q.triggers {
                    for g in &mut sel.groups {
                        for t in &mut g.exprs {
                            t.map_types(f);
                        }
                    }
                }
            }
        }
    }

    /// Visit every function reference, including those in trigger terms.
    pub fn map_calls(&mut self, f: &mut dyn FnMut(&mut FnRef)) {
        match &mut self.kind {
            TExprKind::Var(_) | TExprKind::Int(_) | TExprKind::Bool(_) => {}
            TExprKind::Call(fr, args) => {
                f(fr);
                for a in args {
                    a.map_calls(f);
                }
            }
            TExprKind::Arith(_, a, b) | TExprKind::Cmp(_, a, b) | TExprKind::Eq(a, b) | TExprKind::Logic(_, a, b) => {
                a.map_calls(f);
                b.map_calls(f);
            }
            TExprKind::Neg(a) | TExprKind::Not(a) => a.map_calls(f),
            TExprKind::Ite(c, a, b) => {
                c.map_calls(f);
                a.map_calls(f);
                b.map_calls(f);
            }
            TExprKind::Quant(q) => {
                q.body.map_calls(f);
                if let Some(sel) = &mut q.triggers {
                    for g in &mut sel.groups {
                        for t in &mut g.exprs {
                            t.map_calls(f);
                        }
                    }
                }
            }
        }
    }

    /// Calls reachable in this expression (including nested quantifiers and
    /// selected trigger terms).
    pub fn calls(&self, out: &mut std::collections::BTreeSet<FnRef>) {
        self.walk(true, &mut |e| {
            if let TExprKind::Call(f, _) = &e.kind {
                out.insert(f.clone());
            }
        });
    }

    /// Every type occurring on a node of this expression.
    pub fn types(&self, out: &mut std::collections::BTreeSet<Type>) {
        self.walk(true, &mut |e| {
            e.ty.collect_into(out);
            if let TExprKind::Quant(q) = &e.kind {
                for b in &q.binders {
                    b.ty.collect_into(out);
                }
            }
            if let TExprKind::Call(f, _) = &e.kind {
                for t in &f.type_args {
                    t.collect_into(out);
                }
            }
        });
    }

    pub fn contains_quantifier(&self) -> bool {
        let mut found = false;
        self.walk(true, &mut |e| {
            if matches!(e.kind, TExprKind::Quant(_)) {
                found = true;
            }
        });
        found
    }

    /// Clear `#[trigger]` flags while keeping trigger selections already made
    /// for nested quantifiers.
    pub fn clear_marks(&mut self) {
        self.trigger = false;
        match &mut self.kind {
            TExprKind::Var(_) | TExprKind::Int(_) | TExprKind::Bool(_) => {}
            TExprKind::Call(_, args) => args.iter_mut().for_each(|a| a.clear_marks()),
            TExprKind::Arith(_, a, b) | TExprKind::Cmp(_, a, b) | TExprKind::Eq(a, b) | TExprKind::Logic(_, a, b) => {
                a.clear_marks();
                b.clear_marks();
            }
            TExprKind::Neg(a) | TExprKind::Not(a) => a.clear_marks(),
            TExprKind::Ite(c, a, b) => {
                c.clear_marks();
                a.clear_marks();
                b.clear_marks();
            }
            TExprKind::Quant(q) => q.body.clear_marks(),
        }
    }

    /// Drop every manual `#[trigger]` mark.
    pub fn strip_trigger_marks(&mut self) {
        self.trigger = false;
        match &mut self.kind {
            TExprKind::Var(_) | TExprKind::Int(_) | TExprKind::Bool(_) => {}
            TExprKind::Call(_, args) => args.iter_mut().for_each(|a| a.strip_trigger_marks()),
            TExprKind::Arith(_, a, b) | TExprKind::Cmp(_, a, b) | TExprKind::Eq(a, b) | TExprKind::Logic(_, a, b) => {
                a.strip_trigger_marks();
                b.strip_trigger_marks();
            }
            TExprKind::Neg(a) | TExprKind::Not(a) => a.strip_trigger_marks(),
            TExprKind::Ite(c, a, b) => {
                c.strip_trigger_marks();
                a.strip_trigger_marks();
                b.strip_trigger_marks();
            }
            TExprKind::Quant(q) => {
                q.triggers = None;
                q.body.strip_trigger_marks();
            }
        }
    }
}

impl fmt::Display for TExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(e: &TExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e.kind {
                TExprKind::Int(n) if n >= 0 => write!(f, "{e}"),
                TExprKind::Bool(_) | TExprKind::Var(_) | TExprKind::Call(..) => write!(f, "{e}"),
                _ => write!(f, "({e})"),
            }
        }
        match &self.kind {
            TExprKind::Int(n) => write!(f, "{n}"),
            TExprKind::Bool(b) => write!(f, "{b}"),
            TExprKind::Var(v) => write!(f, "{}", v.name),
            TExprKind::Call(fr, args) => {
                write!(f, "{}", fr.short_name())?;
                if fr.layer > 0 {
                    write!(f, "@{}", fr.layer)?;
                }
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            TExprKind::Arith(op, a, b) => {
                operand(a, f)?;
                write!(f, " {} ", op.symbol())?;
                operand(b, f)
            }
            TExprKind::Neg(a) => {
                write!(f, "-")?;
                operand(a, f)
            }
            TExprKind::Cmp(op, a, b) => {
                operand(a, f)?;
                write!(f, " {} ", op.symbol())?;
                operand(b, f)
            }
            TExprKind::Eq(a, b) => {
                operand(a, f)?;
                write!(f, " == ")?;
                operand(b, f)
            }
            TExprKind::Not(a) => {
                write!(f, "!")?;
                operand(a, f)
            }
            TExprKind::Logic(op, a, b) => {
                operand(a, f)?;
                write!(f, " {} ", op.symbol())?;
                operand(b, f)
            }
            TExprKind::Ite(c, a, b) => write!(f, "if {c} {{ {a} }} else {{ {b} }}"),
            TExprKind::Quant(q) => {
                write!(f, "{}|", if q.forall { "forall" } else { "exists" })?;
                for (i, b) in q.binders.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}: {}", b.var.name, if b.nat { "nat".to_string() } else { b.ty.short() })?;
                }
                write!(f, "| {}", q.body)
            }
        }
    }
}
