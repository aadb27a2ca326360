//! Name resolution, type checking, the broadcast registry and task ordering.

mod order;
mod registry;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use indexmap::IndexMap;
use petgraph::graph::DiGraph;

use crate::ir::*;
use crate::syntax::ast::{self, BinOp, DeclKind, ExprKind, ProgramAst, StmtKind, UnOp};
use crate::syntax::SourceSpan;

pub use order::{order_tasks, CycleError, Task, TaskOrder};
pub use registry::{BroadcastRegistry, FactId, ImportedFact};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolveErrorKind {
    Unresolved,
    Arity,
    TypeMismatch,
    Duplicate,
    NotBroadcastable,
    CyclicGroup,
    RecursiveLemma,
    Misplaced,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ResolveError {
    pub kind: ResolveErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ResolveError {
    fn new(kind: ResolveErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ResolveError {
            kind,
            span,
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ResolveError>;

#[derive(Clone, Debug)]
pub struct Module {
    pub path: String,
    pub file: PathBuf,
    pub prelude: bool,
    /// Module-level `broadcast use` items, in source order.
    pub uses: Vec<UseItem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UseKind {
    Fact,
    Group,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UseItem {
    pub path: String,
    pub kind: UseKind,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub struct SortDef {
    pub path: String,
    pub params: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ParamDef {
    pub var: Var,
    pub ty: Type,
    pub nat: bool,
}

impl ParamDef {
    pub fn expr(&self, span: SourceSpan) -> TExpr {
        TExpr::var(self.var.clone(), self.ty.clone(), span)
    }
}

#[derive(Clone, Debug)]
pub enum TStmt {
    Assert { expr: TExpr, span: SourceSpan },
    AssertBy { expr: TExpr, body: Vec<TStmt>, span: SourceSpan },
    Let { var: Var, ty: Type, value: TExpr, span: SourceSpan },
    LemmaCall { callee: FnRef, args: Vec<TExpr>, span: SourceSpan },
    BroadcastUse { items: Vec<UseItem>, span: SourceSpan },
}

impl TStmt {
    pub fn span(&self) -> SourceSpan {
        match self {
            TStmt::Assert { span, .. }
            | TStmt::AssertBy { span, .. }
            | TStmt::Let { span, .. }
            | TStmt::LemmaCall { span, .. }
            | TStmt::BroadcastUse { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug)]
pub enum FnKind {
    /// `body == None` is an uninterpreted function.
    Spec { body: Option<TExpr> },
    Proof { broadcast: bool, body: Vec<TStmt> },
    Axiom { broadcast: bool },
    Const { value: Option<TExpr> },
}

#[derive(Clone, Debug)]
pub struct FnDef {
    pub path: String,
    pub name: String,
    pub module: usize,
    pub kind: FnKind,
    pub type_params: Vec<String>,
    pub params: Vec<ParamDef>,
    pub ret: Type,
    pub ret_nat: bool,
    pub requires: Vec<TExpr>,
    pub ensures: Vec<TExpr>,
    pub span: SourceSpan,
    /// Position in declaration order across all inputs.
    pub order: usize,
}

impl FnDef {
    pub fn is_broadcast(&self) -> bool {
        matches!(
            self.kind,
            FnKind::Proof { broadcast: true, .. } | FnKind::Axiom { broadcast: true }
        )
    }

    pub fn is_lemma(&self) -> bool {
        matches!(self.kind, FnKind::Proof { .. } | FnKind::Axiom { .. })
    }

    pub fn is_proof(&self) -> bool {
        matches!(self.kind, FnKind::Proof { .. })
    }

    pub fn body(&self) -> &[TStmt] {
        match &self.kind {
            FnKind::Proof { body, .. } => body,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupDef {
    pub path: String,
    pub module: usize,
    pub members: Vec<UseItem>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub modules: Vec<Module>,
    pub sorts: IndexMap<String, SortDef>,
    pub fns: IndexMap<String, FnDef>,
    pub groups: IndexMap<String, GroupDef>,
    pub registry: BroadcastRegistry,
}

impl Program {
    pub fn fn_def(&self, path: &str) -> Option<&FnDef> {
        self.fns.get(path)
    }

    pub fn is_prelude_fn(&self, f: &FnDef) -> bool {
        self.modules[f.module].prelude
    }

    /// Proof functions (verification tasks) in declaration order.
    pub fn proof_fns(&self) -> impl Iterator<Item = &FnDef> {
        self.fns.values().filter(|f| f.is_proof())
    }
}

pub fn is_prelude_module(path: &str) -> bool {
    path == "prelude" || path.starts_with("prelude::")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ItemKind {
    Sort,
    Fn,
    Group,
}

struct Resolver<'a> {
    asts: &'a [ProgramAst],
    module_of_ast: Vec<usize>,
    modules: Vec<Module>,
    items: IndexMap<String, (ItemKind, usize, usize)>,
    prelude_modules: Vec<String>,
    sorts: IndexMap<String, SortDef>,
    fns: IndexMap<String, FnDef>,
    groups: IndexMap<String, GroupDef>,
    next_var: u32,
}

/// Resolve a set of parsed modules into a checked [`Program`]. Prelude
/// modules (path `prelude` or `prelude::*`) must be passed alongside user
/// modules; they are resolved like any other module.
pub fn resolve_program(asts: &[ProgramAst]) -> Result<Program> {
    let mut r = Resolver {
        asts,
        module_of_ast: Vec::new(),
        modules: Vec::new(),
        items: IndexMap::new(),
        prelude_modules: Vec::new(),
        sorts: IndexMap::new(),
        fns: IndexMap::new(),
        groups: IndexMap::new(),
        next_var: 0,
    };
    r.collect_items()?;
    r.resolve_sorts()?;
    r.resolve_signatures()?;
    r.resolve_bodies()?;
    r.resolve_groups_and_uses()?;
    r.check_lemma_recursion()?;
    let registry = BroadcastRegistry::build(&r.fns, &r.groups)?;
    Ok(Program {
        modules: r.modules,
        sorts: r.sorts,
        fns: r.fns,
        groups: r.groups,
        registry,
    })
}

#[derive(Clone)]
struct ExprCx<'t> {
    module: usize,
    type_params: &'t [String],
    scope: Vec<(String, Var, Type)>,
    quant_depth: usize,
    /// `#[trigger]` marks are allowed outside quantifiers (broadcast specs).
    marks_allowed: bool,
}

impl<'t> ExprCx<'t> {
    fn lookup(&self, name: &str) -> Option<(Var, Type)> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .map(|(_, v, t)| (v.clone(), t.clone()))
    }
}

impl<'a> Resolver<'a> {
    fn fresh_var(&mut self, name: &str) -> Var {
        let id = VarId(self.next_var);
        self.next_var += 1;
        Var {
            id,
            name: name.to_string(),
        }
    }

    fn collect_items(&mut self) -> Result<()> {
        for ast in self.asts {
            let path = match &ast.module {
                Some(m) => m.joined(),
                None => ast
                    .path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| "main".to_string()),
            };
            let idx = match self.modules.iter().position(|m| m.path == path) {
                Some(i) => i,
                None => {
                    let prelude = is_prelude_module(&path);
                    if prelude {
                        self.prelude_modules.push(path.clone());
                    }
                    self.modules.push(Module {
                        path: path.clone(),
                        file: ast.path.clone(),
                        prelude,
                        uses: Vec::new(),
                    });
                    self.modules.len() - 1
                }
            };
            self.module_of_ast.push(idx);
        }
        for (ai, ast) in self.asts.iter().enumerate() {
            let mpath = self.modules[self.module_of_ast[ai]].path.clone();
            for (di, decl) in ast.decls.iter().enumerate() {
                let Some(name) = decl.name() else { continue };
                let kind = match decl.kind {
                    DeclKind::SortDecl { .. } => ItemKind::Sort,
                    DeclKind::BroadcastGroup { .. } => ItemKind::Group,
                    _ => ItemKind::Fn,
                };
                if matches!(name.name.as_str(), "int" | "nat" | "bool") {
                    return Err(ResolveError::new(
                        ResolveErrorKind::Duplicate,
                        name.span,
                        format!("`{}` is a builtin type", name.name),
                    ));
                }
                let full = format!("{mpath}::{}", name.name);
                if self.items.contains_key(&full) {
                    return Err(ResolveError::new(
                        ResolveErrorKind::Duplicate,
                        name.span,
                        format!("duplicate definition of `{full}`"),
                    ));
                }
                self.items.insert(full, (kind, ai, di));
            }
        }
        Ok(())
    }

    /// Candidate fully qualified paths for a reference written in `module`.
    fn candidates(&self, module: usize, segs: &[String], kind: ItemKind) -> Vec<String> {
        let joined = segs.join("::");
        let is_kind = |p: &str| matches!(self.items.get(p), Some((k, _, _)) if *k == kind);
        if segs.len() > 1 && is_kind(&joined) {
            return vec![joined];
        }
        let rel = format!("{}::{joined}", self.modules[module].path);
        if is_kind(&rel) {
            return vec![rel];
        }
        let mut out: Vec<String> = self
            .prelude_modules
            .iter()
            .map(|pm| format!("{pm}::{joined}"))
            .filter(|p| is_kind(p))
            .collect();
        out.dedup();
        out
    }

    fn resolve_sorts(&mut self) -> Result<()> {
        for (path, &(kind, ai, di)) in &self.items {
            if kind != ItemKind::Sort {
                continue;
            }
            let DeclKind::SortDecl { params, .. } = &self.asts[ai].decls[di].kind else {
                unreachable!()
            };
            self.sorts.insert(
                path.clone(),
                SortDef {
                    path: path.clone(),
                    params: params.iter().map(|p| p.name.clone()).collect(),
                },
            );
        }
        Ok(())
    }

    fn resolve_type(&self, t: &ast::TypeExpr, module: usize, tparams: &[String]) -> Result<(Type, bool)> {
        let segs = &t.name.segments;
        let no_args = |ty: Type, nat: bool| {
            if t.args.is_empty() {
                Ok((ty, nat))
            } else {
                Err(ResolveError::new(
                    ResolveErrorKind::Arity,
                    t.name.span,
                    format!("type `{}` takes no arguments", t.name.joined()),
                ))
            }
        };
        if segs.len() == 1 {
            match segs[0].as_str() {
                "int" => return no_args(Type::Int, false),
                "nat" => return no_args(Type::Int, true),
                "bool" => return no_args(Type::Bool, false),
                name if tparams.iter().any(|p| p == name) => return no_args(Type::Param(name.to_string()), false),
                _ => {}
            }
        }
        let cands = self.candidates(module, segs, ItemKind::Sort);
        let path = match cands.as_slice() {
            [p] => p.clone(),
            [] => {
                return Err(ResolveError::new(
                    ResolveErrorKind::Unresolved,
                    t.name.span,
                    format!("unresolved type `{}`", t.name.joined()),
                ))
            }
            _ => {
                return Err(ResolveError::new(
                    ResolveErrorKind::Unresolved,
                    t.name.span,
                    format!("ambiguous type `{}`: {}", t.name.joined(), cands.join(", ")),
                ))
            }
        };
        let def = &self.sorts[&path];
        if def.params.len() != t.args.len() {
            return Err(ResolveError::new(
                ResolveErrorKind::Arity,
                t.name.span,
                format!(
                    "type `{}` expects {} type argument(s), found {}",
                    path,
                    def.params.len(),
                    t.args.len()
                ),
            ));
        }
        let args = t
            .args
            .iter()
            .map(|a| self.resolve_type(a, module, tparams).map(|(ty, _)| ty))
            .collect::<Result<Vec<_>>>()?;
        Ok((Type::Sort { path, args }, false))
    }

    fn resolve_params(&mut self, params: &[ast::Param], module: usize, tparams: &[String]) -> Result<Vec<ParamDef>> {
        let mut out: Vec<ParamDef> = Vec::new();
        for p in params {
            if out.iter().any(|o| o.var.name == p.name.name) {
                return Err(ResolveError::new(
                    ResolveErrorKind::Duplicate,
                    p.name.span,
                    format!("duplicate parameter `{}`", p.name.name),
                ));
            }
            let (ty, nat) = self.resolve_type(&p.ty, module, tparams)?;
            let var = self.fresh_var(&p.name.name);
            out.push(ParamDef { var, ty, nat });
        }
        Ok(out)
    }

    fn resolve_signatures(&mut self) -> Result<()> {
        let items: Vec<_> = self.items.iter().map(|(p, v)| (p.clone(), *v)).collect();
        for (order, (path, (kind, ai, di))) in items.into_iter().enumerate() {
            if kind != ItemKind::Fn {
                continue;
            }
            let module = self.module_of_ast[ai];
            let decl = &self.asts[ai].decls[di];
            let tp = |ids: &[ast::Ident]| ids.iter().map(|i| i.name.clone()).collect::<Vec<_>>();
            let (name, type_params, params, ret, ret_nat, kind) = match &decl.kind {
                DeclKind::SpecFn(f) => {
                    let type_params = tp(&f.type_params);
                    let params = self.resolve_params(&f.params, module, &type_params)?;
                    let (ret, ret_nat) = self.resolve_type(&f.ret, module, &type_params)?;
                    (f.name.name.clone(), type_params, params, ret, ret_nat, FnKind::Spec { body: None })
                }
                DeclKind::ProofFn(f) | DeclKind::AxiomFn(f) => {
                    let type_params = tp(&f.type_params);
                    let params = self.resolve_params(&f.params, module, &type_params)?;
                    let kind = if matches!(decl.kind, DeclKind::ProofFn(_)) {
                        FnKind::Proof {
                            broadcast: f.broadcast,
                            body: Vec::new(),
                        }
                    } else {
                        FnKind::Axiom { broadcast: f.broadcast }
                    };
                    (f.name.name.clone(), type_params, params, Type::Bool, false, kind)
                }
                DeclKind::ConstDecl { name, ty, .. } => {
                    let (ret, ret_nat) = self.resolve_type(ty, module, &[])?;
                    (name.name.clone(), Vec::new(), Vec::new(), ret, ret_nat, FnKind::Const { value: None })
                }
                _ => unreachable!(),
            };
            self.fns.insert(
                path.clone(),
                FnDef {
                    path,
                    name,
                    module,
                    kind,
                    type_params,
                    params,
                    ret,
                    ret_nat,
                    requires: Vec::new(),
                    ensures: Vec::new(),
                    span: decl.span,
                    order,
                },
            );
        }
        Ok(())
    }

    fn resolve_bodies(&mut self) -> Result<()> {
        let paths: Vec<String> = self.fns.keys().cloned().collect();
        for path in paths {
            let (_, ai, di) = self.items[&path];
            let decl = &self.asts[ai].decls[di];
            let def = self.fns[&path].clone();
            let scope: Vec<(String, Var, Type)> = def
                .params
                .iter()
                .map(|p| (p.var.name.clone(), p.var.clone(), p.ty.clone()))
                .collect();
            let mut cx = ExprCx {
                module: def.module,
                type_params: &def.type_params,
                scope,
                quant_depth: 0,
                marks_allowed: false,
            };
            let mut new = def.clone();
            match &decl.kind {
                DeclKind::SpecFn(f) => {
                    if let Some(body) = &f.body {
                        let b = self.expr(body, &mut cx)?;
                        self.expect_type(&b, &def.ret)?;
                        new.kind = FnKind::Spec { body: Some(b) };
                    }
                }
                DeclKind::ConstDecl { value: Some(v), .. } => {
                    let b = self.expr(v, &mut cx)?;
                    self.expect_type(&b, &def.ret)?;
                    new.kind = FnKind::Const { value: Some(b) };
                }
                DeclKind::ProofFn(f) | DeclKind::AxiomFn(f) => {
                    cx.marks_allowed = f.broadcast;
                    new.requires = f
                        .requires
                        .iter()
                        .map(|e| self.bool_expr(e, &mut cx))
                        .collect::<Result<_>>()?;
                    new.ensures = f
                        .ensures
                        .iter()
                        .map(|e| self.bool_expr(e, &mut cx))
                        .collect::<Result<_>>()?;
                    cx.marks_allowed = false;
                    if let FnKind::Proof { broadcast, .. } = def.kind {
                        let body = self.block(&f.body, &mut cx)?;
                        new.kind = FnKind::Proof { broadcast, body };
                    }
                }
                _ => {}
            }
            self.fns.insert(path, new);
        }
        Ok(())
    }

    fn use_items(&self, module: usize, paths: &[ast::PathRef]) -> Result<Vec<UseItem>> {
        paths.iter().map(|p| self.use_item(module, p)).collect()
    }

    fn use_item(&self, module: usize, p: &ast::PathRef) -> Result<UseItem> {
        let groups = self.candidates(module, &p.segments, ItemKind::Group);
        if let [g] = groups.as_slice() {
            return Ok(UseItem {
                path: g.clone(),
                kind: UseKind::Group,
                span: p.span,
            });
        }
        let fns = self.candidates(module, &p.segments, ItemKind::Fn);
        match (fns.as_slice(), groups.len()) {
            ([f], 0) => {
                let def = &self.fns[f];
                if !def.is_broadcast() {
                    return Err(ResolveError::new(
                        ResolveErrorKind::NotBroadcastable,
                        p.span,
                        format!("`{f}` is not a broadcastable fact"),
                    ));
                }
                Ok(UseItem {
                    path: f.clone(),
                    kind: UseKind::Fact,
                    span: p.span,
                })
            }
            ([], 0) => Err(ResolveError::new(
                ResolveErrorKind::Unresolved,
                p.span,
                format!("unresolved broadcast item `{}`", p.joined()),
            )),
            _ => Err(ResolveError::new(
                ResolveErrorKind::Unresolved,
                p.span,
                format!("ambiguous broadcast item `{}`", p.joined()),
            )),
        }
    }

    fn resolve_groups_and_uses(&mut self) -> Result<()> {
        let items: Vec<_> = self.items.iter().map(|(p, v)| (p.clone(), *v)).collect();
        for (path, (kind, ai, di)) in items {
            if kind != ItemKind::Group {
                continue;
            }
            let module = self.module_of_ast[ai];
            let decl = &self.asts[ai].decls[di];
            let DeclKind::BroadcastGroup { members, .. } = &decl.kind else {
                unreachable!()
            };
            let members = self.use_items(module, members)?;
            self.groups.insert(
                path.clone(),
                GroupDef {
                    path,
                    module,
                    members,
                    span: decl.span,
                },
            );
        }
        for (ai, ast) in self.asts.iter().enumerate() {
            let module = self.module_of_ast[ai];
            for decl in &ast.decls {
                if let DeclKind::BroadcastUse(paths) = &decl.kind {
                    let items = self.use_items(module, paths)?;
                    self.modules[module].uses.extend(items);
                }
            }
        }
        Ok(())
    }

    fn check_lemma_recursion(&self) -> Result<()> {
        let mut graph = DiGraph::<&str, ()>::new();
        let mut nodes = BTreeMap::new();
        for (path, def) in &self.fns {
            if def.is_lemma() {
                nodes.insert(path.as_str(), graph.add_node(path.as_str()));
            }
        }
        fn calls(stmts: &[TStmt], out: &mut Vec<(String, SourceSpan)>) {
            for s in stmts {
                match s {
                    TStmt::LemmaCall { callee, span, .. } => out.push((callee.path.clone(), *span)),
                    TStmt::AssertBy { body, .. } => calls(body, out),
                    _ => {}
                }
            }
        }
        let mut spans = BTreeMap::new();
        for (path, def) in &self.fns {
            let mut out = Vec::new();
            calls(def.body(), &mut out);
            for (callee, span) in out {
                graph.add_edge(nodes[path.as_str()], nodes[callee.as_str()], ());
                spans.entry(path.as_str()).or_insert(span);
            }
        }
        for scc in petgraph::algo::tarjan_scc(&graph) {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            if cyclic {
                let mut names: Vec<&str> = scc.iter().map(|n| graph[*n]).collect();
                names.sort();
                return Err(ResolveError::new(
                    ResolveErrorKind::RecursiveLemma,
                    spans[names[0]],
                    format!("recursive proof functions are not supported: {}", names.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn expect_type(&self, e: &TExpr, ty: &Type) -> Result<()> {
        if &e.ty == ty {
            Ok(())
        } else {
            Err(ResolveError::new(
                ResolveErrorKind::TypeMismatch,
                e.span,
                format!("expected `{}`, found `{}`", ty.short(), e.ty.short()),
            ))
        }
    }

    fn bool_expr(&mut self, e: &ast::Expr, cx: &mut ExprCx) -> Result<TExpr> {
        let t = self.expr(e, cx)?;
        self.expect_type(&t, &Type::Bool)?;
        Ok(t)
    }

    fn int_expr(&mut self, e: &ast::Expr, cx: &mut ExprCx) -> Result<TExpr> {
        let t = self.expr(e, cx)?;
        self.expect_type(&t, &Type::Int)?;
        Ok(t)
    }

    /// Choose among overloads by the head sort of the first argument.
    fn pick_overload(&self, cands: Vec<String>, args: &[TExpr], func: &ast::PathRef) -> Result<String> {
        if cands.len() == 1 {
            return Ok(cands.into_iter().next().unwrap());
        }
        if cands.is_empty() {
            return Err(ResolveError::new(
                ResolveErrorKind::Unresolved,
                func.span,
                format!("unresolved function `{}`", func.joined()),
            ));
        }
        let head = |t: &Type| match t {
            Type::Sort { path, .. } => Some(path.clone()),
            _ => None,
        };
        let arg_head = args.first().and_then(|a| head(&a.ty));
        let matching: Vec<String> = cands
            .iter()
            .filter(|c| {
                let def = &self.fns[*c];
                def.params.first().and_then(|p| head(&p.ty)) == arg_head && def.params.len() == args.len()
            })
            .cloned()
            .collect();
        match matching.as_slice() {
            [one] => Ok(one.clone()),
            _ => Err(ResolveError::new(
                ResolveErrorKind::Unresolved,
                func.span,
                format!("ambiguous call to `{}`: candidates {}", func.joined(), cands.join(", ")),
            )),
        }
    }

    /// Check arguments against a callee signature and infer its type
    /// arguments.
    fn instantiate_call(&self, path: &str, args: &[TExpr], span: SourceSpan) -> Result<(FnRef, Type)> {
        let def = &self.fns[path];
        if def.params.len() != args.len() {
            return Err(ResolveError::new(
                ResolveErrorKind::Arity,
                span,
                format!(
                    "`{}` expects {} argument(s), found {}",
                    def.name,
                    def.params.len(),
                    args.len()
                ),
            ));
        }
        let mut binding: BTreeMap<String, Type> = BTreeMap::new();
        for (p, a) in def.params.iter().zip(args) {
            if !match_type(&p.ty, &a.ty, &def.type_params, &mut binding) {
                return Err(ResolveError::new(
                    ResolveErrorKind::TypeMismatch,
                    a.span,
                    format!(
                        "argument `{}` of `{}` expects `{}`, found `{}`",
                        p.var.name,
                        def.name,
                        p.ty.subst(&binding).short(),
                        a.ty.short()
                    ),
                ));
            }
        }
        let mut type_args = Vec::new();
        for tp in &def.type_params {
            match binding.get(tp) {
                Some(t) => type_args.push(t.clone()),
                None => {
                    return Err(ResolveError::new(
                        ResolveErrorKind::TypeMismatch,
                        span,
                        format!("cannot infer type parameter `{tp}` of `{}`", def.name),
                    ))
                }
            }
        }
        Ok((FnRef::new(path, type_args), def.ret.subst(&binding)))
    }

    fn expr(&mut self, e: &ast::Expr, cx: &mut ExprCx) -> Result<TExpr> {
        if e.trigger && cx.quant_depth == 0 && !cx.marks_allowed {
            return Err(ResolveError::new(
                ResolveErrorKind::Misplaced,
                e.span,
                "`#[trigger]` outside a quantifier or broadcast specification",
            ));
        }
        let mut out = self.expr_inner(e, cx)?;
        out.trigger = e.trigger;
        Ok(out)
    }

    fn expr_inner(&mut self, e: &ast::Expr, cx: &mut ExprCx) -> Result<TExpr> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Int(n) => TExpr::int(*n, span),
            ExprKind::Bool(b) => TExpr::boolean(*b, span),
            ExprKind::Var(name) => {
                if let Some((v, ty)) = cx.lookup(name) {
                    TExpr::var(v, ty, span)
                } else {
                    let cands: Vec<String> = self
                        .candidates(cx.module, std::slice::from_ref(name), ItemKind::Fn)
                        .into_iter()
                        .filter(|c| matches!(self.fns[c].kind, FnKind::Const { .. }))
                        .collect();
                    match cands.as_slice() {
                        [c] => {
                            let ty = self.fns[c].ret.clone();
                            TExpr::new(TExprKind::Call(FnRef::new(c.clone(), vec![]), vec![]), ty, span)
                        }
                        _ => {
                            return Err(ResolveError::new(
                                ResolveErrorKind::Unresolved,
                                span,
                                format!("unresolved name `{name}`"),
                            ))
                        }
                    }
                }
            }
            ExprKind::Call { func, args } => {
                let args = args.iter().map(|a| self.expr(a, cx)).collect::<Result<Vec<_>>>()?;
                let cands = self.candidates(cx.module, &func.segments, ItemKind::Fn);
                if cands.iter().any(|c| self.fns[c].is_lemma()) {
                    return Err(ResolveError::new(
                        ResolveErrorKind::Misplaced,
                        func.span,
                        format!("proof function `{}` cannot be called inside an expression", func.joined()),
                    ));
                }
                let path = self.pick_overload(cands, &args, func)?;
                for a in &args {
                    if a.ty.is_bool() && !is_plain_bool_term(a) {
                        return Err(ResolveError::new(
                            ResolveErrorKind::TypeMismatch,
                            a.span,
                            "boolean formulas are not supported as function arguments",
                        ));
                    }
                }
                let (fref, ret) = self.instantiate_call(&path, &args, span)?;
                TExpr::new(TExprKind::Call(fref, args), ret, span)
            }
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    let a = self.int_expr(lhs, cx)?;
                    let b = self.int_expr(rhs, cx)?;
                    let aop = match op {
                        BinOp::Add => ArithOp::Add,
                        BinOp::Sub => ArithOp::Sub,
                        BinOp::Mul => ArithOp::Mul,
                        BinOp::Div => ArithOp::Div,
                        _ => ArithOp::Mod,
                    };
                    TExpr::new(TExprKind::Arith(aop, Box::new(a), Box::new(b)), Type::Int, span)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let a = self.int_expr(lhs, cx)?;
                    let b = self.int_expr(rhs, cx)?;
                    let cop = match op {
                        BinOp::Lt => CmpOp::Lt,
                        BinOp::Le => CmpOp::Le,
                        BinOp::Gt => CmpOp::Gt,
                        _ => CmpOp::Ge,
                    };
                    let mut t = TExpr::cmp(cop, a, b);
                    t.span = span;
                    t
                }
                BinOp::Eq | BinOp::Ne => {
                    let a = self.expr(lhs, cx)?;
                    let b = self.expr(rhs, cx)?;
                    self.expect_type(&b, &a.ty)?;
                    let mut eq = TExpr::eq(a, b);
                    eq.span = span;
                    if *op == BinOp::Ne {
                        let mut n = TExpr::not(eq);
                        n.span = span;
                        n
                    } else {
                        eq
                    }
                }
                BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                    let a = self.bool_expr(lhs, cx)?;
                    let b = self.bool_expr(rhs, cx)?;
                    let lop = match op {
                        BinOp::And => Logic::And,
                        BinOp::Or => Logic::Or,
                        BinOp::Implies => Logic::Implies,
                        _ => Logic::Iff,
                    };
                    let mut t = TExpr::logic(lop, a, b);
                    t.span = span;
                    t
                }
            },
            ExprKind::Unary { op, operand } => match op {
                UnOp::Not => {
                    let a = self.bool_expr(operand, cx)?;
                    let mut t = TExpr::not(a);
                    t.span = span;
                    t
                }
                UnOp::Neg => {
                    let a = self.int_expr(operand, cx)?;
                    TExpr::new(TExprKind::Neg(Box::new(a)), Type::Int, span)
                }
            },
            ExprKind::Forall {
                binders,
                all_triggers,
                body,
            } => self.quantifier(true, binders, *all_triggers, body, span, cx)?,
            ExprKind::Exists { binders, body } => self.quantifier(false, binders, false, body, span, cx)?,
            ExprKind::If { cond, then, els } => {
                let c = self.bool_expr(cond, cx)?;
                let a = self.expr(then, cx)?;
                let b = self.expr(els, cx)?;
                self.expect_type(&b, &a.ty)?;
                let ty = a.ty.clone();
                TExpr::new(TExprKind::Ite(Box::new(c), Box::new(a), Box::new(b)), ty, span)
            }
        })
    }

    fn quantifier(
        &mut self,
        forall: bool,
        binders: &[ast::Binder],
        all_triggers: bool,
        body: &ast::Expr,
        span: SourceSpan,
        cx: &mut ExprCx,
    ) -> Result<TExpr> {
        let mut bs = Vec::new();
        for b in binders {
            let (ty, nat) = self.resolve_type(&b.ty, cx.module, cx.type_params)?;
            let var = self.fresh_var(&b.name.name);
            bs.push(Binder { var, ty, nat });
        }
        let saved = cx.scope.len();
        for b in &bs {
            cx.scope.push((b.var.name.clone(), b.var.clone(), b.ty.clone()));
        }
        cx.quant_depth += 1;
        let res = self.bool_expr(body, cx);
        cx.quant_depth -= 1;
        cx.scope.truncate(saved);
        let mut body = res?;
        let guards: Vec<TExpr> = bs
            .iter()
            .filter(|b| b.nat)
            .map(|b| TExpr::cmp(CmpOp::Le, TExpr::int(0, span), TExpr::var(b.var.clone(), Type::Int, span)))
            .collect();
        if !guards.is_empty() {
            let guard = TExpr::conj(guards, span);
            body = TExpr::logic(if forall { Logic::Implies } else { Logic::And }, guard, body);
        }
        Ok(TExpr::new(
            TExprKind::Quant(Box::new(Quantifier {
                forall,
                binders: bs,
                all_triggers,
                body,
                triggers: None,
            })),
            Type::Bool,
            span,
        ))
    }

    fn block(&mut self, stmts: &[ast::Stmt], cx: &mut ExprCx) -> Result<Vec<TStmt>> {
        let saved = cx.scope.len();
        let mut out = Vec::new();
        for s in stmts {
            let span = s.span;
            out.push(match &s.kind {
                StmtKind::Assert(e) => TStmt::Assert {
                    expr: self.bool_expr(e, cx)?,
                    span,
                },
                StmtKind::AssertBy(e, body) => {
                    let expr = self.bool_expr(e, cx)?;
                    let body = self.block(body, cx)?;
                    TStmt::AssertBy { expr, body, span }
                }
                StmtKind::Let { name, ty, value } => {
                    let value = self.expr(value, cx)?;
                    let ty = match ty {
                        Some(t) => {
                            let (ty, _) = self.resolve_type(t, cx.module, cx.type_params)?;
                            self.expect_type(&value, &ty)?;
                            ty
                        }
                        None => value.ty.clone(),
                    };
                    let var = self.fresh_var(&name.name);
                    cx.scope.push((name.name.clone(), var.clone(), ty.clone()));
                    TStmt::Let { var, ty, value, span }
                }
                StmtKind::LemmaCall { func, args } => {
                    let args = args.iter().map(|a| self.expr(a, cx)).collect::<Result<Vec<_>>>()?;
                    let cands: Vec<String> = self
                        .candidates(cx.module, &func.segments, ItemKind::Fn)
                        .into_iter()
                        .filter(|c| self.fns[c].is_lemma())
                        .collect();
                    let path = self.pick_overload(cands, &args, func)?;
                    let (callee, _) = self.instantiate_call(&path, &args, span)?;
                    TStmt::LemmaCall { callee, args, span }
                }
                StmtKind::BroadcastUse(paths) => TStmt::BroadcastUse {
                    items: self.use_items(cx.module, paths)?,
                    span,
                },
            });
        }
        cx.scope.truncate(saved);
        Ok(out)
    }
}

fn is_plain_bool_term(e: &TExpr) -> bool {
    matches!(e.kind, TExprKind::Var(_) | TExprKind::Bool(_) | TExprKind::Call(..))
}

/// One-way matching of a signature type (with the callee's `params`) against
/// an argument type.
fn match_type(pat: &Type, actual: &Type, params: &[String], binding: &mut BTreeMap<String, Type>) -> bool {
    match (pat, actual) {
        (Type::Param(p), _) if params.contains(p) => match binding.get(p) {
            Some(bound) => bound == actual,
            None => {
                binding.insert(p.clone(), actual.clone());
                true
            }
        },
        (Type::Sort { path: p1, args: a1 }, Type::Sort { path: p2, args: a2 }) => {
            p1 == p2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| match_type(x, y, params, binding))
        }
        _ => pat == actual,
    }
}

/// All ground types mentioned by a function's signature and body.
pub fn types_of_fn(def: &FnDef) -> BTreeSet<Type> {
    let mut out = BTreeSet::new();
    for p in &def.params {
        p.ty.collect_into(&mut out);
    }
    def.ret.collect_into(&mut out);
    for e in def.requires.iter().chain(&def.ensures) {
        e.types(&mut out);
    }
    fn stmts(ss: &[TStmt], out: &mut BTreeSet<Type>) {
        for s in ss {
            match s {
                TStmt::Assert { expr, .. } => expr.types(out),
                TStmt::AssertBy { expr, body, .. } => {
                    expr.types(out);
                    stmts(body, out);
                }
                TStmt::Let { ty, value, .. } => {
                    ty.collect_into(out);
                    value.types(out);
                }
                TStmt::LemmaCall { callee, args, .. } => {
                    for t in &callee.type_args {
                        t.collect_into(out);
                    }
                    for a in args {
                        a.types(out);
                    }
                }
                TStmt::BroadcastUse { .. } => {}
            }
        }
    }
    stmts(def.body(), &mut out);
    if let FnKind::Spec { body: Some(b) } | FnKind::Const { value: Some(b) } = &def.kind {
        b.types(&mut out);
    }
    out
}

#[cfg(test)]
mod tests;
