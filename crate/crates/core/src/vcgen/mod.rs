//! Verification-condition generation: proof obligations paired with the
//! facts visible at each proof point.

mod defs;
mod smtlib;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ir::*;
use crate::resolve::{types_of_fn, FnDef, FnKind, Program, TStmt, UseItem};
use crate::syntax::SourceSpan;
use crate::triggers::{self, Strategy, StrategyUsed, TriggerError, TriggerErrorKind, TriggerSelection};

pub use defs::{definitional_axiom, SpecGraph};
pub use smtlib::to_smtlib;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Axiom(String),
    BroadcastLemma(String),
    DefinitionalAxiom(String),
    LocalHypothesis(SourceSpan),
}

impl Origin {
    /// Path of an imported broadcast fact, if this is one.
    pub fn broadcast_path(&self) -> Option<&str> {
        match self {
            Origin::Axiom(p) | Origin::BroadcastLemma(p) => Some(p),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Origin::Axiom(p) => format!("axiom:{p}"),
            Origin::BroadcastLemma(p) => format!("lemma:{p}"),
            Origin::DefinitionalAxiom(p) => format!("def:{p}"),
            Origin::LocalHypothesis(s) => format!("local:{}:{}", s.line, s.col),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantifiedFact {
    pub binders: Vec<Binder>,
    pub hypothesis: TExpr,
    pub conclusion: TExpr,
    /// Empty groups only for facts without binders.
    pub triggers: TriggerSelection,
    pub origin: Origin,
    pub groups_via: Vec<String>,
    /// Unique name of this instantiation, used for per-fact counters.
    pub label: String,
}

impl QuantifiedFact {
    /// `hypothesis ==> conclusion`, or just the conclusion when there is no
    /// hypothesis.
    pub fn body(&self) -> TExpr {
        if matches!(self.hypothesis.kind, TExprKind::Bool(true)) {
            self.conclusion.clone()
        } else {
            TExpr::logic(Logic::Implies, self.hypothesis.clone(), self.conclusion.clone())
        }
    }

    /// The closed formula this fact stands for.
    pub fn formula(&self) -> TExpr {
        if self.binders.is_empty() {
            return self.body();
        }
        let body = self.body();
        let span = body.span;
        TExpr::new(
            TExprKind::Quant(Box::new(Quantifier {
                forall: true,
                binders: self.binders.clone(),
                all_triggers: false,
                body,
                triggers: Some(self.triggers.clone()),
            })),
            Type::Bool,
            span,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub expr: TExpr,
    pub origin: Origin,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactContext {
    pub ground: Vec<Hypothesis>,
    pub facts: Vec<QuantifiedFact>,
    /// Module, function and enclosing blocks, outermost first.
    pub scope_chain: Vec<String>,
}

impl FactContext {
    /// Keep only quantified facts whose label satisfies `keep`.
    pub fn retain_facts(&mut self, keep: impl Fn(&QuantifiedFact) -> bool) {
        self.facts.retain(|f| keep(f));
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Site {
    Assert(SourceSpan),
    Ensures(usize),
    LemmaPrecondition(SourceSpan, usize),
}

#[derive(Clone, Debug)]
pub struct Obligation {
    pub function: String,
    pub site: Site,
    pub span: SourceSpan,
    pub goal: TExpr,
    pub context: FactContext,
}

impl Obligation {
    pub fn describe(&self) -> String {
        match &self.site {
            Site::Assert(_) => "assertion".to_string(),
            Site::Ensures(i) => format!("postcondition #{}", i + 1),
            Site::LemmaPrecondition(_, i) => format!("precondition #{} of lemma call", i + 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VcConfig {
    pub fuel: u32,
    pub strategy: Strategy,
    pub default_prelude: bool,
    /// Imports applied to every module in addition to its own.
    pub ambient: Vec<UseItem>,
    /// Ignore manual `#[trigger]` marks outside the prelude.
    pub strip_triggers: bool,
}

impl Default for VcConfig {
    fn default() -> Self {
        VcConfig {
            fuel: 1,
            strategy: Strategy::Conservative,
            default_prelude: true,
            ambient: Vec::new(),
            strip_triggers: false,
        }
    }
}

/// Lower a broadcast fn at the given type arguments to a quantified fact.
pub fn lower_quantified_fact(
    program: &Program,
    def: &FnDef,
    type_args: &[Type],
    strategy: Strategy,
    strip: bool,
) -> Result<QuantifiedFact, TriggerError> {
    let tmap: BTreeMap<String, Type> = def.type_params.iter().cloned().zip(type_args.iter().cloned()).collect();
    let prelude = program.is_prelude_fn(def);
    let prep = |e: &TExpr| prep_expr(e, &tmap, strategy, strip && !prelude);
    let span = def.span;
    let binders: Vec<Binder> = def
        .params
        .iter()
        .map(|p| Binder {
            var: p.var.clone(),
            ty: p.ty.subst(&tmap),
            nat: p.nat,
        })
        .collect();
    let mut hyps: Vec<TExpr> = binders
        .iter()
        .filter(|b| b.nat)
        .map(|b| TExpr::cmp(CmpOp::Le, TExpr::int(0, span), TExpr::var(b.var.clone(), Type::Int, span)))
        .collect();
    for r in &def.requires {
        hyps.push(prep(r)?);
    }
    let ensures = def.ensures.iter().map(prep).collect::<Result<Vec<_>, _>>()?;
    let hypothesis = TExpr::conj(hyps, span);
    let conclusion = TExpr::conj(ensures, span);
    let triggers = if binders.is_empty() {
        TriggerSelection {
            groups: Vec::new(),
            strategy_used: StrategyUsed::Manual,
            warnings: Vec::new(),
        }
    } else {
        let mut marked = false;
        for e in [&hypothesis, &conclusion] {
            e.walk(false, &mut |t| marked |= t.trigger);
        }
        if marked {
            triggers::select_triggers(&binders, &[&hypothesis, &conclusion], false, strategy, span)?
        } else {
            match triggers::select_triggers(&binders, &[&conclusion], false, strategy, span) {
                Err(e) if e.kind == TriggerErrorKind::NoValidTrigger => {
                    triggers::select_triggers(&binders, &[&hypothesis, &conclusion], false, strategy, span)?
                }
                other => other?,
            }
        }
    };
    let mut hypothesis = hypothesis;
    let mut conclusion = conclusion;
    hypothesis.clear_marks();
    conclusion.clear_marks();
    let origin = if matches!(def.kind, FnKind::Axiom { .. }) {
        Origin::Axiom(def.path.clone())
    } else {
        Origin::BroadcastLemma(def.path.clone())
    };
    Ok(QuantifiedFact {
        binders,
        hypothesis,
        conclusion,
        triggers,
        origin,
        groups_via: Vec::new(),
        label: FnRef::new(def.path.clone(), type_args.to_vec()).mangled(),
    })
}

/// Substitute types, optionally drop manual marks, and select triggers for
/// nested quantifiers.
fn prep_expr(e: &TExpr, tmap: &BTreeMap<String, Type>, strategy: Strategy, strip: bool) -> Result<TExpr, TriggerError> {
    let mut out = e.subst_types(tmap);
    if strip {
        out.strip_trigger_marks();
    }
    triggers::annotate(&mut out, strategy)?;
    Ok(out)
}

/// Shared, per-run state for obligation generation.
pub struct VcEnv<'p> {
    pub program: &'p Program,
    pub cfg: VcConfig,
    graph: SpecGraph,
}

impl<'p> VcEnv<'p> {
    pub fn new(program: &'p Program, cfg: VcConfig) -> Self {
        VcEnv {
            program,
            cfg,
            graph: SpecGraph::build(program),
        }
    }

    pub fn generate_obligations(&self, function: &str) -> Result<Vec<Obligation>, TriggerError> {
        let mut b = TaskBuilder::new(self, function)?;
        let mut out = Vec::new();
        b.run(&mut out)?;
        Ok(out)
    }

    /// Context before the statement at `point` (indices through nested
    /// `assert ... by` blocks); past the end of the body this is the context
    /// of the postconditions.
    pub fn assemble_context(&self, function: &str, point: &[usize]) -> Result<FactContext, TriggerError> {
        let mut b = TaskBuilder::new(self, function)?;
        b.target = Some(point.to_vec());
        let mut out = Vec::new();
        b.run(&mut out)?;
        match b.captured.take() {
            Some(c) => Ok(c),
            None => b.context(&b.final_state.clone().unwrap_or_default(), None),
        }
    }

    /// Trigger warnings for a function's own quantifiers.
    pub fn warnings(&self, function: &str) -> Vec<String> {
        match TaskBuilder::new(self, function) {
            Ok(b) => b.warnings,
            Err(_) => Vec::new(),
        }
    }
}

pub fn generate_obligations(program: &Program, function: &str, cfg: &VcConfig) -> Result<Vec<Obligation>, TriggerError> {
    VcEnv::new(program, cfg.clone()).generate_obligations(function)
}

#[derive(Clone, Debug, Default)]
struct State {
    ground: Vec<Hypothesis>,
    uses: Vec<UseItem>,
    scopes: Vec<String>,
}

struct PreparedFn {
    requires: Vec<TExpr>,
    ensures: Vec<TExpr>,
    body: Vec<TStmt>,
}

struct TaskBuilder<'e, 'p> {
    env: &'e VcEnv<'p>,
    def: &'p FnDef,
    prepared: PreparedFn,
    types: BTreeSet<Type>,
    fact_cache: HashMap<(String, Vec<Type>), QuantifiedFact>,
    def_cache: HashMap<(String, Vec<Type>), Vec<QuantifiedFact>>,
    warnings: Vec<String>,
    target: Option<Vec<usize>>,
    captured: Option<FactContext>,
    final_state: Option<State>,
}

impl<'e, 'p> TaskBuilder<'e, 'p> {
    fn new(env: &'e VcEnv<'p>, function: &str) -> Result<Self, TriggerError> {
        let def = &env.program.fns[function];
        let strip = env.cfg.strip_triggers && !env.program.is_prelude_fn(def);
        let mut warnings = Vec::new();
        let mut prep = |e: &TExpr| -> Result<TExpr, TriggerError> {
            let mut out = e.clone();
            if strip {
                out.strip_trigger_marks();
            }
            warnings.extend(triggers::annotate(&mut out, env.cfg.strategy)?);
            Ok(out)
        };
        let requires = def.requires.iter().map(&mut prep).collect::<Result<Vec<_>, _>>()?;
        let ensures = def.ensures.iter().map(&mut prep).collect::<Result<Vec<_>, _>>()?;
        let body = prep_stmts(def.body(), &mut prep)?;
        Ok(TaskBuilder {
            env,
            def,
            prepared: PreparedFn { requires, ensures, body },
            types: types_of_fn(def),
            fact_cache: HashMap::new(),
            def_cache: HashMap::new(),
            warnings,
            target: None,
            captured: None,
            final_state: None,
        })
    }

    fn program(&self) -> &'p Program {
        self.env.program
    }

    fn run(&mut self, out: &mut Vec<Obligation>) -> Result<(), TriggerError> {
        let def = self.def;
        let module = &self.program().modules[def.module];
        let mut st = State {
            scopes: vec![format!("module {}", module.path), format!("fn {}", def.path)],
            ..State::default()
        };
        for p in def.params.iter().filter(|p| p.nat) {
            st.ground.push(Hypothesis {
                expr: TExpr::cmp(CmpOp::Le, TExpr::int(0, def.span), p.expr(def.span)),
                origin: Origin::LocalHypothesis(def.span),
            });
        }
        for r in self.prepared.requires.clone() {
            let origin = Origin::LocalHypothesis(r.span);
            st.ground.push(Hypothesis { expr: r, origin });
        }
        let body = std::mem::take(&mut self.prepared.body);
        let res = self.walk(&body, &mut st, &mut Vec::new(), out);
        self.prepared.body = body;
        res?;
        for (i, e) in self.prepared.ensures.clone().into_iter().enumerate() {
            let span = e.span;
            out.push(self.obligation(&st, e, Site::Ensures(i), span)?);
        }
        self.final_state = Some(st);
        Ok(())
    }

    fn obligation(&mut self, st: &State, goal: TExpr, site: Site, span: SourceSpan) -> Result<Obligation, TriggerError> {
        let context = self.context(st, Some(&goal))?;
        Ok(Obligation {
            function: self.def.path.clone(),
            site,
            span,
            goal,
            context,
        })
    }

    fn walk(&mut self, stmts: &[TStmt], st: &mut State, path: &mut Vec<usize>, out: &mut Vec<Obligation>) -> Result<(), TriggerError> {
        for (i, s) in stmts.iter().enumerate() {
            path.push(i);
            if self.captured.is_none() && self.target.as_deref() == Some(path.as_slice()) {
                self.captured = Some(self.context(st, None)?);
            }
            match s {
                TStmt::Assert { expr, span } => {
                    out.push(self.obligation(st, expr.clone(), Site::Assert(*span), *span)?);
                    st.ground.push(Hypothesis {
                        expr: expr.clone(),
                        origin: Origin::LocalHypothesis(*span),
                    });
                }
                TStmt::AssertBy { expr, body, span } => {
                    let saved = st.clone();
                    st.scopes.push(format!("block {}:{}", span.line, span.col));
                    self.walk(body, st, path, out)?;
                    out.push(self.obligation(st, expr.clone(), Site::Assert(*span), *span)?);
                    *st = saved;
                    st.ground.push(Hypothesis {
                        expr: expr.clone(),
                        origin: Origin::LocalHypothesis(*span),
                    });
                }
                TStmt::Let { var, ty, value, span } => {
                    let lhs = TExpr::var(var.clone(), ty.clone(), *span);
                    let expr = if ty.is_bool() {
                        TExpr::logic(Logic::Iff, lhs, value.clone())
                    } else {
                        TExpr::eq(lhs, value.clone())
                    };
                    st.ground.push(Hypothesis {
                        expr,
                        origin: Origin::LocalHypothesis(*span),
                    });
                }
                TStmt::LemmaCall { callee, args, span } => {
                    let (pres, posts) = self.instantiate_callee(callee, args, *span)?;
                    for (k, pre) in pres.into_iter().enumerate() {
                        out.push(self.obligation(st, pre, Site::LemmaPrecondition(*span, k), *span)?);
                    }
                    for post in posts {
                        st.ground.push(Hypothesis {
                            expr: post,
                            origin: Origin::LocalHypothesis(*span),
                        });
                    }
                }
                TStmt::BroadcastUse { items, .. } => st.uses.extend(items.iter().cloned()),
            }
            path.pop();
        }
        Ok(())
    }

    /// Preconditions (nat guards first) and postconditions of a lemma call.
    fn instantiate_callee(&mut self, callee: &FnRef, args: &[TExpr], span: SourceSpan) -> Result<(Vec<TExpr>, Vec<TExpr>), TriggerError> {
        let cdef = &self.program().fns[&callee.path];
        let tmap: BTreeMap<String, Type> = cdef.type_params.iter().cloned().zip(callee.type_args.iter().cloned()).collect();
        let strip = self.env.cfg.strip_triggers && !self.program().is_prelude_fn(cdef);
        let vmap: BTreeMap<VarId, TExpr> = cdef.params.iter().map(|p| p.var.id).zip(args.iter().cloned()).collect();
        let mut pres = Vec::new();
        for (p, a) in cdef.params.iter().zip(args) {
            if p.nat {
                pres.push(TExpr::cmp(CmpOp::Le, TExpr::int(0, span), a.clone()));
            }
        }
        for r in &cdef.requires {
            let mut e = prep_expr(r, &tmap, self.env.cfg.strategy, strip)?.subst(&vmap);
            e.span = span;
            pres.push(e);
        }
        let mut posts = Vec::new();
        for e in &cdef.ensures {
            let mut e = prep_expr(e, &tmap, self.env.cfg.strategy, strip)?.subst(&vmap);
            e.clear_marks();
            posts.push(e);
        }
        for e in pres.iter().chain(&posts) {
            e.types(&mut self.types);
        }
        Ok((pres, posts))
    }

    /// Type-argument tuples of `def` whose parameter types all occur in the
    /// task.
    fn instantiations(&self, def: &FnDef) -> Vec<Vec<Type>> {
        if def.type_params.is_empty() {
            return vec![Vec::new()];
        }
        let pool: Vec<&Type> = self.types.iter().collect();
        let mut out = Vec::new();
        let n = def.type_params.len();
        let mut idx = vec![0usize; n];
        if pool.is_empty() {
            return out;
        }
        loop {
            let args: Vec<Type> = idx.iter().map(|&i| pool[i].clone()).collect();
            let tmap: BTreeMap<String, Type> = def.type_params.iter().cloned().zip(args.iter().cloned()).collect();
            let ok = def.params.iter().all(|p| {
                let t = p.ty.subst(&tmap);
                matches!(t, Type::Int | Type::Bool) || self.types.contains(&t)
            }) && def.type_params.iter().all(|tp| def.params.iter().any(|p| mentions(&p.ty, tp)));
            if ok {
                out.push(args);
            }
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < pool.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        out
    }

    fn context(&mut self, st: &State, goal: Option<&TExpr>) -> Result<FactContext, TriggerError> {
        let program = self.program();
        let cfg = &self.env.cfg;
        let mut items = if cfg.default_prelude {
            program.registry.default_items()
        } else {
            Vec::new()
        };
        if !program.is_prelude_fn(self.def) {
            items.extend(cfg.ambient.iter().cloned());
        }
        items.extend(program.modules[self.def.module].uses.iter().cloned());
        items.extend(st.uses.iter().cloned());
        let imported = program.registry.expand(&items);
        for h in &st.ground {
            h.expr.types(&mut self.types);
        }
        if let Some(g) = goal {
            g.types(&mut self.types);
        }
        let mut facts;
        // Lowered facts can mention new types, which can enable further
        // instantiations; iterate a few times.
        let mut rounds = 0;
        loop {
            facts = Vec::new();
            for imp in &imported {
                let fdef = &program.fns[&imp.path];
                for args in self.instantiations(fdef) {
                    let key = (imp.path.clone(), args.clone());
                    if !self.fact_cache.contains_key(&key) {
                        let f = lower_quantified_fact(program, fdef, &args, cfg.strategy, cfg.strip_triggers)?;
                        self.warnings.extend(f.triggers.warnings.iter().map(|w| format!("{}: {w}", fdef.path)));
                        self.fact_cache.insert(key.clone(), f);
                    }
                    let mut f = self.fact_cache[&key].clone();
                    f.groups_via = imp.groups_via.clone();
                    facts.push(f);
                }
            }
            let mut roots: Vec<&TExpr> = st.ground.iter().map(|h| &h.expr).collect();
            roots.extend(goal);
            let defs = self.definitions(&roots, &facts)?;
            facts.extend(defs);
            let before = self.types.len();
            for f in &facts {
                f.hypothesis.types(&mut self.types);
                f.conclusion.types(&mut self.types);
            }
            rounds += 1;
            if self.types.len() == before || rounds >= 4 {
                break;
            }
        }
        Ok(FactContext {
            ground: st.ground.clone(),
            facts,
            scope_chain: st.scopes.clone(),
        })
    }

    /// Definitional axioms of every spec fn reachable from `roots` and
    /// `facts`, transitively.
    fn definitions(&mut self, roots: &[&TExpr], facts: &[QuantifiedFact]) -> Result<Vec<QuantifiedFact>, TriggerError> {
        let mut pending: BTreeSet<FnRef> = BTreeSet::new();
        for r in roots {
            r.calls(&mut pending);
        }
        for f in facts {
            f.hypothesis.calls(&mut pending);
            f.conclusion.calls(&mut pending);
        }
        let mut seen: BTreeSet<(String, Vec<Type>)> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue: Vec<FnRef> = pending.into_iter().collect();
        while let Some(fr) = queue.pop() {
            let key = (fr.path.clone(), fr.type_args.clone());
            if !seen.insert(key.clone()) {
                continue;
            }
            if !self.def_cache.contains_key(&key) {
                let program = self.program();
                let cfg = &self.env.cfg;
                let strip = cfg.strip_triggers;
                let strategy = cfg.strategy;
                let mut prep = |e: &TExpr, d: &FnDef| {
                    let mut out = e.clone();
                    if strip && !program.is_prelude_fn(d) {
                        out.strip_trigger_marks();
                    }
                    triggers::annotate(&mut out, strategy)?;
                    Ok(out)
                };
                let base = FnRef::new(fr.path.clone(), fr.type_args.clone());
                let list = definitional_axiom(program, &self.env.graph, &base, cfg.fuel, &mut prep)?;
                self.def_cache.insert(key.clone(), list);
            }
            for f in &self.def_cache[&key] {
                let mut calls = BTreeSet::new();
                f.conclusion.calls(&mut calls);
                for c in calls {
                    if !seen.contains(&(c.path.clone(), c.type_args.clone())) {
                        queue.push(c);
                    }
                }
                out.push(f.clone());
            }
        }
        out.sort_by(|a, b| a.label.cmp(&b.label));
        Ok(out)
    }
}

fn mentions(t: &Type, param: &str) -> bool {
    match t {
        Type::Param(p) => p == param,
        Type::Sort { args, .. } => args.iter().any(|a| mentions(a, param)),
        _ => false,
    }
}

fn prep_stmts(stmts: &[TStmt], prep: &mut dyn FnMut(&TExpr) -> Result<TExpr, TriggerError>) -> Result<Vec<TStmt>, TriggerError> {
    stmts
        .iter()
        .map(|s| {
            Ok(match s {
                TStmt::Assert { expr, span } => TStmt::Assert {
                    expr: prep(expr)?,
                    span: *span,
                },
                TStmt::AssertBy { expr, body, span } => TStmt::AssertBy {
                    expr: prep(expr)?,
                    body: prep_stmts(body, prep)?,
                    span: *span,
                },
                TStmt::Let { var, ty, value, span } => TStmt::Let {
                    var: var.clone(),
                    ty: ty.clone(),
                    value: prep(value)?,
                    span: *span,
                },
                TStmt::LemmaCall { callee, args, span } => TStmt::LemmaCall {
                    callee: callee.clone(),
                    args: args.iter().map(&mut *prep).collect::<Result<_, _>>()?,
                    span: *span,
                },
                other => other.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
