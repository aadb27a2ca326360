//! Trigger candidate enumeration and selection.

use std::collections::{BTreeSet, HashSet};

use crate::ir::*;
use crate::syntax::SourceSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Conservative,
    AllTriggers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyUsed {
    Manual,
    Conservative,
    AllTriggers,
}

impl StrategyUsed {
    pub fn name(self) -> &'static str {
        match self {
            StrategyUsed::Manual => "manual",
            StrategyUsed::Conservative => "conservative",
            StrategyUsed::AllTriggers => "all_triggers",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriggerGroup {
    pub exprs: Vec<TExpr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriggerSelection {
    pub groups: Vec<TriggerGroup>,
    pub strategy_used: StrategyUsed,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriggerErrorKind {
    NoValidTrigger,
    ManualNotCovering,
    InvalidManual,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct TriggerError {
    pub kind: TriggerErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Clone, Debug)]
struct Cand<'a> {
    expr: &'a TExpr,
    pos: usize,
    vars: BTreeSet<VarId>,
    is_app: bool,
    size: usize,
    key: String,
}

/// Canonical key of a term; commutative arithmetic arguments are ordered.
pub fn norm_key(e: &TExpr) -> String {
    match &e.kind {
        TExprKind::Var(v) => format!("${}", v.id.0),
        TExprKind::Int(n) => n.to_string(),
        TExprKind::Bool(b) => b.to_string(),
        TExprKind::Call(f, args) => {
            let a: Vec<_> = args.iter().map(norm_key).collect();
            format!("{}({})", f.mangled(), a.join(","))
        }
        TExprKind::Arith(op, a, b) => {
            let (mut x, mut y) = (norm_key(a), norm_key(b));
            if op.is_commutative() && x > y {
                std::mem::swap(&mut x, &mut y);
            }
            format!("({x}{}{y})", op.symbol())
        }
        TExprKind::Neg(a) => format!("(-{})", norm_key(a)),
        _ => format!("{e}"),
    }
}

fn subterm_keys(e: &TExpr, out: &mut HashSet<String>) {
    out.insert(norm_key(e));
    for c in e.children() {
        subterm_keys(c, out);
    }
}

/// Whether `e` may appear inside a trigger term: no formulas, no `if`, no
/// variables bound inside the quantifier body.
fn is_pure_term(e: &TExpr, inner: &[VarId]) -> bool {
    match &e.kind {
        TExprKind::Var(v) => !inner.contains(&v.id),
        TExprKind::Int(_) | TExprKind::Bool(_) => true,
        TExprKind::Call(_, args) => args.iter().all(|a| is_pure_term(a, inner)),
        TExprKind::Arith(_, a, b) => is_pure_term(a, inner) && is_pure_term(b, inner),
        TExprKind::Neg(a) => is_pure_term(a, inner),
        _ => false,
    }
}

fn binder_ids(binders: &[Binder]) -> BTreeSet<VarId> {
    binders.iter().map(|b| b.var.id).collect()
}

fn is_binder_var(e: &TExpr, binders: &BTreeSet<VarId>) -> bool {
    matches!(&e.kind, TExprKind::Var(v) if binders.contains(&v.id))
}

/// Structural test for a single candidate term.
fn candidate_kind(e: &TExpr, binders: &BTreeSet<VarId>, inner: &[VarId]) -> Option<bool> {
    if !is_pure_term(e, inner) {
        return None;
    }
    match &e.kind {
        TExprKind::Call(_, args) if !args.is_empty() => {
            if e.free_vars().iter().any(|v| binders.contains(v)) {
                Some(true)
            } else {
                None
            }
        }
        TExprKind::Arith(ArithOp::Add | ArithOp::Sub | ArithOp::Mul, a, b) => {
            if is_binder_var(a, binders) || is_binder_var(b, binders) {
                Some(false)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn collect_cands<'a>(
    e: &'a TExpr,
    binders: &BTreeSet<VarId>,
    inner: &mut Vec<VarId>,
    pos: &mut usize,
    out: &mut Vec<Cand<'a>>,
) {
    let here = *pos;
    *pos += 1;
    if let Some(is_app) = candidate_kind(e, binders, inner) {
        let key = norm_key(e);
        if !out.iter().any(|c| c.key == key) {
            out.push(Cand {
                expr: e,
                pos: here,
                vars: e.free_vars().intersection(binders).copied().collect(),
                is_app,
                size: e.size(),
                key,
            });
        }
    }
    if let TExprKind::Quant(q) = &e.kind {
        let n = inner.len();
        inner.extend(q.binders.iter().map(|b| b.var.id));
        collect_cands(&q.body, binders, inner, pos, out);
        inner.truncate(n);
        return;
    }
    for c in e.children() {
        collect_cands(c, binders, inner, pos, out);
    }
}

fn candidates_of<'a>(binders: &[Binder], bodies: &[&'a TExpr]) -> Vec<Cand<'a>> {
    let ids = binder_ids(binders);
    let mut out = Vec::new();
    let mut pos = 0;
    for b in bodies {
        collect_cands(b, &ids, &mut Vec::new(), &mut pos, &mut out);
    }
    out
}

/// Every valid trigger term of a quantifier body, in pre-order.
pub fn valid_trigger_candidates(q: &Quantifier) -> Vec<TExpr> {
    candidates_of(&q.binders, &[&q.body])
        .into_iter()
        .map(|c| c.expr.clone())
        .collect()
}

/// `b` makes `a` redundant: every term of `b` is a subterm of some term of
/// `a`.
fn subsumes(b: &[&Cand], a: &[&Cand]) -> bool {
    let mut keys = HashSet::new();
    for c in a {
        subterm_keys(c.expr, &mut keys);
    }
    b.iter().all(|c| keys.contains(&c.key))
}

fn prune_redundant<'a, 'b>(mut groups: Vec<Vec<&'b Cand<'a>>>) -> Vec<Vec<&'b Cand<'a>>> {
    let total = |g: &Vec<&Cand>| g.iter().map(|c| c.size).sum::<usize>();
    let first = |g: &Vec<&Cand>| g.iter().map(|c| c.pos).min().unwrap_or(0);
    groups.sort_by_key(|g| (total(g), first(g)));
    let mut kept: Vec<Vec<&Cand>> = Vec::new();
    for g in groups {
        if !kept.iter().any(|k| subsumes(k, &g)) {
            kept.push(g);
        }
    }
    kept.sort_by_key(|g| g.iter().map(|c| c.pos).collect::<Vec<_>>());
    kept
}

fn covers(group: &[&Cand], all: &BTreeSet<VarId>) -> bool {
    let mut seen = BTreeSet::new();
    for c in group {
        seen.extend(c.vars.iter().copied());
    }
    all.is_subset(&seen)
}

/// Covering multi-term sets of minimal cardinality, in source order.
fn minimal_multi<'a, 'b>(cands: &'b [Cand<'a>], all: &BTreeSet<VarId>, first_only: bool) -> Vec<Vec<&'b Cand<'a>>> {
    const MAX_CANDS: usize = 16;
    let pool: Vec<&Cand> = cands.iter().filter(|c| !c.vars.is_empty()).take(MAX_CANDS).collect();
    let mut out = Vec::new();
    for k in 2..=all.len().min(pool.len()) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let group: Vec<&Cand> = idx.iter().map(|&i| pool[i]).collect();
            if covers(&group, all) {
                out.push(group);
                if first_only {
                    return out;
                }
            }
            // next combination in lexicographic order
            let mut i = k;
            while i > 0 && idx[i - 1] == pool.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
        if !out.is_empty() {
            return out;
        }
    }
    out
}

fn conservative<'a, 'b>(cands: &'b [Cand<'a>], all: &BTreeSet<VarId>) -> Option<Vec<&'b Cand<'a>>> {
    let best = cands
        .iter()
        .filter(|c| all.is_subset(&c.vars))
        .min_by_key(|c| (!c.is_app, std::cmp::Reverse(c.size), c.pos));
    match best {
        Some(c) => Some(vec![c]),
        None => minimal_multi(cands, all, true).into_iter().next(),
    }
}

fn all_triggers<'a, 'b>(cands: &'b [Cand<'a>], all: &BTreeSet<VarId>) -> Vec<Vec<&'b Cand<'a>>> {
    let singles: Vec<Vec<&Cand>> = cands
        .iter()
        .filter(|c| all.is_subset(&c.vars))
        .map(|c| vec![c])
        .collect();
    if !singles.is_empty() {
        prune_redundant(singles)
    } else {
        prune_redundant(minimal_multi(cands, all, false))
    }
}

/// A binder used both under arithmetic and under function application; the
/// all-triggers strategy stays conservative for such quantifiers.
fn mixes_arith_and_apps(cands: &[Cand]) -> bool {
    let mut arith = BTreeSet::new();
    let mut apps = BTreeSet::new();
    for c in cands {
        if c.is_app {
            apps.extend(c.vars.iter().copied());
        } else {
            arith.extend(c.vars.iter().copied());
        }
    }
    arith.intersection(&apps).next().is_some()
}

fn manual_marks<'a>(e: &'a TExpr, out: &mut Vec<&'a TExpr>) {
    if e.trigger {
        out.push(e);
    }
    if matches!(e.kind, TExprKind::Quant(_)) {
        return;
    }
    for c in e.children() {
        manual_marks(c, out);
    }
}

fn names_of(binders: &[Binder], ids: &BTreeSet<VarId>) -> String {
    binders
        .iter()
        .filter(|b| ids.contains(&b.var.id))
        .map(|b| b.var.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Potential matching loops: a trigger term occurring as a proper subterm
/// of another application of the same function.
fn loop_warnings(groups: &[TriggerGroup], bodies: &[&TExpr]) -> Vec<String> {
    let mut warnings = Vec::new();
    for g in groups {
        for t in &g.exprs {
            let TExprKind::Call(head, _) = &t.kind else { continue };
            let key = norm_key(t);
            let mut hit = false;
            for b in bodies {
                b.walk(true, &mut |e| {
                    if let TExprKind::Call(h2, args) = &e.kind {
                        if h2.path == head.path {
                            let mut keys = HashSet::new();
                            for a in args {
                                subterm_keys(a, &mut keys);
                            }
                            if keys.contains(&key) {
                                hit = true;
                            }
                        }
                    }
                });
            }
            if hit {
                warnings.push(format!("potential matching loop: trigger `{t}` reappears under `{}`", head.short_name()));
            }
        }
    }
    warnings
}

fn to_groups(groups: Vec<Vec<&Cand>>) -> Vec<TriggerGroup> {
    groups
        .into_iter()
        .map(|g| TriggerGroup {
            exprs: g.into_iter().map(|c| c.expr.clone()).collect(),
        })
        .collect()
}

/// Select triggers for binders over one or more bodies. Manual marks win,
/// then `all_triggers_attr`, then the global strategy.
pub fn select_triggers(
    binders: &[Binder],
    bodies: &[&TExpr],
    all_triggers_attr: bool,
    strategy: Strategy,
    span: SourceSpan,
) -> Result<TriggerSelection, TriggerError> {
    let all = binder_ids(binders);
    let mut marks = Vec::new();
    for b in bodies {
        manual_marks(b, &mut marks);
    }
    if !marks.is_empty() {
        let mut seen = BTreeSet::new();
        for m in &marks {
            if candidate_kind(m, &all, &[]).is_none() {
                return Err(TriggerError {
                    kind: TriggerErrorKind::InvalidManual,
                    span: m.span,
                    message: format!("`{m}` is not a valid trigger"),
                });
            }
            seen.extend(m.free_vars().intersection(&all).copied());
        }
        if !all.is_subset(&seen) {
            let missing: BTreeSet<VarId> = all.difference(&seen).copied().collect();
            return Err(TriggerError {
                kind: TriggerErrorKind::ManualNotCovering,
                span: marks[0].span,
                message: format!("trigger does not mention quantified variable(s) {}", names_of(binders, &missing)),
            });
        }
        let groups = vec![TriggerGroup {
            exprs: marks.iter().map(|m| {
                let mut t = (*m).clone();
                t.trigger = false;
                t
            }).collect(),
        }];
        let warnings = loop_warnings(&groups, bodies);
        return Ok(TriggerSelection {
            groups,
            strategy_used: StrategyUsed::Manual,
            warnings,
        });
    }
    let cands = candidates_of(binders, bodies);
    let use_all = (all_triggers_attr || strategy == Strategy::AllTriggers) && !mixes_arith_and_apps(&cands);
    let (groups, used) = if use_all {
        (all_triggers(&cands, &all), StrategyUsed::AllTriggers)
    } else {
        (conservative(&cands, &all).into_iter().collect(), StrategyUsed::Conservative)
    };
    if groups.is_empty() {
        return Err(TriggerError {
            kind: TriggerErrorKind::NoValidTrigger,
            span,
            message: format!("no valid trigger covers quantified variable(s) {}", names_of(binders, &all)),
        });
    }
    let groups = to_groups(groups);
    let warnings = loop_warnings(&groups, bodies);
    Ok(TriggerSelection {
        groups,
        strategy_used: used,
        warnings,
    })
}

pub fn infer_triggers(q: &Quantifier, strategy: Strategy, span: SourceSpan) -> Result<TriggerSelection, TriggerError> {
    select_triggers(&q.binders, &[&q.body], q.all_triggers, strategy, span)
}

/// Fill in trigger selections for every quantifier nested in `e`.
/// Existentials without a valid trigger are left unannotated; they are only
/// ever skolemized. Returns collected warnings.
pub fn annotate(e: &mut TExpr, strategy: Strategy) -> Result<Vec<String>, TriggerError> {
    let mut warnings = Vec::new();
    annotate_into(e, strategy, &mut warnings)?;
    Ok(warnings)
}

fn annotate_into(e: &mut TExpr, strategy: Strategy, warnings: &mut Vec<String>) -> Result<(), TriggerError> {
    let span = e.span;
    match &mut e.kind {
        TExprKind::Quant(q) => {
            annotate_into(&mut q.body, strategy, warnings)?;
            if q.triggers.is_none() {
                match infer_triggers(q, strategy, span) {
                    Ok(sel) => {
                        warnings.extend(sel.warnings.iter().map(|w| format!("{span}: {w}")));
                        q.triggers = Some(sel);
                    }
                    Err(err) if q.forall => return Err(err),
                    Err(_) => {}
                }
            }
            Ok(())
        }
        TExprKind::Int(_) | TExprKind::Bool(_) | TExprKind::Var(_) => Ok(()),
        TExprKind::Call(_, args) => {
            for a in args {
                annotate_into(a, strategy, warnings)?;
            }
            Ok(())
        }
        TExprKind::Arith(_, a, b) | TExprKind::Cmp(_, a, b) | TExprKind::Eq(a, b) | TExprKind::Logic(_, a, b) => {
            annotate_into(a, strategy, warnings)?;
            annotate_into(b, strategy, warnings)
        }
        TExprKind::Neg(a) | TExprKind::Not(a) => annotate_into(a, strategy, warnings),
        TExprKind::Ite(c, a, b) => {
            annotate_into(c, strategy, warnings)?;
            annotate_into(a, strategy, warnings)?;
            annotate_into(b, strategy, warnings)
        }
    }
}
