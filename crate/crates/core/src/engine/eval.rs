//! Exhaustive evaluation of closed formulas over a finite interpretation.
//! Test oracle only.

use std::collections::BTreeMap;

use thiserror::Error;

use super::egraph::eval_arith;
use crate::ir::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("quantified variable `{0}` has no bound in the guard")]
    Unbounded(String),
    #[error("range of `{0}` exceeds the domain")]
    RangeTooLarge(String),
    #[error("variable `{0}` has no value")]
    Unassigned(String),
    #[error("type `{0}` is not supported")]
    Unsupported(String),
    #[error("arithmetic overflow")]
    Overflow,
}

/// Function table: listed points plus a default for everything else.
#[derive(Clone, Debug, Default)]
pub struct FnTable {
    pub points: BTreeMap<Vec<i128>, i128>,
    pub default: i128,
}

impl FnTable {
    pub fn get(&self, args: &[i128]) -> i128 {
        self.points.get(args).copied().unwrap_or(self.default)
    }
}

/// Interpretation of free variables (by name) and uninterpreted functions
/// (by mangled name). Booleans are encoded as 0 and 1.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub vars: BTreeMap<String, i128>,
    pub funcs: BTreeMap<String, FnTable>,
}

type Env = BTreeMap<VarId, i128>;

/// Truth value of `formula` under `model`. Every quantifier must be bounded
/// by its guard, with at most `domain` values per binder.
pub fn eval_finite(formula: &TExpr, domain: usize, model: &Model) -> Result<bool, EvalError> {
    let ev = Evaluator { domain: domain as i128, model };
    Ok(ev.value(formula, &Env::new())? != 0)
}

struct Evaluator<'a> {
    domain: i128,
    model: &'a Model,
}

impl Evaluator<'_> {
    fn value(&self, e: &TExpr, env: &Env) -> Result<i128, EvalError> {
        if let Type::Sort { .. } | Type::Param(_) = e.ty {
            return Err(EvalError::Unsupported(e.ty.to_string()));
        }
        let b = |x: bool| Ok(x as i128);
        match &e.kind {
            TExprKind::Int(n) => Ok(*n),
            TExprKind::Bool(x) => b(*x),
            TExprKind::Var(v) => match env.get(&v.id) {
                Some(&x) => Ok(x),
                None => self.model.vars.get(&v.name).copied().ok_or_else(|| EvalError::Unassigned(v.name.clone())),
            },
            TExprKind::Call(f, args) => {
                let xs = args.iter().map(|a| self.value(a, env)).collect::<Result<Vec<_>, _>>()?;
                let t = self.model.funcs.get(&f.mangled());
                let v = t.map(|t| t.get(&xs)).unwrap_or(0);
                Ok(if e.ty.is_bool() { (v != 0) as i128 } else { v })
            }
            TExprKind::Arith(op, x, y) => {
                let (x, y) = (self.value(x, env)?, self.value(y, env)?);
                match (op, y) {
                    (ArithOp::Div | ArithOp::Mod, 0) => Ok(0),
                    _ => eval_arith(*op, x, y).ok_or(EvalError::Overflow),
                }
            }
            TExprKind::Neg(x) => self.value(x, env)?.checked_neg().ok_or(EvalError::Overflow),
            TExprKind::Cmp(op, x, y) => {
                let (x, y) = (self.value(x, env)?, self.value(y, env)?);
                b(match op {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    CmpOp::Ge => x >= y,
                })
            }
            TExprKind::Eq(x, y) => b(self.value(x, env)? == self.value(y, env)?),
            TExprKind::Not(x) => b(self.value(x, env)? == 0),
            TExprKind::Logic(op, x, y) => {
                let x = self.value(x, env)? != 0;
                match op {
                    Logic::And if !x => b(false),
                    Logic::Or if x => b(true),
                    Logic::Implies if !x => b(true),
                    Logic::Iff => b(x == (self.value(y, env)? != 0)),
                    _ => self.value(y, env),
                }
            }
            TExprKind::Ite(c, x, y) => {
                if self.value(c, env)? != 0 {
                    self.value(x, env)
                } else {
                    self.value(y, env)
                }
            }
            TExprKind::Quant(q) => b(self.quant(q, env)?),
        }
    }

    fn quant(&self, q: &Quantifier, env: &Env) -> Result<bool, EvalError> {
        let mut guard = Vec::new();
        match (&q.body.kind, q.forall) {
            (TExprKind::Logic(Logic::Implies, g, _), true) => conjuncts(g, &mut guard),
            (_, false) => conjuncts(&q.body, &mut guard),
            _ => {}
        }
        let mut ranges = Vec::new();
        for b in &q.binders {
            if !b.ty.is_int() {
                return Err(EvalError::Unsupported(b.ty.to_string()));
            }
            let (lo, hi) = self.bounds(&b.var, &q.binders, &guard, env)?;
            let (lo, hi) = match (lo, hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(EvalError::Unbounded(b.var.name.clone())),
            };
            if hi - lo > self.domain {
                return Err(EvalError::RangeTooLarge(b.var.name.clone()));
            }
            ranges.push((b.var.id, lo, hi));
        }
        let mut inner = env.clone();
        self.each(&ranges, &mut inner, &q.body, q.forall)
    }

    /// Runs over the product of `ranges`; returns the quantifier's value.
    fn each(&self, ranges: &[(VarId, i128, i128)], env: &mut Env, body: &TExpr, forall: bool) -> Result<bool, EvalError> {
        let Some(&(id, lo, hi)) = ranges.first() else {
            return Ok(self.value(body, env)? != 0);
        };
        for x in lo..hi {
            env.insert(id, x);
            if self.each(&ranges[1..], env, body, forall)? != forall {
                return Ok(!forall);
            }
        }
        Ok(forall)
    }

    /// Tightest `[lo, hi)` implied by the guard conjuncts that compare `v`
    /// against binder-free expressions.
    fn bounds(&self, v: &Var, binders: &[Binder], guard: &[&TExpr], env: &Env) -> Result<(Option<i128>, Option<i128>), EvalError> {
        let is_v = |e: &TExpr| matches!(&e.kind, TExprKind::Var(x) if x.id == v.id);
        let closed = |e: &TExpr| {
            let free = e.free_vars();
            !binders.iter().any(|b| free.contains(&b.var.id))
        };
        let (mut lo, mut hi) = (None::<i128>, None::<i128>);
        for g in guard {
            let TExprKind::Cmp(op, a, c) = &g.kind else { continue };
            // Normalise to `v op' other`.
            let (op, other) = if is_v(a) && closed(c) {
                (*op, c)
            } else if is_v(c) && closed(a) {
                let flipped = match op {
                    CmpOp::Lt => CmpOp::Gt,
                    CmpOp::Le => CmpOp::Ge,
                    CmpOp::Gt => CmpOp::Lt,
                    CmpOp::Ge => CmpOp::Le,
                };
                (flipped, a)
            } else {
                continue;
            };
            let k = self.value(other, env)?;
            match op {
                CmpOp::Lt => hi = Some(hi.map_or(k, |h| h.min(k))),
                CmpOp::Le => hi = Some(hi.map_or(k + 1, |h| h.min(k + 1))),
                CmpOp::Gt => lo = Some(lo.map_or(k + 1, |l| l.max(k + 1))),
                CmpOp::Ge => lo = Some(lo.map_or(k, |l| l.max(k))),
            }
        }
        Ok((lo, hi.map(|h| h.max(lo.unwrap_or(h)))))
    }
}

fn conjuncts<'a>(e: &'a TExpr, out: &mut Vec<&'a TExpr>) {
    match &e.kind {
        TExprKind::Logic(Logic::And, a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        _ => out.push(e),
    }
}
