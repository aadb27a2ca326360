//! SMT-LIB 2 rendering of an obligation, for differential testing against
//! external solvers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::Obligation;
use crate::ir::*;

fn sort(t: &Type) -> String {
    match t {
        Type::Int => "Int".into(),
        Type::Bool => "Bool".into(),
        other => format!("|{other}|"),
    }
}

fn var_name(v: &Var) -> String {
    format!("|{}#{}|", v.name, v.id.0)
}

#[derive(Default)]
struct Decls {
    sorts: BTreeSet<String>,
    fns: BTreeMap<String, (Vec<String>, String)>,
    consts: BTreeMap<String, String>,
}

impl Decls {
    fn note_type(&mut self, t: &Type) {
        if !matches!(t, Type::Int | Type::Bool) {
            self.sorts.insert(sort(t));
        }
    }

    fn collect(&mut self, e: &TExpr, bound: &mut Vec<VarId>) {
        self.note_type(&e.ty);
        match &e.kind {
            TExprKind::Var(v) if !bound.contains(&v.id) => {
                self.consts.insert(var_name(v), sort(&e.ty));
            }
            TExprKind::Call(f, args) => {
                let sig = (args.iter().map(|a| sort(&a.ty)).collect(), sort(&e.ty));
                for a in args {
                    self.note_type(&a.ty);
                }
                self.fns.insert(format!("|{}|", f.mangled()), sig);
            }
            TExprKind::Quant(q) => {
                let n = bound.len();
                for b in &q.binders {
                    self.note_type(&b.ty);
                    bound.push(b.var.id);
                }
                self.collect(&q.body, bound);
                bound.truncate(n);
                return;
            }
            _ => {}
        }
        for c in e.children() {
            self.collect(c, bound);
        }
    }
}

fn expr(e: &TExpr) -> String {
    let bin = |op: &str, a: &TExpr, b: &TExpr| format!("({op} {} {})", expr(a), expr(b));
    match &e.kind {
        TExprKind::Int(n) if *n < 0 => format!("(- {})", n.unsigned_abs()),
        TExprKind::Int(n) => n.to_string(),
        TExprKind::Bool(b) => b.to_string(),
        TExprKind::Var(v) => var_name(v),
        TExprKind::Call(f, args) if args.is_empty() => format!("|{}|", f.mangled()),
        TExprKind::Call(f, args) => {
            let a: Vec<String> = args.iter().map(expr).collect();
            format!("(|{}| {})", f.mangled(), a.join(" "))
        }
        TExprKind::Arith(op, a, b) => {
            let name = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
                ArithOp::Div => "div",
                ArithOp::Mod => "mod",
            };
            bin(name, a, b)
        }
        TExprKind::Neg(a) => format!("(- {})", expr(a)),
        TExprKind::Cmp(op, a, b) => bin(op.symbol(), a, b),
        TExprKind::Eq(a, b) => bin("=", a, b),
        TExprKind::Not(a) => format!("(not {})", expr(a)),
        TExprKind::Logic(op, a, b) => {
            let name = match op {
                Logic::And => "and",
                Logic::Or => "or",
                Logic::Implies => "=>",
                Logic::Iff => "=",
            };
            bin(name, a, b)
        }
        TExprKind::Ite(c, a, b) => format!("(ite {} {} {})", expr(c), expr(a), expr(b)),
        TExprKind::Quant(q) => quant(q.forall, &q.binders, &q.body, q.triggers.as_ref()),
    }
}

fn quant(forall: bool, binders: &[Binder], body: &TExpr, triggers: Option<&crate::triggers::TriggerSelection>) -> String {
    let bs: Vec<String> = binders.iter().map(|b| format!("({} {})", var_name(&b.var), sort(&b.ty))).collect();
    let mut inner = expr(body);
    let pats: Vec<String> = triggers
        .map(|s| {
            s.groups
                .iter()
                .map(|g| {
                    let terms: Vec<String> = g.exprs.iter().map(expr).collect();
                    format!(" :pattern ({})", terms.join(" "))
                })
                .collect()
        })
        .unwrap_or_default();
    if !pats.is_empty() {
        inner = format!("(! {inner}{})", pats.concat());
    }
    let q = if forall { "forall" } else { "exists" };
    format!("({q} ({}) {inner})", bs.join(" "))
}

/// Standalone script: declarations, named context assertions, the negated
/// goal, `(check-sat)` and `(get-unsat-core)`.
pub fn to_smtlib(ob: &Obligation) -> String {
    let mut decls = Decls::default();
    let ctx = &ob.context;
    for h in &ctx.ground {
        decls.collect(&h.expr, &mut Vec::new());
    }
    for f in &ctx.facts {
        decls.collect(&f.formula(), &mut Vec::new());
    }
    decls.collect(&ob.goal, &mut Vec::new());

    let mut out = String::new();
    let _ = writeln!(out, "; {} {} at {}", ob.function, ob.describe(), ob.span);
    out.push_str("(set-option :produce-unsat-cores true)\n");
    for s in &decls.sorts {
        let _ = writeln!(out, "(declare-sort {s} 0)");
    }
    for (name, (args, ret)) in &decls.fns {
        let _ = writeln!(out, "(declare-fun {name} ({}) {ret})", args.join(" "));
    }
    for (name, s) in &decls.consts {
        let _ = writeln!(out, "(declare-const {name} {s})");
    }
    for (i, h) in ctx.ground.iter().enumerate() {
        let _ = writeln!(out, "(assert (! {} :named |h{i}:{}|))", expr(&h.expr), h.origin.label());
    }
    for f in &ctx.facts {
        let body = if f.binders.is_empty() {
            expr(&f.body())
        } else {
            quant(true, &f.binders, &f.body(), Some(&f.triggers))
        };
        let _ = writeln!(out, "(assert (! {body} :named |{}|))", f.label);
    }
    let _ = writeln!(out, "(assert (! (not {}) :named goal))", expr(&ob.goal));
    out.push_str("(check-sat)\n(get-unsat-core)\n");
    out
}
