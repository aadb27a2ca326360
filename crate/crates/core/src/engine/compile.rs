//! Lowering of typed expressions to ground formulas in negation normal form
//! over e-graph terms.

use std::collections::BTreeMap;
use std::rc::Rc;

use indexmap::IndexSet;

use super::egraph::{EGraph, Sym, TermId};
use crate::ir::*;

pub type Env = BTreeMap<VarId, TermId>;
pub type AtomId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Equality of two terms; the flag marks integer sort.
    Eq(TermId, TermId, bool),
    /// Boolean-valued term.
    Bool(TermId),
    /// `a - b <= k`
    Le(TermId, TermId, i128),
}

/// A universally quantified formula waiting for instantiation.
#[derive(Debug)]
pub struct QuantBody {
    pub binders: Vec<Binder>,
    pub body: TExpr,
    /// Polarity the body is asserted with (false for a negated `exists`).
    pub pol: bool,
    pub patterns: Vec<Vec<TExpr>>,
    pub env: Env,
}

#[derive(Clone, Debug)]
pub enum Form {
    True,
    False,
    Lit(AtomId, bool),
    And(Vec<Form>),
    Or(Vec<Form>),
    Forall(Rc<QuantBody>),
}

pub fn and(items: Vec<Form>) -> Form {
    let mut out = Vec::new();
    for f in items {
        match f {
            Form::True => {}
            Form::False => return Form::False,
            Form::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Form::True,
        1 => out.pop().expect("one item"),
        _ => Form::And(out),
    }
}

pub fn or(items: Vec<Form>) -> Form {
    let mut out = Vec::new();
    for f in items {
        match f {
            Form::False => {}
            Form::True => return Form::True,
            Form::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Form::False,
        1 => out.pop().expect("one item"),
        _ => Form::Or(out),
    }
}

/// Terms, atoms and fresh-name counters of one proof branch.
#[derive(Clone, Debug, Default)]
pub struct Store {
    pub eg: EGraph,
    atoms: IndexSet<Atom>,
    fresh: u32,
}

impl Store {
    pub fn atom(&self, id: AtomId) -> Atom {
        self.atoms[id as usize]
    }

    fn lit(&mut self, atom: Atom, pol: bool) -> Form {
        let (id, _) = self.atoms.insert_full(atom);
        Form::Lit(id as AtomId, pol)
    }

    pub fn const_name(v: &Var) -> String {
        format!("{}#{}", v.name, v.id.0)
    }

    fn constant(&mut self, v: &Var) -> TermId {
        let id = self.eg.intern(&Self::const_name(v));
        self.eg.add(Sym::Const(id), vec![])
    }

    fn fresh(&mut self, hint: &str) -> TermId {
        self.fresh += 1;
        let id = self.eg.intern(&format!("{hint}!{}", self.fresh));
        self.eg.add(Sym::Const(id), vec![])
    }

    fn is_num(&self, t: TermId) -> Option<i128> {
        match self.eg.node(t).sym {
            Sym::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn term(&mut self, e: &TExpr, env: &Env, side: &mut Vec<Form>) -> TermId {
        match &e.kind {
            TExprKind::Int(n) => self.eg.num(*n),
            TExprKind::Bool(b) => {
                if *b {
                    self.eg.true_term
                } else {
                    self.eg.false_term
                }
            }
            TExprKind::Var(v) => match env.get(&v.id) {
                Some(&t) => t,
                None => self.constant(v),
            },
            TExprKind::Call(f, args) => {
                let ts: Vec<TermId> = args.iter().map(|a| self.term(a, env, side)).collect();
                let id = self.eg.intern(&f.mangled());
                self.eg.add(Sym::Fn(id), ts)
            }
            TExprKind::Arith(op, a, b) => {
                let (ta, tb) = (self.term(a, env, side), self.term(b, env, side));
                self.eg.add(Sym::Arith(*op), vec![ta, tb])
            }
            TExprKind::Neg(a) => {
                let ta = self.term(a, env, side);
                self.eg.add(Sym::Neg, vec![ta])
            }
            TExprKind::Ite(c, a, b) => {
                let k = self.fresh("ite");
                let (ta, tb) = (self.term(a, env, side), self.term(b, env, side));
                let is_int = e.ty.is_int();
                let pos = self.form(c, true, env, side);
                let neg = self.form(c, false, env, side);
                let ka = self.eq_atom(k, ta, is_int, true);
                let kb = self.eq_atom(k, tb, is_int, true);
                side.push(or(vec![neg, ka]));
                side.push(or(vec![pos, kb]));
                k
            }
            _ => {
                // Boolean formula used as a value: name it.
                let k = self.fresh("b");
                let pos = self.form(e, true, env, side);
                let neg = self.form(e, false, env, side);
                let kt = self.lit(Atom::Bool(k), true);
                let kf = self.lit(Atom::Bool(k), false);
                side.push(or(vec![kf, pos]));
                side.push(or(vec![kt, neg]));
                k
            }
        }
    }

    fn eq_atom(&mut self, a: TermId, b: TermId, is_int: bool, pol: bool) -> Form {
        if a == b {
            return if pol { Form::True } else { Form::False };
        }
        if let (Some(x), Some(y)) = (self.is_num(a), self.is_num(b)) {
            return if (x == y) == pol { Form::True } else { Form::False };
        }
        self.lit(Atom::Eq(a.min(b), a.max(b), is_int), pol)
    }

    fn le_atom(&mut self, a: TermId, b: TermId, k: i128, pol: bool) -> Form {
        if let (Some(x), Some(y)) = (self.is_num(a), self.is_num(b)) {
            if let Some(d) = x.checked_sub(y) {
                return if (d <= k) == pol { Form::True } else { Form::False };
            }
        }
        self.lit(Atom::Le(a, b, k), pol)
    }

    /// `e` (when `pol`) or `!e` in negation normal form. Definitions of
    /// lifted `if` terms go to `side`.
    pub fn form(&mut self, e: &TExpr, pol: bool, env: &Env, side: &mut Vec<Form>) -> Form {
        match &e.kind {
            TExprKind::Bool(b) => {
                if *b == pol {
                    Form::True
                } else {
                    Form::False
                }
            }
            TExprKind::Var(_) | TExprKind::Call(..) => {
                let t = self.term(e, env, side);
                if t == self.eg.true_term || t == self.eg.false_term {
                    return if (t == self.eg.true_term) == pol { Form::True } else { Form::False };
                }
                self.lit(Atom::Bool(t), pol)
            }
            TExprKind::Eq(a, b) if a.ty.is_bool() => self.iff(a, b, pol, env, side),
            TExprKind::Eq(a, b) => {
                let (ta, tb) = (self.term(a, env, side), self.term(b, env, side));
                self.eq_atom(ta, tb, a.ty.is_int(), pol)
            }
            TExprKind::Cmp(op, a, b) => {
                let (ta, tb) = (self.term(a, env, side), self.term(b, env, side));
                match op {
                    CmpOp::Lt => self.le_atom(ta, tb, -1, pol),
                    CmpOp::Le => self.le_atom(ta, tb, 0, pol),
                    CmpOp::Gt => self.le_atom(tb, ta, -1, pol),
                    CmpOp::Ge => self.le_atom(tb, ta, 0, pol),
                }
            }
            TExprKind::Not(a) => self.form(a, !pol, env, side),
            TExprKind::Logic(op, a, b) => match (op, pol) {
                (Logic::And, true) | (Logic::Or, false) => {
                    let fa = self.form(a, pol, env, side);
                    let fb = self.form(b, pol, env, side);
                    and(vec![fa, fb])
                }
                (Logic::Or, true) | (Logic::And, false) => {
                    let fa = self.form(a, pol, env, side);
                    let fb = self.form(b, pol, env, side);
                    or(vec![fa, fb])
                }
                (Logic::Implies, true) => {
                    let fa = self.form(a, false, env, side);
                    let fb = self.form(b, true, env, side);
                    or(vec![fa, fb])
                }
                (Logic::Implies, false) => {
                    let fa = self.form(a, true, env, side);
                    let fb = self.form(b, false, env, side);
                    and(vec![fa, fb])
                }
                (Logic::Iff, _) => self.iff(a, b, pol, env, side),
            },
            TExprKind::Ite(c, a, b) => {
                let pc = self.form(c, true, env, side);
                let nc = self.form(c, false, env, side);
                let fa = self.form(a, pol, env, side);
                let fb = self.form(b, pol, env, side);
                and(vec![or(vec![nc, fa]), or(vec![pc, fb])])
            }
            TExprKind::Quant(q) => {
                if q.forall == pol {
                    let patterns = q
                        .triggers
                        .as_ref()
                        .map(|s| s.groups.iter().map(|g| g.exprs.clone()).collect())
                        .unwrap_or_default();
                    Form::Forall(Rc::new(QuantBody {
                        binders: q.binders.clone(),
                        body: q.body.clone(),
                        pol,
                        patterns,
                        env: env.clone(),
                    }))
                } else {
                    let mut inner = env.clone();
                    for b in &q.binders {
                        let k = self.fresh(&b.var.name);
                        inner.insert(b.var.id, k);
                    }
                    self.form(&q.body, pol, &inner, side)
                }
            }
            TExprKind::Int(_) | TExprKind::Arith(..) | TExprKind::Neg(_) => {
                debug_assert!(false, "integer expression in formula position");
                Form::False
            }
        }
    }

    fn iff(&mut self, a: &TExpr, b: &TExpr, pol: bool, env: &Env, side: &mut Vec<Form>) -> Form {
        let pa = self.form(a, true, env, side);
        let na = self.form(a, false, env, side);
        let pb = self.form(b, pol, env, side);
        let nb = self.form(b, !pol, env, side);
        and(vec![or(vec![na, pb]), or(vec![pa, nb])])
    }

    /// Body of `q` with its binders mapped to `args`, plus side definitions.
    pub fn instance(&mut self, q: &QuantBody, args: &[TermId]) -> Form {
        let mut env = q.env.clone();
        for (b, &t) in q.binders.iter().zip(args) {
            env.insert(b.var.id, t);
        }
        let mut side = Vec::new();
        let f = self.form(&q.body, q.pol, &env, &mut side);
        side.push(f);
        and(side)
    }

    /// Top-level assertion (`pol` true) or refutation target.
    pub fn ground(&mut self, e: &TExpr, pol: bool) -> Form {
        let mut side = Vec::new();
        let f = self.form(e, pol, &Env::new(), &mut side);
        side.push(f);
        and(side)
    }
}
