//! Branch state and the refutation search.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;
use std::time::Instant;

use super::arith::{self, ArithResult, Constraint, Diseq, LinExpr};
use super::compile::{Atom, AtomId, Form, QuantBody, Store};
use super::egraph::{Sym, TermId};
use super::reason::Reason;
use super::{Limits, UnknownReason};
use crate::ir::*;

/// Counters shared by every branch of one `prove` call.
#[derive(Debug)]
pub(crate) struct Run {
    pub limits: Limits,
    pub start: Instant,
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub instantiations: u64,
    pub splits: u64,
    pub rounds: u32,
    /// First bit used for decision levels.
    pub decision_base: usize,
}

impl Run {
    pub fn new(limits: Limits, decision_base: usize) -> Self {
        Run {
            limits,
            start: Instant::now(),
            labels: Vec::new(),
            counts: Vec::new(),
            instantiations: 0,
            splits: 0,
            rounds: 0,
            decision_base,
        }
    }

    pub fn label(&mut self, name: &str) -> usize {
        if let Some(i) = self.labels.iter().position(|l| l == name) {
            return i;
        }
        self.labels.push(name.to_string());
        self.counts.push(0);
        self.labels.len() - 1
    }

    fn out_of_time(&self) -> bool {
        self.start.elapsed().as_millis() as u64 > self.limits.time_budget_ms
    }
}

#[derive(Clone, Debug)]
pub(crate) struct QuantEntry {
    pub body: Rc<QuantBody>,
    pub reason: Reason,
    pub counter: usize,
}

#[derive(Clone, Debug)]
struct Clause {
    forms: Vec<Form>,
    reason: Reason,
    counter: usize,
}

pub(crate) enum Round {
    Count(usize),
    Conflict(usize, Reason),
    Stop(UnknownReason),
}

/// Result of exploring a branch.
#[derive(Clone, Debug)]
pub(crate) enum Branch {
    Refuted(Reason),
    Saturated,
    Unknown(UnknownReason),
}

/// One proof branch. Cloned on case splits; counters are shared.
#[derive(Clone, Debug)]
pub struct ProverState {
    pub(crate) store: Store,
    assign: Vec<Option<(bool, Reason)>>,
    clauses: Vec<Clause>,
    pub(crate) quants: Vec<QuantEntry>,
    log: HashSet<(usize, Vec<TermId>)>,
    arith_lits: Vec<AtomId>,
    rounds: u32,
    depth: usize,
    pub(crate) run: Rc<RefCell<Run>>,
}

impl ProverState {
    pub(crate) fn new(run: Run) -> Self {
        ProverState {
            store: Store::default(),
            assign: Vec::new(),
            clauses: Vec::new(),
            quants: Vec::new(),
            log: HashSet::new(),
            arith_lits: Vec::new(),
            rounds: 0,
            depth: 0,
            run: Rc::new(RefCell::new(run)),
        }
    }

    pub(crate) fn assert_form(&mut self, f: Form, reason: &Reason, counter: usize) -> Result<(), Reason> {
        match f {
            Form::True => Ok(()),
            Form::False => Err(reason.clone()),
            Form::Lit(a, pol) => self.assign_lit(a, pol, reason),
            Form::And(fs) => {
                for f in fs {
                    self.assert_form(f, reason, counter)?;
                }
                Ok(())
            }
            Form::Or(forms) => {
                self.clauses.push(Clause {
                    forms,
                    reason: reason.clone(),
                    counter,
                });
                Ok(())
            }
            Form::Forall(body) => {
                self.quants.push(QuantEntry {
                    body,
                    reason: reason.clone(),
                    counter,
                });
                Ok(())
            }
        }
    }

    fn assign_lit(&mut self, a: AtomId, pol: bool, reason: &Reason) -> Result<(), Reason> {
        let i = a as usize;
        if self.assign.len() <= i {
            self.assign.resize(i + 1, None);
        }
        if let Some((v, r)) = &self.assign[i] {
            return if *v == pol { Ok(()) } else { Err(r.clone().union(reason)) };
        }
        self.assign[i] = Some((pol, reason.clone()));
        let atom = self.store.atom(a);
        let eg = &mut self.store.eg;
        match atom {
            Atom::Eq(x, y, is_int) => {
                if pol {
                    eg.merge(x, y, reason.clone());
                } else {
                    eg.assert_diseq(x, y, reason.clone());
                    if is_int {
                        self.arith_lits.push(a);
                    }
                }
            }
            Atom::Bool(t) => {
                let target = if pol { eg.true_term } else { eg.false_term };
                eg.merge(t, target, reason.clone());
            }
            Atom::Le(..) => self.arith_lits.push(a),
        }
        match self.store.eg.conflict() {
            Some(r) => Err(r.clone()),
            None => Ok(()),
        }
    }

    /// Truth value of `f` under the current assignment and term graph.
    fn eval(&self, f: &Form) -> Option<(bool, Reason)> {
        match f {
            Form::True => Some((true, Reason::empty())),
            Form::False => Some((false, Reason::empty())),
            Form::Lit(a, pol) => {
                let (v, r) = self.atom_value(*a)?;
                Some((v == *pol, r))
            }
            Form::And(fs) | Form::Or(fs) => {
                let is_and = matches!(f, Form::And(_));
                let mut all = Reason::empty();
                let mut open = false;
                for g in fs {
                    match self.eval(g) {
                        Some((v, r)) if v != is_and => return Some((v, r)),
                        Some((_, r)) => all.union_with(&r),
                        None => open = true,
                    }
                }
                if open {
                    None
                } else {
                    Some((is_and, all))
                }
            }
            Form::Forall(_) => None,
        }
    }

    fn atom_value(&self, a: AtomId) -> Option<(bool, Reason)> {
        if let Some(Some((v, r))) = self.assign.get(a as usize) {
            return Some((*v, r.clone()));
        }
        let eg = &self.store.eg;
        match self.store.atom(a) {
            Atom::Eq(x, y, _) => {
                if eg.find(x) == eg.find(y) {
                    Some((true, eg.explain(x, y)))
                } else {
                    eg.diseq_reason(x, y).map(|r| (false, r))
                }
            }
            Atom::Bool(t) => {
                let c = eg.find(t);
                if c == eg.find(eg.true_term) {
                    Some((true, eg.explain(t, eg.true_term)))
                } else if c == eg.find(eg.false_term) {
                    Some((false, eg.explain(t, eg.false_term)))
                } else {
                    None
                }
            }
            Atom::Le(x, y, k) => {
                let ((vx, nx), (vy, ny)) = (eg.num_of(x)?, eg.num_of(y)?);
                let d = vx.checked_sub(vy)?;
                Some((d <= k, eg.explain(x, nx).union(&eg.explain(y, ny))))
            }
        }
    }

    /// Unit propagation over pending disjunctions.
    fn propagate(&mut self) -> Result<(), Reason> {
        loop {
            let mut changed = false;
            let pending = std::mem::take(&mut self.clauses);
            let mut keep = Vec::new();
            for c in pending {
                let mut reason = c.reason.clone();
                let mut open = Vec::new();
                let mut satisfied = false;
                for f in c.forms {
                    match self.eval(&f) {
                        Some((true, _)) => {
                            satisfied = true;
                            break;
                        }
                        Some((false, r)) => reason.union_with(&r),
                        None => open.push(f),
                    }
                }
                if satisfied {
                    continue;
                }
                match open.len() {
                    0 => return Err(reason),
                    1 => {
                        changed = true;
                        let f = open.pop().expect("one open disjunct");
                        self.assert_form(f, &reason, c.counter)?;
                    }
                    _ => keep.push(Clause {
                        forms: open,
                        reason,
                        counter: c.counter,
                    }),
                }
            }
            let added = std::mem::replace(&mut self.clauses, keep);
            self.clauses.extend(added);
            if !changed {
                return Ok(());
            }
        }
    }

    fn lin_of(&self, t: TermId) -> (LinExpr, Reason) {
        let eg = &self.store.eg;
        match eg.num_of(t) {
            Some((v, n)) => (LinExpr::constant(v), eg.explain(t, n)),
            None => {
                let rep = eg.find(t);
                (LinExpr::var(rep), eg.explain(t, rep))
            }
        }
    }

    fn arith_check(&self) -> Result<(), Reason> {
        let (cs, diseqs) = self.arith_system();
        match arith::arith_consistent(&cs, &diseqs, arith::DEFAULT_ELIMINATION_CAP) {
            ArithResult::Inconsistent(r) => Err(r),
            _ => Ok(()),
        }
    }

    /// Equalities between integer arguments of otherwise congruent
    /// applications that the arithmetic constraints force.
    fn arith_equalities(&self) -> Vec<(TermId, TermId, Reason)> {
        const MAX_PAIRS: usize = 64;
        let (cs, diseqs) = self.arith_system();
        let eg = &self.store.eg;
        let mut arith_vars: HashSet<u32> = HashSet::new();
        for e in cs.iter().map(|c| &c.expr).chain(diseqs.iter().map(|d| &d.expr)) {
            arith_vars.extend(e.coeffs.keys().copied());
        }
        let is_arith = |rep: TermId| arith_vars.contains(&rep) || eg.num_of(rep).is_some();
        let mut slots: BTreeMap<(Sym, usize, Vec<TermId>), Vec<TermId>> = BTreeMap::new();
        for t in 0..eg.len() as TermId {
            let node = eg.node(t);
            if !matches!(node.sym, Sym::Fn(_)) {
                continue;
            }
            let reps: Vec<TermId> = node.args.iter().map(|&a| eg.find(a)).collect();
            for p in 0..reps.len() {
                if !is_arith(reps[p]) {
                    continue;
                }
                let mut rest = reps.clone();
                rest.remove(p);
                let list = slots.entry((node.sym, p, rest)).or_default();
                if !list.contains(&reps[p]) {
                    list.push(reps[p]);
                }
            }
        }
        let mut out = Vec::new();
        let mut tried = 0;
        let mut done: HashSet<(TermId, TermId)> = HashSet::new();
        for list in slots.values() {
            for i in 0..list.len() {
                for j in i + 1..list.len() {
                    let (a, b) = (list[i], list[j]);
                    if !done.insert((a.min(b), a.max(b))) {
                        continue;
                    }
                    if let (Some(_), Some(_)) = (eg.num_of(a), eg.num_of(b)) {
                        continue;
                    }
                    tried += 1;
                    if tried > MAX_PAIRS {
                        return out;
                    }
                    let ((la, ra), (lb, rb)) = (self.lin_of(a), self.lin_of(b));
                    let mut reason = ra.union(&rb);
                    let mut forced = true;
                    for (x, y) in [(&la, &lb), (&lb, &la)] {
                        // x < y impossible?
                        let Some(e) = x.add_scaled(-1, y).and_then(|e| e.add_scaled(1, &LinExpr::constant(1))) else {
                            forced = false;
                            break;
                        };
                        let mut sys = cs.clone();
                        sys.push(Constraint::le(e, Reason::empty()));
                        match arith::arith_consistent(&sys, &[], arith::DEFAULT_ELIMINATION_CAP) {
                            ArithResult::Inconsistent(r) => reason.union_with(&r),
                            _ => {
                                forced = false;
                                break;
                            }
                        }
                    }
                    if forced {
                        out.push((a, b, reason));
                    }
                }
            }
        }
        out
    }

    fn arith_system(&self) -> (Vec<Constraint>, Vec<Diseq>) {
        let eg = &self.store.eg;
        let mut cs = Vec::new();
        let mut fresh = u32::MAX;
        let add_def = |cs: &mut Vec<Constraint>, e: Option<LinExpr>, r: Reason| {
            if let Some(e) = e {
                cs.push(Constraint::eq(e, r));
            }
        };
        for t in 0..eg.len() as TermId {
            let node = eg.node(t);
            if !node.sym.is_interpreted() {
                continue;
            }
            let (lt, rt) = self.lin_of(t);
            let args: Vec<(LinExpr, Reason)> = node.args.iter().map(|&a| self.lin_of(a)).collect();
            let mut r = rt;
            for (_, ra) in &args {
                r.union_with(ra);
            }
            match node.sym {
                Sym::Neg => add_def(&mut cs, lt.add_scaled(1, &args[0].0), r),
                Sym::Arith(ArithOp::Add) => {
                    add_def(&mut cs, lt.add_scaled(-1, &args[0].0).and_then(|e| e.add_scaled(-1, &args[1].0)), r)
                }
                Sym::Arith(ArithOp::Sub) => {
                    add_def(&mut cs, lt.add_scaled(-1, &args[0].0).and_then(|e| e.add_scaled(1, &args[1].0)), r)
                }
                Sym::Arith(ArithOp::Mul) => {
                    let scaled = match (args[0].0.is_constant(), args[1].0.is_constant()) {
                        (true, _) => Some((args[0].0.konst, &args[1].0)),
                        (_, true) => Some((args[1].0.konst, &args[0].0)),
                        _ => None,
                    };
                    if let Some((c, other)) = scaled {
                        add_def(&mut cs, lt.add_scaled(-c, other), r);
                    }
                }
                Sym::Arith(op @ (ArithOp::Div | ArithOp::Mod)) => {
                    if !args[1].0.is_constant() || args[1].0.konst == 0 {
                        continue;
                    }
                    let c = args[1].0.konst;
                    fresh -= 1;
                    let aux = LinExpr::var(fresh);
                    // a = c*q + r with 0 <= r < |c|
                    let (q, rem) = if op == ArithOp::Div { (lt, aux) } else { (aux, lt) };
                    let def = args[0].0.add_scaled(-c, &q).and_then(|e| e.add_scaled(-1, &rem));
                    add_def(&mut cs, def, r.clone());
                    if let (Some(lo), Some(hi)) = (rem.scale(-1), rem.add_scaled(1, &LinExpr::constant(-(c.abs() - 1)))) {
                        cs.push(Constraint::le(lo, r.clone()));
                        cs.push(Constraint::le(hi, r));
                    }
                }
                _ => {}
            }
        }
        let mut diseqs = Vec::new();
        for &a in &self.arith_lits {
            let (pol, lr) = self.assign[a as usize].clone().expect("arith literal is assigned");
            match self.store.atom(a) {
                Atom::Le(x, y, k) => {
                    let ((lx, rx), (ly, ry)) = (self.lin_of(x), self.lin_of(y));
                    let r = lr.union(&rx).union(&ry);
                    // pol: x - y - k <= 0, else y - x + k + 1 <= 0
                    let e = if pol {
                        lx.add_scaled(-1, &ly).and_then(|e| e.add_scaled(1, &LinExpr::constant(-k)))
                    } else {
                        ly.add_scaled(-1, &lx).and_then(|e| e.add_scaled(1, &LinExpr::constant(k + 1)))
                    };
                    if let Some(e) = e {
                        cs.push(Constraint::le(e, r));
                    }
                }
                Atom::Eq(x, y, _) => {
                    let ((lx, rx), (ly, ry)) = (self.lin_of(x), self.lin_of(y));
                    if let Some(e) = lx.add_scaled(-1, &ly) {
                        diseqs.push(Diseq {
                            expr: e,
                            reason: lr.union(&rx).union(&ry),
                        });
                    }
                }
                Atom::Bool(_) => {}
            }
        }
        (cs, diseqs)
    }

    /// Substitutions (binder order, class representatives) under which every
    /// pattern of `group` matches an existing term.
    pub(crate) fn ematch_group(&self, q: &QuantBody, group: &[TExpr], index: &HashMap<Sym, Vec<TermId>>) -> Vec<Vec<TermId>> {
        let mut substs: Vec<BTreeMap<VarId, TermId>> = vec![BTreeMap::new()];
        for pat in group {
            let Some(head) = self.head_sym(pat) else { return Vec::new() };
            let mut next = Vec::new();
            for s in &substs {
                for &t in index.get(&head).map(Vec::as_slice).unwrap_or(&[]) {
                    self.match_node(q, pat, t, s, &mut next);
                }
            }
            substs = next;
            if substs.is_empty() {
                return Vec::new();
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in substs {
            let args: Option<Vec<TermId>> = q.binders.iter().map(|b| s.get(&b.var.id).copied()).collect();
            if let Some(args) = args {
                if seen.insert(args.clone()) {
                    out.push(args);
                }
            }
        }
        out
    }

    fn head_sym(&self, pat: &TExpr) -> Option<Sym> {
        match &pat.kind {
            TExprKind::Call(f, _) => self.store.eg.name_id(&f.mangled()).map(Sym::Fn),
            TExprKind::Arith(op, ..) => Some(Sym::Arith(*op)),
            TExprKind::Neg(_) => Some(Sym::Neg),
            _ => None,
        }
    }

    fn match_node(&self, q: &QuantBody, pat: &TExpr, t: TermId, s: &BTreeMap<VarId, TermId>, out: &mut Vec<BTreeMap<VarId, TermId>>) {
        let node = self.store.eg.node(t);
        if Some(node.sym) != self.head_sym(pat) {
            return;
        }
        let pargs: Vec<&TExpr> = pat.children();
        if pargs.len() != node.args.len() {
            return;
        }
        let mut partial = vec![s.clone()];
        for (p, &a) in pargs.iter().zip(&node.args) {
            let cls = self.store.eg.find(a);
            let mut next = Vec::new();
            for s in &partial {
                self.match_class(q, p, cls, s, &mut next);
            }
            partial = next;
            if partial.is_empty() {
                return;
            }
        }
        out.extend(partial);
    }

    fn match_class(&self, q: &QuantBody, pat: &TExpr, cls: TermId, s: &BTreeMap<VarId, TermId>, out: &mut Vec<BTreeMap<VarId, TermId>>) {
        let eg = &self.store.eg;
        match &pat.kind {
            TExprKind::Var(v) if q.binders.iter().any(|b| b.var.id == v.id) => match s.get(&v.id) {
                Some(&bound) => {
                    if eg.find(bound) == cls {
                        out.push(s.clone());
                    }
                }
                None => {
                    let mut s2 = s.clone();
                    s2.insert(v.id, cls);
                    out.push(s2);
                }
            },
            TExprKind::Var(v) => {
                let t = match q.env.get(&v.id) {
                    Some(&t) => Some(t),
                    None => eg.name_id(&Store::const_name(v)).and_then(|id| eg.lookup(Sym::Const(id), &[])),
                };
                if t.is_some_and(|t| eg.find(t) == cls) {
                    out.push(s.clone());
                }
            }
            TExprKind::Int(n) => {
                if eg.num_of(cls).map(|p| p.0) == Some(*n) {
                    out.push(s.clone());
                }
            }
            TExprKind::Bool(b) => {
                let t = if *b { eg.true_term } else { eg.false_term };
                if eg.find(t) == cls {
                    out.push(s.clone());
                }
            }
            TExprKind::Call(..) | TExprKind::Arith(..) | TExprKind::Neg(_) => {
                for &m in eg.members(cls) {
                    self.match_node(q, pat, m, s, out);
                }
            }
            _ => {}
        }
    }

    fn term_index(&self) -> HashMap<Sym, Vec<TermId>> {
        let eg = &self.store.eg;
        let mut index: HashMap<Sym, Vec<TermId>> = HashMap::new();
        for t in 0..eg.len() as TermId {
            let sym = eg.node(t).sym;
            if matches!(sym, Sym::Fn(_) | Sym::Arith(_) | Sym::Neg) {
                index.entry(sym).or_default().push(t);
            }
        }
        index
    }

    fn canonicalize_log(&mut self) {
        let eg = &self.store.eg;
        self.log = self
            .log
            .drain()
            .map(|(q, args)| (q, args.iter().map(|&a| eg.find(a)).collect()))
            .collect();
    }

    /// Matches of one pattern group of quantifier `qi` not yet instantiated.
    pub(crate) fn ematch_quant(&mut self, qi: usize, group: &[TExpr]) -> Vec<Vec<TermId>> {
        self.canonicalize_log();
        let index = self.term_index();
        let body = self.quants[qi].body.clone();
        self.ematch_group(&body, group, &index)
            .into_iter()
            .filter(|args| !self.log.contains(&(qi, args.clone())))
            .collect()
    }

    /// New (quantifier, substitution) pairs against the current term graph.
    pub(crate) fn new_matches(&mut self) -> Vec<(usize, Vec<TermId>)> {
        self.canonicalize_log();
        let index = self.term_index();
        let mut out = Vec::new();
        let mut fresh = HashSet::new();
        for (qi, q) in self.quants.iter().enumerate() {
            for group in &q.body.patterns {
                for args in self.ematch_group(&q.body, group, &index) {
                    let key = (qi, args);
                    if !self.log.contains(&key) && fresh.insert(key.clone()) {
                        out.push(key);
                    }
                }
            }
        }
        out
    }

    /// One instantiation round. `Ok(n)` is the number of new instances.
    pub(crate) fn instantiate_round(&mut self) -> Round {
        let matches = self.new_matches();
        if matches.is_empty() {
            return Round::Count(0);
        }
        let max_rounds = self.run.borrow().limits.max_rounds;
        if self.rounds >= max_rounds {
            return Round::Stop(UnknownReason::Rounds);
        }
        self.rounds += 1;
        {
            let mut run = self.run.borrow_mut();
            run.rounds = run.rounds.max(self.rounds);
        }
        let mut n = 0;
        for (qi, args) in matches {
            {
                let mut run = self.run.borrow_mut();
                if run.instantiations >= run.limits.max_instantiations {
                    return Round::Stop(UnknownReason::Instantiations);
                }
                run.instantiations += 1;
                let c = self.quants[qi].counter;
                run.counts[c] += 1;
            }
            self.log.insert((qi, args.clone()));
            let entry = self.quants[qi].clone();
            let f = self.store.instance(&entry.body, &args);
            n += 1;
            if let Err(r) = self.assert_form(f, &entry.reason, entry.counter) {
                return Round::Conflict(n, r);
            }
        }
        Round::Count(n)
    }

    /// Explore this branch to a refutation, saturation or a limit.
    pub(crate) fn search(mut self) -> Branch {
        loop {
            if self.run.borrow().out_of_time() {
                return Branch::Unknown(UnknownReason::Time);
            }
            if let Err(r) = self.propagate() {
                return Branch::Refuted(r);
            }
            if let Err(r) = self.arith_check() {
                return Branch::Refuted(r);
            }
            if !self.clauses.is_empty() {
                return self.split();
            }
            let eqs = self.arith_equalities();
            if !eqs.is_empty() {
                for (a, b, r) in eqs {
                    self.store.eg.merge(a, b, r);
                }
                if let Some(r) = self.store.eg.conflict() {
                    return Branch::Refuted(r.clone());
                }
                continue;
            }
            match self.instantiate_round() {
                Round::Count(0) => return Branch::Saturated,
                Round::Count(_) => {}
                Round::Conflict(_, r) => return Branch::Refuted(r),
                Round::Stop(u) => return Branch::Unknown(u),
            }
        }
    }

    fn split(mut self) -> Branch {
        let clause = self.clauses.remove(0);
        let bit = self.run.borrow().decision_base + self.depth;
        let mut combined = clause.reason.clone();
        let mut chosen = clause.reason.clone();
        chosen.insert(bit);
        let counter = clause.counter;
        for f in clause.forms {
            {
                let mut run = self.run.borrow_mut();
                run.splits += 1;
                if run.splits > run.limits.max_splits {
                    return Branch::Unknown(UnknownReason::Splits);
                }
            }
            let mut b = self.clone();
            b.depth += 1;
            let res = match b.assert_form(f, &chosen, counter) {
                Err(r) => Branch::Refuted(r),
                Ok(()) => b.search(),
            };
            match res {
                Branch::Refuted(mut r) => {
                    if !r.contains(bit) {
                        return Branch::Refuted(r);
                    }
                    r.remove(bit);
                    combined.union_with(&r);
                }
                other => return other,
            }
        }
        Branch::Refuted(combined)
    }

    /// Register a quantified formula for instantiation.
    pub(crate) fn add_quant(&mut self, body: QuantBody, reason: Reason, counter: usize) {
        self.quants.push(QuantEntry {
            body: Rc::new(body),
            reason,
            counter,
        });
    }

    pub(crate) fn assert_expr(&mut self, e: &TExpr, pol: bool, reason: &Reason, counter: usize) -> Result<(), Reason> {
        let f = self.store.ground(e, pol);
        self.assert_form(f, reason, counter)
    }

    pub fn term_count(&self) -> usize {
        self.store.eg.len()
    }
}
