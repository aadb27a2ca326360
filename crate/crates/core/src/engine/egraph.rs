//! Hash-consed ground terms with congruence closure and a proof forest for
//! explanations.

use std::collections::{HashMap, HashSet};

use super::reason::Reason;
use crate::ir::ArithOp;

pub type TermId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Num(i128),
    True,
    False,
    /// Free variable of the obligation, or a skolem / ite constant.
    Const(u32),
    Fn(u32),
    Arith(ArithOp),
    Neg,
}

impl Sym {
    pub fn is_interpreted(self) -> bool {
        matches!(self, Sym::Arith(_) | Sym::Neg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub sym: Sym,
    pub args: Vec<TermId>,
}

#[derive(Clone, Debug)]
enum Just {
    Given(Reason),
    Congruence(TermId, TermId),
}

#[derive(Clone, Debug)]
pub struct EGraph {
    nodes: Vec<Node>,
    memo: HashMap<Node, TermId>,
    uf: Vec<TermId>,
    size: Vec<u32>,
    members: Vec<Vec<TermId>>,
    uses: Vec<Vec<TermId>>,
    sig: HashMap<(Sym, Vec<TermId>), TermId>,
    proof: Vec<Option<(TermId, Just)>>,
    num: Vec<Option<TermId>>,
    diseqs: Vec<(TermId, TermId, Reason)>,
    names: Vec<String>,
    name_ids: HashMap<String, u32>,
    pending: Vec<(TermId, TermId, Just)>,
    conflict: Option<Reason>,
    pub true_term: TermId,
    pub false_term: TermId,
}

impl Default for EGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl EGraph {
    pub fn new() -> Self {
        let mut g = EGraph {
            nodes: Vec::new(),
            memo: HashMap::new(),
            uf: Vec::new(),
            size: Vec::new(),
            members: Vec::new(),
            uses: Vec::new(),
            sig: HashMap::new(),
            proof: Vec::new(),
            num: Vec::new(),
            diseqs: Vec::new(),
            names: Vec::new(),
            name_ids: HashMap::new(),
            pending: Vec::new(),
            conflict: None,
            true_term: 0,
            false_term: 0,
        };
        g.true_term = g.add(Sym::True, vec![]);
        g.false_term = g.add(Sym::False, vec![]);
        g.diseqs.push((g.true_term, g.false_term, Reason::empty()));
        g
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.name_ids.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.name_ids.insert(name.to_string(), i);
        i
    }

    pub fn name_id(&self, name: &str) -> Option<u32> {
        self.name_ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.nodes[t as usize]
    }

    pub fn find(&self, mut t: TermId) -> TermId {
        while self.uf[t as usize] != t {
            t = self.uf[t as usize];
        }
        t
    }

    pub fn members(&self, rep: TermId) -> &[TermId] {
        &self.members[rep as usize]
    }

    /// Numeral in the class of `t`, if any.
    pub fn num_of(&self, t: TermId) -> Option<(i128, TermId)> {
        let n = self.num[self.find(t) as usize]?;
        match self.nodes[n as usize].sym {
            Sym::Num(v) => Some((v, n)),
            _ => None,
        }
    }

    pub fn conflict(&self) -> Option<&Reason> {
        self.conflict.as_ref()
    }

    /// Existing term with exactly this structure.
    pub fn lookup(&self, sym: Sym, args: &[TermId]) -> Option<TermId> {
        self.memo
            .get(&Node {
                sym,
                args: args.to_vec(),
            })
            .copied()
    }

    /// Existing term congruent to `sym(args)`.
    pub fn lookup_congruent(&self, sym: Sym, args: &[TermId]) -> Option<TermId> {
        let canon: Vec<TermId> = args.iter().map(|&a| self.find(a)).collect();
        self.sig.get(&(sym, canon)).copied()
    }

    pub fn add(&mut self, sym: Sym, args: Vec<TermId>) -> TermId {
        let t = self.intern_node(sym, args);
        self.rebuild();
        t
    }

    pub fn num(&mut self, n: i128) -> TermId {
        self.add(Sym::Num(n), vec![])
    }

    fn intern_node(&mut self, sym: Sym, args: Vec<TermId>) -> TermId {
        let node = Node { sym, args };
        if let Some(&t) = self.memo.get(&node) {
            return t;
        }
        let t = self.nodes.len() as TermId;
        let canon: Vec<TermId> = node.args.iter().map(|&a| self.find(a)).collect();
        let mut seen = Vec::new();
        for &r in &canon {
            if !seen.contains(&r) {
                seen.push(r);
                self.uses[r as usize].push(t);
            }
        }
        self.nodes.push(node.clone());
        self.memo.insert(node, t);
        self.uf.push(t);
        self.size.push(1);
        self.members.push(vec![t]);
        self.uses.push(Vec::new());
        self.proof.push(None);
        self.num.push(if matches!(sym, Sym::Num(_)) { Some(t) } else { None });
        match self.sig.get(&(sym, canon.clone())) {
            Some(&q) => self.pending.push((t, q, Just::Congruence(t, q))),
            None => {
                self.sig.insert((sym, canon), t);
            }
        }
        if sym.is_interpreted() {
            self.try_fold(t);
        }
        t
    }

    pub fn merge(&mut self, a: TermId, b: TermId, reason: Reason) {
        self.pending.push((a, b, Just::Given(reason)));
        self.rebuild();
    }

    pub fn assert_diseq(&mut self, a: TermId, b: TermId, reason: Reason) {
        if self.conflict.is_some() {
            return;
        }
        if self.find(a) == self.find(b) {
            self.conflict = Some(reason.union(&self.explain(a, b)));
            return;
        }
        self.diseqs.push((a, b, reason));
    }

    /// Reason for `a != b` if it is known.
    pub fn diseq_reason(&self, a: TermId, b: TermId) -> Option<Reason> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if let (Some((x, nx)), Some((y, ny))) = (self.num_of(a), self.num_of(b)) {
            if x != y {
                return Some(self.explain(a, nx).union(&self.explain(b, ny)));
            }
        }
        for (x, y, r) in &self.diseqs {
            let (rx, ry) = (self.find(*x), self.find(*y));
            if (rx == ra && ry == rb) || (rx == rb && ry == ra) {
                let (ex, ey) = if rx == ra { (*x, *y) } else { (*y, *x) };
                return Some(r.clone().union(&self.explain(a, ex)).union(&self.explain(b, ey)));
            }
        }
        None
    }

    fn rebuild(&mut self) {
        while let Some((a, b, just)) = self.pending.pop() {
            if self.conflict.is_some() {
                self.pending.clear();
                return;
            }
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            self.reroot(a);
            self.proof[a as usize] = Some((b, just));
            let (small, big) = if self.size[ra as usize] < self.size[rb as usize] {
                (ra, rb)
            } else {
                (rb, ra)
            };
            self.uf[small as usize] = big;
            self.size[big as usize] += self.size[small as usize];
            let moved = std::mem::take(&mut self.members[small as usize]);
            self.members[big as usize].extend(moved);
            match (self.num[small as usize], self.num[big as usize]) {
                (Some(x), Some(y)) => {
                    if self.nodes[x as usize].sym != self.nodes[y as usize].sym {
                        self.conflict = Some(self.explain(x, y));
                        self.pending.clear();
                        return;
                    }
                }
                (Some(x), None) => self.num[big as usize] = Some(x),
                _ => {}
            }
            let parents = std::mem::take(&mut self.uses[small as usize]);
            for &p in &parents {
                let node = &self.nodes[p as usize];
                let key = (node.sym, node.args.iter().map(|&x| self.find(x)).collect::<Vec<_>>());
                match self.sig.get(&key) {
                    Some(&q) if self.find(q) != self.find(p) => self.pending.push((p, q, Just::Congruence(p, q))),
                    Some(_) => {}
                    None => {
                        self.sig.insert(key, p);
                    }
                }
            }
            self.uses[big as usize].extend(parents.iter().copied());
            let folding: Vec<TermId> = self.uses[big as usize]
                .iter()
                .copied()
                .filter(|&p| self.nodes[p as usize].sym.is_interpreted())
                .collect();
            for p in folding {
                self.try_fold(p);
            }
        }
        if self.conflict.is_none() {
            self.check_diseqs();
        }
    }

    fn check_diseqs(&mut self) {
        for (x, y, r) in &self.diseqs {
            if self.find(*x) == self.find(*y) {
                self.conflict = Some(r.clone().union(&self.explain(*x, *y)));
                return;
            }
        }
    }

    /// Evaluate an interpreted node whose arguments are all numerals.
    fn try_fold(&mut self, t: TermId) {
        let node = self.nodes[t as usize].clone();
        let vals: Option<Vec<(i128, TermId)>> = node.args.iter().map(|&a| self.num_of(a)).collect();
        let Some(vals) = vals else { return };
        let v = match (node.sym, vals.as_slice()) {
            (Sym::Neg, [(a, _)]) => a.checked_neg(),
            (Sym::Arith(op), [(a, _), (b, _)]) => eval_arith(op, *a, *b),
            _ => None,
        };
        let Some(v) = v else { return };
        if let Some((cur, _)) = self.num_of(t) {
            if cur == v {
                return;
            }
        }
        let mut reason = Reason::empty();
        for (&a, (_, n)) in node.args.iter().zip(&vals) {
            reason.union_with(&self.explain(a, *n));
        }
        let n = self.intern_node(Sym::Num(v), vec![]);
        self.pending.push((t, n, Just::Given(reason)));
    }

    /// Make `t` the root of its proof tree.
    fn reroot(&mut self, t: TermId) {
        let mut cur = t;
        let mut prev: Option<(TermId, Just)> = None;
        loop {
            let next = self.proof[cur as usize].take();
            self.proof[cur as usize] = prev;
            match next {
                None => break,
                Some((p, j)) => {
                    prev = Some((cur, j));
                    cur = p;
                }
            }
        }
    }

    /// Union of the reasons on the proof path between `a` and `b`, which must
    /// be in the same class.
    pub fn explain(&self, a: TermId, b: TermId) -> Reason {
        let mut out = Reason::empty();
        let mut seen = HashSet::new();
        self.explain_into(a, b, &mut out, &mut seen);
        out
    }

    fn explain_into(&self, a: TermId, b: TermId, out: &mut Reason, seen: &mut HashSet<(TermId, TermId)>) {
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            return;
        }
        let path_a = self.ancestors(a);
        let path_b = self.ancestors(b);
        let on_b: HashSet<TermId> = path_b.iter().copied().collect();
        let Some(lca) = path_a.iter().copied().find(|t| on_b.contains(t)) else {
            debug_assert!(false, "explain on terms of different classes");
            return;
        };
        for path in [&path_a, &path_b] {
            for &t in path.iter().take_while(|&&t| t != lca) {
                match &self.proof[t as usize] {
                    Some((_, Just::Given(r))) => out.union_with(r),
                    Some((_, Just::Congruence(x, y))) => {
                        let (nx, ny) = (&self.nodes[*x as usize], &self.nodes[*y as usize]);
                        for (&p, &q) in nx.args.iter().zip(&ny.args) {
                            self.explain_into(p, q, out, seen);
                        }
                    }
                    None => {}
                }
            }
        }
    }

    fn ancestors(&self, mut t: TermId) -> Vec<TermId> {
        let mut out = vec![t];
        while let Some((p, _)) = &self.proof[t as usize] {
            t = *p;
            out.push(t);
        }
        out
    }

    pub fn term_string(&self, t: TermId) -> String {
        let node = &self.nodes[t as usize];
        let args: Vec<String> = node.args.iter().map(|&a| self.term_string(a)).collect();
        match node.sym {
            Sym::Num(n) => n.to_string(),
            Sym::True => "true".into(),
            Sym::False => "false".into(),
            Sym::Const(c) => self.names[c as usize].clone(),
            Sym::Fn(f) => format!("{}({})", self.names[f as usize], args.join(", ")),
            Sym::Arith(op) => format!("({} {} {})", args[0], op.symbol(), args[1]),
            Sym::Neg => format!("-{}", args[0]),
        }
    }
}

/// Integer semantics of the arithmetic operators; division is Euclidean and
/// undefined at zero.
pub fn eval_arith(op: ArithOp, a: i128, b: i128) -> Option<i128> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => (b != 0).then(|| a.checked_div_euclid(b)).flatten(),
        ArithOp::Mod => (b != 0).then(|| a.checked_rem_euclid(b)).flatten(),
    }
}
