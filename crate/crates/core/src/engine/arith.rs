//! Linear integer arithmetic: gcd tightening, Gaussian elimination of unit
//! equalities, then Fourier–Motzkin with integer rounding.

use std::collections::BTreeMap;

use super::reason::Reason;

/// `Σ coeffs[x]·x + konst`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: BTreeMap<u32, i128>,
    pub konst: i128,
}

impl LinExpr {
    pub fn constant(k: i128) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            konst: k,
        }
    }

    pub fn var(v: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, 1);
        LinExpr { coeffs, konst: 0 }
    }

    /// `self + k·other`, or `None` on overflow.
    pub fn add_scaled(&self, k: i128, other: &LinExpr) -> Option<LinExpr> {
        let mut out = self.clone();
        for (&v, &c) in &other.coeffs {
            let e = out.coeffs.entry(v).or_insert(0);
            *e = e.checked_add(c.checked_mul(k)?)?;
            if *e == 0 {
                out.coeffs.remove(&v);
            }
        }
        out.konst = out.konst.checked_add(other.konst.checked_mul(k)?)?;
        Some(out)
    }

    pub fn scale(&self, k: i128) -> Option<LinExpr> {
        LinExpr::constant(0).add_scaled(k, self)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    /// `expr <= 0`
    Le,
    /// `expr == 0`
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
    pub reason: Reason,
}

impl Constraint {
    pub fn le(expr: LinExpr, reason: Reason) -> Self {
        Constraint {
            expr,
            rel: Rel::Le,
            reason,
        }
    }

    pub fn eq(expr: LinExpr, reason: Reason) -> Self {
        Constraint {
            expr,
            rel: Rel::Eq,
            reason,
        }
    }
}

/// `expr != 0`
#[derive(Clone, Debug)]
pub struct Diseq {
    pub expr: LinExpr,
    pub reason: Reason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithResult {
    Consistent,
    Inconsistent(Reason),
    /// Elimination cap or size limit hit; callers treat this as consistent.
    Unknown,
}

pub const DEFAULT_ELIMINATION_CAP: usize = 12;
const MAX_CONSTRAINTS: usize = 4000;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

enum Norm {
    Keep(Constraint),
    Trivial,
    Violated(Reason),
}

fn normalize(mut c: Constraint) -> Norm {
    if c.expr.is_constant() {
        let ok = match c.rel {
            Rel::Le => c.expr.konst <= 0,
            Rel::Eq => c.expr.konst == 0,
        };
        return if ok { Norm::Trivial } else { Norm::Violated(c.reason) };
    }
    let g = c.expr.coeffs.values().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        match c.rel {
            Rel::Eq if c.expr.konst % g != 0 => return Norm::Violated(c.reason),
            Rel::Eq => c.expr.konst /= g,
            Rel::Le => c.expr.konst = div_ceil(c.expr.konst, g),
        }
        for v in c.expr.coeffs.values_mut() {
            *v /= g;
        }
    }
    Norm::Keep(c)
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// Decide satisfiability over the integers of `constraints ∧ diseqs`.
/// Inconsistent results are always correct; consistent ones may not be.
pub fn arith_consistent(constraints: &[Constraint], diseqs: &[Diseq], cap: usize) -> ArithResult {
    match solve(constraints.to_vec(), cap) {
        ArithResult::Consistent => {}
        other => return other,
    }
    let mut unknown = false;
    for d in diseqs {
        // e != 0 fails only if both e <= -1 and e >= 1 are infeasible.
        let below = d.expr.add_scaled(1, &LinExpr::constant(1));
        let above = d.expr.scale(-1).and_then(|e| e.add_scaled(1, &LinExpr::constant(1)));
        let (Some(below), Some(above)) = (below, above) else {
            unknown = true;
            continue;
        };
        let mut reason = d.reason.clone();
        let mut refuted = true;
        for side in [below, above] {
            let mut cs = constraints.to_vec();
            cs.push(Constraint::le(side, Reason::empty()));
            match solve(cs, cap) {
                ArithResult::Inconsistent(r) => reason.union_with(&r),
                ArithResult::Unknown => {
                    unknown = true;
                    refuted = false;
                    break;
                }
                ArithResult::Consistent => {
                    refuted = false;
                    break;
                }
            }
        }
        if refuted {
            return ArithResult::Inconsistent(reason);
        }
    }
    if unknown {
        ArithResult::Unknown
    } else {
        ArithResult::Consistent
    }
}

fn solve(input: Vec<Constraint>, cap: usize) -> ArithResult {
    let mut eqs = Vec::new();
    let mut les = Vec::new();
    for c in input {
        match normalize(c) {
            Norm::Keep(c) if c.rel == Rel::Eq => eqs.push(c),
            Norm::Keep(c) => les.push(c),
            Norm::Trivial => {}
            Norm::Violated(r) => return ArithResult::Inconsistent(r),
        }
    }
    // Gaussian elimination on equalities with a unit coefficient.
    while let Some(i) = eqs.iter().position(|e| e.expr.coeffs.values().any(|c| c.abs() == 1)) {
        let eq = eqs.swap_remove(i);
        let (&x, &cx) = eq.expr.coeffs.iter().find(|(_, c)| c.abs() == 1).expect("unit coefficient");
        let mut next_eqs = Vec::new();
        let mut next_les = Vec::new();
        for (c, into_eq) in eqs.drain(..).map(|c| (c, true)).chain(les.drain(..).map(|c| (c, false))) {
            let Some(&k) = c.expr.coeffs.get(&x) else {
                if into_eq {
                    next_eqs.push(c);
                } else {
                    next_les.push(c);
                }
                continue;
            };
            // c - (k / cx)·eq eliminates x; cx is ±1.
            let Some(expr) = c.expr.add_scaled(-k * cx, &eq.expr) else {
                return ArithResult::Unknown;
            };
            let reduced = Constraint {
                expr,
                rel: c.rel,
                reason: c.reason.union(&eq.reason),
            };
            match normalize(reduced) {
                Norm::Keep(c) if c.rel == Rel::Eq => next_eqs.push(c),
                Norm::Keep(c) => next_les.push(c),
                Norm::Trivial => {}
                Norm::Violated(r) => return ArithResult::Inconsistent(r),
            }
        }
        eqs = next_eqs;
        les = next_les;
    }
    for eq in eqs {
        let neg = match eq.expr.scale(-1) {
            Some(e) => e,
            None => return ArithResult::Unknown,
        };
        les.push(Constraint::le(neg, eq.reason.clone()));
        les.push(Constraint::le(eq.expr, eq.reason));
    }
    fourier_motzkin(les, cap)
}

fn fourier_motzkin(mut les: Vec<Constraint>, cap: usize) -> ArithResult {
    let mut eliminated = 0;
    loop {
        if les.is_empty() {
            return ArithResult::Consistent;
        }
        let mut sign: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for c in &les {
            for (&v, &k) in &c.expr.coeffs {
                let e = sign.entry(v).or_default();
                if k > 0 {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        // A variable bounded on one side only can always be chosen to satisfy
        // its constraints.
        let pure: Vec<u32> = sign.iter().filter(|(_, (p, n))| *p == 0 || *n == 0).map(|(v, _)| *v).collect();
        if !pure.is_empty() {
            les.retain(|c| !pure.iter().any(|v| c.expr.coeffs.contains_key(v)));
            continue;
        }
        let (&x, _) = sign
            .iter()
            .min_by_key(|(v, (p, n))| (p * n, **v))
            .expect("nonempty constraint set has variables");
        eliminated += 1;
        if eliminated > cap {
            return ArithResult::Unknown;
        }
        let (with, mut without): (Vec<Constraint>, Vec<Constraint>) =
            les.into_iter().partition(|c| c.expr.coeffs.contains_key(&x));
        let (pos, neg): (Vec<&Constraint>, Vec<&Constraint>) = with.iter().partition(|c| c.expr.coeffs[&x] > 0);
        for p in &pos {
            for n in &neg {
                let a = p.expr.coeffs[&x];
                let b = -n.expr.coeffs[&x];
                let combined = p.expr.scale(b).and_then(|e| e.add_scaled(a, &n.expr));
                let Some(expr) = combined else {
                    return ArithResult::Unknown;
                };
                match normalize(Constraint::le(expr, p.reason.clone().union(&n.reason))) {
                    Norm::Keep(c) => without.push(c),
                    Norm::Trivial => {}
                    Norm::Violated(r) => return ArithResult::Inconsistent(r),
                }
            }
        }
        if without.len() > MAX_CONSTRAINTS {
            return ArithResult::Unknown;
        }
        les = without;
    }
}
