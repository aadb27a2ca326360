//! Refutation-based prover: congruence closure, linear integer arithmetic,
//! case splitting and round-based e-matching.

mod arith;
mod compile;
mod egraph;
mod eval;
mod reason;
mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use arith::{arith_consistent, ArithResult, Constraint, Diseq, LinExpr, Rel, DEFAULT_ELIMINATION_CAP};
pub use egraph::{EGraph, Sym, TermId};
pub use eval::{eval_finite, EvalError, FnTable, Model};
pub use reason::Reason;
pub use solver::ProverState;

use compile::QuantBody;
use solver::{Branch, Round, Run};

use crate::ir::TExpr;
use crate::triggers::TriggerGroup;
use crate::vcgen::{Obligation, Origin, QuantifiedFact};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_rounds: u32,
    pub max_instantiations: u64,
    pub max_splits: u64,
    pub time_budget_ms: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_rounds: 5,
            max_instantiations: 10_000,
            max_splits: 10_000,
            time_budget_ms: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownReason {
    Rounds,
    Instantiations,
    Splits,
    Time,
}

impl UnknownReason {
    pub fn name(self) -> &'static str {
        match self {
            UnknownReason::Rounds => "rounds",
            UnknownReason::Instantiations => "instantiations",
            UnknownReason::Splits => "splits",
            UnknownReason::Time => "time",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Verified,
    Failed,
    Unknown(UnknownReason),
}

impl Status {
    pub fn is_verified(self) -> bool {
        self == Status::Verified
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Verified => write!(f, "verified"),
            Status::Failed => write!(f, "failed"),
            Status::Unknown(r) => write!(f, "unknown({})", r.name()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProveMetrics {
    pub instantiations: u64,
    /// Nonzero instantiation counts by fact label.
    pub fact_instantiations: BTreeMap<String, u64>,
    pub rounds: u32,
    pub splits: u64,
    pub time_ms: f64,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    /// Origins of the premises used by the refutation; empty unless verified.
    pub used_core: BTreeSet<Origin>,
    pub metrics: ProveMetrics,
}

/// Decide `obligation` by refuting its negated goal under its context.
pub fn prove(obligation: &Obligation, limits: &Limits) -> Outcome {
    let ctx = &obligation.context;
    let mut origins: Vec<Option<Origin>> = ctx.ground.iter().map(|h| Some(h.origin.clone())).collect();
    let goal_bit = origins.len();
    origins.push(None);
    let fact_base = origins.len();
    origins.extend(ctx.facts.iter().map(|f| Some(f.origin.clone())));
    let mut state = ProverState::new(Run::new(limits.clone(), origins.len()));
    let fact_counters: Vec<usize> = {
        let mut run = state.run.borrow_mut();
        ctx.facts.iter().map(|f| run.label(&f.label)).collect()
    };
    let result = (|| {
        for (i, h) in ctx.ground.iter().enumerate() {
            let c = state.run.borrow_mut().label(&h.origin.label());
            if let Err(r) = state.assert_expr(&h.expr, true, &Reason::single(i), c) {
                return Branch::Refuted(r);
            }
        }
        let c = state.run.borrow_mut().label("goal");
        if let Err(r) = state.assert_expr(&obligation.goal, false, &Reason::single(goal_bit), c) {
            return Branch::Refuted(r);
        }
        for (i, f) in ctx.facts.iter().enumerate() {
            if let Err(r) = add_fact(&mut state, f, Reason::single(fact_base + i), fact_counters[i]) {
                return Branch::Refuted(r);
            }
        }
        state.clone().search()
    })();
    let run = state.run.borrow();
    let mut metrics = ProveMetrics {
        instantiations: run.instantiations,
        fact_instantiations: BTreeMap::new(),
        rounds: run.rounds,
        splits: run.splits,
        time_ms: run.start.elapsed().as_secs_f64() * 1000.0,
    };
    for (l, &n) in run.labels.iter().zip(&run.counts) {
        if n > 0 {
            *metrics.fact_instantiations.entry(l.clone()).or_default() += n;
        }
    }
    let (status, used_core) = match result {
        Branch::Refuted(r) => {
            let core = r
                .ones()
                .filter(|&b| b < origins.len())
                .filter_map(|b| origins[b].clone())
                .collect();
            (Status::Verified, core)
        }
        Branch::Saturated => (Status::Failed, BTreeSet::new()),
        Branch::Unknown(u) => (Status::Unknown(u), BTreeSet::new()),
    };
    Outcome {
        status,
        used_core,
        metrics,
    }
}

fn add_fact(state: &mut ProverState, f: &QuantifiedFact, reason: Reason, counter: usize) -> Result<(), Reason> {
    if f.binders.is_empty() {
        return state.assert_expr(&f.body(), true, &reason, counter);
    }
    state.add_quant(
        QuantBody {
            binders: f.binders.clone(),
            body: f.body(),
            pol: true,
            patterns: f.triggers.groups.iter().map(|g| g.exprs.clone()).collect(),
            env: Default::default(),
        },
        reason,
        counter,
    );
    Ok(())
}

impl ProverState {
    /// State holding `ground` as hypotheses and `facts` ready for
    /// instantiation. `None` if the hypotheses are already contradictory.
    pub fn with_context(ground: &[TExpr], facts: &[QuantifiedFact], limits: &Limits) -> Option<Self> {
        let base = ground.len() + facts.len();
        let mut state = ProverState::new(Run::new(limits.clone(), base));
        for (i, g) in ground.iter().enumerate() {
            let c = state.run.borrow_mut().label("ground");
            state.assert_expr(g, true, &Reason::single(i), c).ok()?;
        }
        for (i, f) in facts.iter().enumerate() {
            let c = state.run.borrow_mut().label(&f.label);
            add_fact(&mut state, f, Reason::single(ground.len() + i), c).ok()?;
        }
        Some(state)
    }

    pub fn instantiations(&self) -> u64 {
        self.run.borrow().instantiations
    }
}

/// Substitutions (binder order, class representatives) under which the
/// trigger matches existing terms, excluding those already instantiated.
pub fn ematch(state: &mut ProverState, trigger: &TriggerGroup, fact: &QuantifiedFact) -> Vec<Vec<TermId>> {
    let labels = state.run.borrow().labels.clone();
    let Some(qi) = state
        .quants
        .iter()
        .position(|q| q.body.env.is_empty() && labels[q.counter] == fact.label)
    else {
        return Vec::new();
    };
    state.ematch_quant(qi, &trigger.exprs)
}

/// One instantiation round over every registered quantifier; returns the
/// number of new instances.
pub fn instantiate_round(state: &mut ProverState) -> Result<usize, UnknownReason> {
    match state.instantiate_round() {
        Round::Count(n) | Round::Conflict(n, _) => Ok(n),
        Round::Stop(u) => Err(u),
    }
}

#[cfg(test)]
mod tests;
