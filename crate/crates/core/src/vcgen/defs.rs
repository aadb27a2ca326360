//! Definitional axioms for spec functions, with fuel layering for recursive
//! definitions.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::graph::DiGraph;

use super::{Origin, QuantifiedFact};
use crate::ir::*;
use crate::resolve::{FnDef, FnKind, Program};
use crate::triggers::{StrategyUsed, TriggerGroup, TriggerSelection};

/// Strongly connected components of the spec-function call graph.
#[derive(Clone, Debug, Default)]
pub struct SpecGraph {
    /// Recursive function → every function of its component.
    recursive: BTreeMap<String, BTreeSet<String>>,
}

impl SpecGraph {
    pub fn build(program: &Program) -> Self {
        let mut graph = DiGraph::<&str, ()>::new();
        let mut nodes = BTreeMap::new();
        for (path, def) in &program.fns {
            if matches!(def.kind, FnKind::Spec { .. } | FnKind::Const { .. }) {
                nodes.insert(path.as_str(), graph.add_node(path.as_str()));
            }
        }
        for (path, def) in &program.fns {
            let Some(body) = def_body(def) else { continue };
            let mut calls = BTreeSet::new();
            body.calls(&mut calls);
            for c in calls {
                if let Some(&to) = nodes.get(c.path.as_str()) {
                    graph.add_edge(nodes[path.as_str()], to, ());
                }
            }
        }
        let mut recursive = BTreeMap::new();
        for scc in petgraph::algo::tarjan_scc(&graph) {
            if scc.len() > 1 || graph.contains_edge(scc[0], scc[0]) {
                let members: BTreeSet<String> = scc.iter().map(|n| graph[*n].to_string()).collect();
                for m in &members {
                    recursive.insert(m.clone(), members.clone());
                }
            }
        }
        SpecGraph { recursive }
    }

    pub fn is_recursive(&self, path: &str) -> bool {
        self.recursive.contains_key(path)
    }
}

pub fn def_body(def: &FnDef) -> Option<&TExpr> {
    match &def.kind {
        FnKind::Spec { body: Some(b) } => Some(b),
        FnKind::Const { value: Some(v) } => Some(v),
        _ => None,
    }
}

fn type_map(def: &FnDef, type_args: &[Type]) -> BTreeMap<String, Type> {
    def.type_params.iter().cloned().zip(type_args.iter().cloned()).collect()
}

/// Definitional axioms of `fref` (at its type arguments) with the given
/// fuel. `prep` finishes nested expressions (trigger selection).
pub fn definitional_axiom(
    program: &Program,
    graph: &SpecGraph,
    fref: &FnRef,
    fuel: u32,
    prep: &mut dyn FnMut(&TExpr, &FnDef) -> Result<TExpr, crate::triggers::TriggerError>,
) -> Result<Vec<QuantifiedFact>, crate::triggers::TriggerError> {
    let def = &program.fns[&fref.path];
    let Some(body) = def_body(def) else {
        return Ok(Vec::new());
    };
    if fuel == 0 {
        return Ok(Vec::new());
    }
    let tmap = type_map(def, &fref.type_args);
    let ret = def.ret.subst(&tmap);
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
    let args: Vec<TExpr> = binders.iter().map(|b| TExpr::var(b.var.clone(), b.ty.clone(), span)).collect();
    let hypothesis = TExpr::conj(
        binders
            .iter()
            .filter(|b| b.nat)
            .map(|b| TExpr::cmp(CmpOp::Le, TExpr::int(0, span), TExpr::var(b.var.clone(), Type::Int, span)))
            .collect(),
        span,
    );
    let body = prep(&body.subst_types(&tmap), def)?;
    let call_at = |layer: u32| {
        let mut f = FnRef::new(fref.path.clone(), fref.type_args.clone());
        f.layer = layer;
        TExpr::new(TExprKind::Call(f, args.clone()), ret.clone(), span)
    };
    let equate = |a: TExpr, b: TExpr| {
        if ret.is_bool() {
            TExpr::logic(Logic::Iff, a, b)
        } else {
            TExpr::eq(a, b)
        }
    };
    let fact = |label: String, head: TExpr, conclusion: TExpr| QuantifiedFact {
        binders: binders.clone(),
        hypothesis: hypothesis.clone(),
        conclusion,
        triggers: TriggerSelection {
            groups: if binders.is_empty() {
                Vec::new()
            } else {
                vec![TriggerGroup { exprs: vec![head] }]
            },
            strategy_used: StrategyUsed::Manual,
            warnings: Vec::new(),
        },
        origin: Origin::DefinitionalAxiom(fref.path.clone()),
        groups_via: Vec::new(),
        label,
    };
    let name = fref.mangled();
    let Some(scc) = graph.recursive.get(&fref.path) else {
        return Ok(vec![fact(format!("{name}#def"), call_at(0), equate(call_at(0), body))]);
    };
    let mut out = Vec::new();
    for k in 0..fuel {
        let mut unfolded = body.clone();
        unfolded.map_calls(&mut |c| {
            if scc.contains(&c.path) {
                c.layer = k + 1;
            }
        });
        out.push(fact(format!("{name}#unfold{k}"), call_at(k), equate(call_at(k), unfolded)));
        out.push(fact(format!("{name}#fuel{k}"), call_at(k), equate(call_at(k), call_at(k + 1))));
    }
    Ok(out)
}
