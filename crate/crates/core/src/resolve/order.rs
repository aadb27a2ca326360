use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use petgraph::graph::{DiGraph, NodeIndex};

use super::{FnKind, Program, TStmt, UseItem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    /// Fully qualified path of the proof function.
    pub function: String,
    pub prelude: bool,
    /// Declaration position, used for deterministic output order.
    pub order: usize,
}

#[derive(Clone, Debug, Default)]
pub struct TaskOrder {
    /// Topologically sorted tasks.
    pub tasks: Vec<Task>,
    /// Indices into `tasks`; tasks within one layer are independent.
    pub layers: Vec<Vec<usize>>,
    /// Task path → broadcast lemma tasks that must finish first.
    pub deps: BTreeMap<String, BTreeSet<String>>,
}

impl TaskOrder {
    pub fn position(&self, function: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.function == function)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cyclic broadcast imports among: {}", members.join(", "))]
pub struct CycleError {
    pub members: Vec<String>,
}

/// All use items that may be visible anywhere in a proof function.
pub(crate) fn imports_of(program: &Program, function: &str, ambient: &[UseItem]) -> Vec<UseItem> {
    let def = &program.fns[function];
    let mut items = program.registry.default_items();
    if !program.is_prelude_fn(def) {
        items.extend(ambient.iter().cloned());
    }
    items.extend(program.modules[def.module].uses.iter().cloned());
    fn walk(stmts: &[TStmt], out: &mut Vec<UseItem>) {
        for s in stmts {
            match s {
                TStmt::BroadcastUse { items, .. } => out.extend(items.iter().cloned()),
                TStmt::AssertBy { body, .. } => walk(body, out),
                _ => {}
            }
        }
    }
    walk(def.body(), &mut items);
    items
}

/// Order proof-function tasks so each broadcast lemma is verified before any
/// task that can import it. `ambient` are extra imports applied to every
/// user module.
pub fn order_tasks(program: &Program, ambient: &[UseItem]) -> Result<TaskOrder, CycleError> {
    let tasks: Vec<Task> = program
        .proof_fns()
        .map(|f| Task {
            function: f.path.clone(),
            prelude: program.is_prelude_fn(f),
            order: f.order,
        })
        .collect();
    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<NodeIndex> = (0..tasks.len()).map(|i| graph.add_node(i)).collect();
    let index: BTreeMap<&str, usize> = tasks.iter().enumerate().map(|(i, t)| (t.function.as_str(), i)).collect();
    let mut deps: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (ti, task) in tasks.iter().enumerate() {
        let items = imports_of(program, &task.function, ambient);
        let entry = deps.entry(task.function.clone()).or_default();
        for fact in program.registry.expand(&items) {
            let def = &program.fns[&fact.path];
            if !matches!(def.kind, FnKind::Proof { .. }) {
                continue;
            }
            let li = index[fact.path.as_str()];
            if entry.insert(fact.path.clone()) {
                graph.add_edge(nodes[li], nodes[ti], ());
            }
        }
    }
    for scc in petgraph::algo::tarjan_scc(&graph) {
        if scc.len() > 1 || graph.contains_edge(scc[0], scc[0]) {
            let mut members: Vec<String> = scc.iter().map(|n| tasks[graph[*n]].function.clone()).collect();
            members.sort();
            return Err(CycleError { members });
        }
    }
    // Kahn's algorithm, smallest declaration position first.
    let mut indeg: Vec<usize> = nodes
        .iter()
        .map(|n| graph.neighbors_directed(*n, petgraph::Direction::Incoming).count())
        .collect();
    let mut level = vec![0usize; tasks.len()];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    for (i, d) in indeg.iter().enumerate() {
        if *d == 0 {
            heap.push(Reverse((tasks[i].order, i)));
        }
    }
    let mut sorted = Vec::with_capacity(tasks.len());
    while let Some(Reverse((_, i))) = heap.pop() {
        sorted.push(i);
        for succ in graph.neighbors_directed(nodes[i], petgraph::Direction::Outgoing) {
            let j = graph[succ];
            level[j] = level[j].max(level[i] + 1);
            indeg[j] -= 1;
            if indeg[j] == 0 {
                heap.push(Reverse((tasks[j].order, j)));
            }
        }
    }
    let pos_of: BTreeMap<usize, usize> = sorted.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let depth = level.iter().copied().max().map_or(0, |m| m + 1);
    let mut layers = vec![Vec::new(); depth];
    for &i in &sorted {
        layers[level[i]].push(pos_of[&i]);
    }
    Ok(TaskOrder {
        tasks: sorted.into_iter().map(|i| tasks[i].clone()).collect(),
        layers,
        deps,
    })
}
