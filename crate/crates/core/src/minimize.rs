//! Assert minimization: a forward pass that drops every assert whose removal
//! keeps its scope verified.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::Status;
use crate::resolve::{FnKind, Program, TStmt};
use crate::syntax::SourceSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SiteKind {
    Assert,
    AssertBy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssertSite {
    #[serde(serialize_with = "span_text")]
    pub span: SourceSpan,
    pub kind: SiteKind,
    pub function: String,
    /// Position in the program-wide enumeration.
    pub ordinal: usize,
    /// Ordinal of the enclosing `assert .. by` block.
    pub parent: Option<usize>,
}

fn span_text<S: serde::Serializer>(s: &SourceSpan, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&s.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scope {
    #[default]
    Function,
    Project,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinimizeError {
    #[error("program does not verify before minimization: {}", .0.join(", "))]
    BaselineFailure(Vec<String>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FunctionBreakdown {
    pub function: String,
    pub original: usize,
    pub surviving: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MinimizationReport {
    pub original_count: usize,
    pub surviving_count: usize,
    /// Includes sites nested in a removed block.
    pub removed: Vec<AssertSite>,
    /// Sites kept because their trial ended in Unknown.
    pub kept_on_unknown: Vec<AssertSite>,
    pub per_function: Vec<FunctionBreakdown>,
    pub reverifications: usize,
    pub wall_ms: f64,
}

impl MinimizationReport {
    pub fn removed_spans(&self) -> HashSet<SourceSpan> {
        self.removed.iter().map(|s| s.span).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = self.per_function.iter().map(|f| f.function.len()).max().unwrap_or(8).max(8);
        out.push_str(&format!("{:<w$}  original  minimized\n", "function"));
        for f in &self.per_function {
            out.push_str(&format!("{:<w$}  {:>8}  {:>9}\n", f.function, f.original, f.surviving));
        }
        out.push_str(&format!("{:<w$}  {:>8}  {:>9}\n", "total", self.original_count, self.surviving_count));
        for s in &self.removed {
            out.push_str(&format!("removed {} in {}\n", s.span, s.function));
        }
        for s in &self.kept_on_unknown {
            out.push_str(&format!("kept (unknown) {} in {}\n", s.span, s.function));
        }
        out
    }
}

fn sites_of(body: &[TStmt], function: &str, parent: Option<usize>, out: &mut Vec<AssertSite>) {
    for s in body {
        match s {
            TStmt::Assert { span, .. } => out.push(AssertSite {
                span: *span,
                kind: SiteKind::Assert,
                function: function.to_string(),
                ordinal: out.len(),
                parent,
            }),
            TStmt::AssertBy { body, span, .. } => {
                let me = out.len();
                out.push(AssertSite {
                    span: *span,
                    kind: SiteKind::AssertBy,
                    function: function.to_string(),
                    ordinal: me,
                    parent,
                });
                sites_of(body, function, Some(me), out);
            }
            _ => {}
        }
    }
}

/// User proof functions that are checked by the verifier.
fn user_functions(program: &Program) -> Vec<String> {
    program
        .proof_fns()
        .filter(|f| !program.is_prelude_fn(f))
        .map(|f| f.path.clone())
        .collect()
}

/// Assert sites of user proof functions in declaration and source order,
/// each block before its nested sites.
pub fn enumerate_assert_sites(program: &Program) -> Vec<AssertSite> {
    let mut out = Vec::new();
    for f in user_functions(program) {
        sites_of(program.fns[&f].body(), &f, None, &mut out);
    }
    out
}

/// `body` without the statements whose spans are in `removed`.
pub fn prune(body: &[TStmt], removed: &HashSet<SourceSpan>) -> Vec<TStmt> {
    body.iter()
        .filter(|s| !removed.contains(&s.span()))
        .map(|s| match s {
            TStmt::AssertBy { expr, body, span } => TStmt::AssertBy {
                expr: expr.clone(),
                body: prune(body, removed),
                span: *span,
            },
            other => other.clone(),
        })
        .collect()
}

/// Copy of `program` with the given assert sites deleted.
pub fn without_sites(program: &Program, removed: &HashSet<SourceSpan>) -> Program {
    let mut p = program.clone();
    for def in p.fns.values_mut() {
        if let FnKind::Proof { body, .. } = &mut def.kind {
            *body = prune(body, removed);
        }
    }
    p
}

fn set_body(p: &mut Program, original: &Program, function: &str, removed: &HashSet<SourceSpan>) {
    let def = p.fns.get_mut(function).expect("function exists");
    if let FnKind::Proof { body, .. } = &mut def.kind {
        *body = prune(original.fns[function].body(), removed);
    }
}

struct Pass {
    removed: Vec<AssertSite>,
    unknown: Vec<AssertSite>,
    trials: usize,
}

/// Forward scan over `sites`: tentatively delete each one, keep the deletion
/// if every function in `check` still verifies.
fn scan<V>(program: &Program, sites: &[AssertSite], check: &[String], verify: &V) -> Pass
where
    V: Fn(&Program, &str) -> Status + Sync,
{
    let mut p = program.clone();
    let mut removed: HashSet<SourceSpan> = HashSet::new();
    let mut removed_ord: HashSet<usize> = HashSet::new();
    let mut pass = Pass { removed: Vec::new(), unknown: Vec::new(), trials: 0 };
    for site in sites {
        if site.parent.is_some_and(|q| removed_ord.contains(&q)) {
            // Gone with its enclosing block.
            removed_ord.insert(site.ordinal);
            pass.removed.push(site.clone());
            continue;
        }
        removed.insert(site.span);
        set_body(&mut p, program, &site.function, &removed);
        let mut verdict = Status::Verified;
        for f in check {
            pass.trials += 1;
            verdict = verify(&p, f);
            if !verdict.is_verified() {
                break;
            }
        }
        match verdict {
            Status::Verified => {
                removed_ord.insert(site.ordinal);
                pass.removed.push(site.clone());
            }
            other => {
                removed.remove(&site.span);
                set_body(&mut p, program, &site.function, &removed);
                if matches!(other, Status::Unknown(_)) {
                    pass.unknown.push(site.clone());
                }
            }
        }
    }
    pass
}

/// Minimize the user proof functions of `program`. `verify` decides one
/// function of a candidate program; Unknown counts as failure.
pub fn minimize<V>(program: &Program, verify: &V, scope: Scope) -> Result<(MinimizationReport, Program), MinimizeError>
where
    V: Fn(&Program, &str) -> Status + Sync,
{
    let start = Instant::now();
    let functions = user_functions(program);
    let baseline: Vec<(String, Status)> = functions.par_iter().map(|f| (f.clone(), verify(program, f))).collect();
    let failing: Vec<String> = baseline.iter().filter(|(_, s)| !s.is_verified()).map(|(f, _)| f.clone()).collect();
    if !failing.is_empty() {
        return Err(MinimizeError::BaselineFailure(failing));
    }
    let sites = enumerate_assert_sites(program);
    let passes: Vec<Pass> = match scope {
        Scope::Project => vec![scan(program, &sites, &functions, verify)],
        Scope::Function => functions
            .par_iter()
            .map(|f| {
                let own: Vec<AssertSite> = sites.iter().filter(|s| &s.function == f).cloned().collect();
                scan(program, &own, std::slice::from_ref(f), verify)
            })
            .collect(),
    };
    let mut report = MinimizationReport {
        original_count: sites.len(),
        reverifications: functions.len(),
        ..Default::default()
    };
    for pass in passes {
        report.removed.extend(pass.removed);
        report.kept_on_unknown.extend(pass.unknown);
        report.reverifications += pass.trials;
    }
    report.removed.sort_by_key(|s| s.ordinal);
    let gone: HashSet<usize> = report.removed.iter().map(|s| s.ordinal).collect();
    report.surviving_count = sites.len() - gone.len();
    for f in &functions {
        let own = sites.iter().filter(|s| &s.function == f);
        report.per_function.push(FunctionBreakdown {
            function: f.clone(),
            original: own.clone().count(),
            surviving: own.filter(|s| !gone.contains(&s.ordinal)).count(),
        });
    }
    let pruned = without_sites(program, &report.removed_spans());
    report.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok((report, pruned))
}

#[cfg(test)]
mod tests;
