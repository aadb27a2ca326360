//! Loading, task-ordered parallel verification and reporting.

mod compare;
mod metrics;
mod sample;
mod usage;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

pub use compare::{compare_metrics, CompareError, CompareReport, Ratio};
pub use metrics::{metrics_to_string, read_metrics, write_metrics, MetricsFormat, MetricsRecord};
pub use sample::{sample_failures, FailureSample, SampleReport};
pub use usage::{format_usage, Usage, USAGE_HEADER};

use crate::engine::{prove, Limits, ProveMetrics, Status};
use crate::prelude::load_prelude;
use crate::resolve::{order_tasks, resolve_program, CycleError, Program, ResolveError, UseItem, UseKind};
use crate::syntax::ast::ProgramAst;
use crate::syntax::{parse_module, ParseError, SourceSpan};
use crate::triggers::Strategy;
use crate::vcgen::{to_smtlib, Origin, VcConfig, VcEnv};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Resolve(#[from] ResolveError),
    #[error("{0}")]
    Cycle(#[from] CycleError),
    #[error("unknown broadcast fact or group `{0}`")]
    UnknownImport(String),
    #[error("prelude failed to load: {0}")]
    Prelude(ParseError),
}

pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub ast: ProgramAst,
}

/// User sources plus the resolved program (prelude included).
pub struct Workspace {
    pub files: Vec<SourceFile>,
    pub program: Program,
}

pub fn load_sources(sources: Vec<(PathBuf, String)>) -> Result<Workspace, DriverError> {
    let mut asts = load_prelude().map_err(DriverError::Prelude)?;
    let mut files = Vec::new();
    for (path, text) in sources {
        let ast = parse_module(&text, &path)?;
        asts.push(ast.clone());
        files.push(SourceFile { path, text, ast });
    }
    let program = resolve_program(&asts)?;
    Ok(Workspace { files, program })
}

pub fn load_workspace(paths: &[PathBuf]) -> Result<Workspace, DriverError> {
    let mut sources = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|source| DriverError::Io { path: p.clone(), source })?;
        sources.push((p.clone(), text));
    }
    load_sources(sources)
}

/// Use item for a fact or group path given on the command line.
pub fn import_item(program: &Program, path: &str) -> Result<UseItem, DriverError> {
    let kind = if program.registry.has_group(path) {
        UseKind::Group
    } else if program.registry.fact_id(path).is_some() {
        UseKind::Fact
    } else {
        return Err(DriverError::UnknownImport(path.to_string()));
    };
    Ok(UseItem { path: path.to_string(), kind, span: SourceSpan::default() })
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub vc: VcConfig,
    pub limits: Limits,
    pub jobs: usize,
    /// Include wall times in reports.
    pub timing: bool,
    pub usage_report: bool,
    pub emit_smtlib: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            vc: VcConfig::default(),
            limits: Limits::default(),
            jobs: 1,
            timing: true,
            usage_report: false,
            emit_smtlib: None,
        }
    }
}

impl RunConfig {
    pub fn strategy_name(&self) -> &'static str {
        match self.vc.strategy {
            Strategy::Conservative => "conservative",
            Strategy::AllTriggers => "all-triggers",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Proof functions outside the prelude.
    User,
    /// Non-axiom prelude lemmas.
    PreludeOnly,
}

#[derive(Clone, Debug)]
pub struct ObligationReport {
    pub span: SourceSpan,
    pub what: String,
    pub status: Status,
    pub used_core: BTreeSet<Origin>,
    pub metrics: ProveMetrics,
}

#[derive(Clone, Debug)]
pub struct FunctionReport {
    pub function: String,
    pub span: SourceSpan,
    pub status: Status,
    pub obligations: Vec<ObligationReport>,
    /// Trigger selection failure; the function counts as failed.
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub usage: Usage,
    pub context_facts: usize,
    pub wall_ms: f64,
    /// Scheduling instrumentation: global start and finish sequence numbers.
    pub started: usize,
    pub finished: usize,
}

impl FunctionReport {
    pub fn instantiations(&self) -> u64 {
        self.obligations.iter().map(|o| o.metrics.instantiations).sum()
    }

    pub fn rounds(&self) -> u32 {
        self.obligations.iter().map(|o| o.metrics.rounds).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    /// Declaration order.
    pub functions: Vec<FunctionReport>,
    pub deps: std::collections::BTreeMap<String, BTreeSet<String>>,
}

impl RunReport {
    pub fn all_verified(&self) -> bool {
        self.functions.iter().all(|f| f.status.is_verified())
    }

    pub fn get(&self, function: &str) -> Option<&FunctionReport> {
        self.functions.iter().find(|f| f.function == function)
    }
}

/// Failed beats Unknown; Verified only if every obligation is.
pub fn aggregate(statuses: impl IntoIterator<Item = Status>) -> Status {
    let mut out = Status::Verified;
    for s in statuses {
        match (out, s) {
            (_, Status::Failed) => return Status::Failed,
            (Status::Verified, Status::Unknown(_)) => out = s,
            _ => {}
        }
    }
    out
}

fn smtlib_file_name(function: &str, i: usize) -> String {
    format!("{}_{i}.smt2", function.replace("::", "__"))
}

/// Generate and prove every obligation of `function`.
pub fn verify_function(env: &VcEnv, function: &str, cfg: &RunConfig) -> FunctionReport {
    let start = Instant::now();
    let def = &env.program.fns[function];
    let mut report = FunctionReport {
        function: function.to_string(),
        span: def.span,
        status: Status::Verified,
        obligations: Vec::new(),
        error: None,
        warnings: env.warnings(function),
        usage: Usage::default(),
        context_facts: 0,
        wall_ms: 0.0,
        started: 0,
        finished: 0,
    };
    let obligations = match env.generate_obligations(function) {
        Ok(obs) => obs,
        Err(e) => {
            report.status = Status::Failed;
            report.error = Some(e.to_string());
            report.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
            return report;
        }
    };
    for (i, ob) in obligations.iter().enumerate() {
        if let Some(dir) = &cfg.emit_smtlib {
            let _ = std::fs::write(dir.join(smtlib_file_name(function, i)), to_smtlib(ob));
        }
        let out = prove(ob, &cfg.limits);
        report.context_facts = report.context_facts.max(ob.context.facts.len());
        report.usage.add(ob, &out.used_core);
        report.obligations.push(ObligationReport {
            span: ob.span,
            what: ob.describe(),
            status: out.status,
            used_core: out.used_core,
            metrics: out.metrics,
        });
    }
    report.status = aggregate(report.obligations.iter().map(|o| o.status));
    report.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    report
}

/// Status of one function under `cfg`; the oracle used by the minimizer.
pub fn function_status(program: &Program, function: &str, cfg: &RunConfig) -> Status {
    let env = VcEnv::new(program, cfg.vc.clone());
    verify_function(&env, function, cfg).status
}

/// Verify the selected tasks layer by layer in dependency order, with up to
/// `cfg.jobs` workers inside a layer.
pub fn verify_program(program: &Program, cfg: &RunConfig, selection: Selection) -> Result<RunReport, DriverError> {
    let order = order_tasks(program, &cfg.vc.ambient)?;
    let env = VcEnv::new(program, cfg.vc.clone());
    let selected = |i: usize| {
        let t = &order.tasks[i];
        let def = &program.fns[&t.function];
        match selection {
            Selection::User => !t.prelude,
            Selection::PreludeOnly => t.prelude && def.is_lemma(),
        }
    };
    if let Some(dir) = &cfg.emit_smtlib {
        std::fs::create_dir_all(dir).map_err(|source| DriverError::Io { path: dir.clone(), source })?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .expect("thread pool");
    let seq = AtomicUsize::new(0);
    let mut reports: Vec<(usize, FunctionReport)> = Vec::new();
    for layer in &order.layers {
        let tasks: Vec<usize> = layer.iter().copied().filter(|&i| selected(i)).collect();
        let done: Vec<(usize, FunctionReport)> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&i| {
                    let started = seq.fetch_add(1, Ordering::SeqCst);
                    let mut r = verify_function(&env, &order.tasks[i].function, cfg);
                    r.started = started;
                    r.finished = seq.fetch_add(1, Ordering::SeqCst);
                    (order.tasks[i].order, r)
                })
                .collect()
        });
        reports.extend(done);
    }
    reports.sort_by_key(|(o, _)| *o);
    Ok(RunReport {
        functions: reports.into_iter().map(|(_, r)| r).collect(),
        deps: order.deps,
    })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Verified => "PASS",
        Status::Failed => "FAIL",
        Status::Unknown(_) => "UNKNOWN",
    }
}

/// Human-readable report in declaration order.
pub fn render_report(report: &RunReport, cfg: &RunConfig) -> String {
    let mut out = String::new();
    for f in &report.functions {
        let _ = write!(out, "{} {}", status_word(f.status), f.function);
        if let Status::Unknown(r) = f.status {
            let _ = write!(out, " ({} limit)", r.name());
        }
        let _ = write!(out, " [{} obligations, {} instantiations", f.obligations.len(), f.instantiations());
        if cfg.timing {
            let _ = write!(out, ", {:.2} ms", f.wall_ms);
        }
        out.push_str("]\n");
        for w in &f.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        if let Some(e) = &f.error {
            let _ = writeln!(out, "  error: {e}");
        }
        for o in f.obligations.iter().filter(|o| !o.status.is_verified()) {
            let _ = writeln!(out, "  {}: {} {}", o.span, o.what, o.status);
        }
        if cfg.usage_report && f.status.is_verified() {
            out.push_str(&format_usage(&f.usage));
        }
    }
    let ok = report.functions.iter().filter(|f| f.status.is_verified()).count();
    let _ = writeln!(out, "verified {ok} of {} functions", report.functions.len());
    out
}

/// Proof functions declared in the file at `path`.
pub fn functions_in(ws: &Workspace, path: &Path) -> Vec<String> {
    let Some(file) = ws.files.iter().find(|f| f.path == path) else {
        return Vec::new();
    };
    ws.program
        .proof_fns()
        .filter(|d| d.span.file == file.ast.file)
        .map(|d| d.path.clone())
        .collect()
}

#[cfg(test)]
mod tests;
