mod args;

use std::collections::HashSet;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Common, CompareArgs, MinimizeArgs, SampleArgs, ScopeArg, StrategyArg, VerifyArgs};
use tunav_core::driver::{
    compare_metrics, function_status, import_item, load_workspace, read_metrics, render_report, sample_failures,
    verify_program, write_metrics, DriverError, MetricsRecord, RunConfig, Selection, Workspace,
};
use tunav_core::engine::Limits;
use tunav_core::minimize::{enumerate_assert_sites, minimize, Scope};
use tunav_core::resolve::Program;
use tunav_core::syntax::render_without_sites;
use tunav_core::triggers::Strategy;
use tunav_core::vcgen::VcConfig;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Error carrying its exit code.
struct Failure(u8, String);

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

fn config(c: &Common, ws: &Workspace) -> Result<RunConfig, Failure> {
    let ambient = c
        .import_group
        .iter()
        .map(|p| import_item(&ws.program, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunConfig {
        vc: VcConfig {
            fuel: c.fuel,
            strategy: match c.trigger_strategy {
                StrategyArg::Conservative => Strategy::Conservative,
                StrategyArg::AllTriggers => Strategy::AllTriggers,
            },
            default_prelude: !c.no_default_prelude,
            ambient,
            strip_triggers: c.strip_triggers,
        },
        limits: Limits {
            max_rounds: c.max_rounds,
            max_instantiations: c.max_instantiations,
            time_budget_ms: c.time_budget_ms,
            ..Limits::default()
        },
        jobs: c.jobs as usize,
        timing: !c.no_timing,
        usage_report: false,
        emit_smtlib: None,
    })
}

fn load(c: &Common, allow_empty: bool) -> Result<(Workspace, RunConfig), Failure> {
    if c.files.is_empty() && !allow_empty {
        return Err(Failure(EXIT_USAGE, "no input files".into()));
    }
    let ws = load_workspace(&c.files)?;
    let cfg = config(c, &ws)?;
    Ok((ws, cfg))
}

fn run_verify(a: VerifyArgs) -> Result<u8, Failure> {
    let (ws, mut cfg) = load(&a.common, a.prelude_only)?;
    cfg.usage_report = a.broadcast_usage_info;
    cfg.emit_smtlib = a.emit_smtlib;
    let selection = if a.prelude_only { Selection::PreludeOnly } else { Selection::User };
    let report = verify_program(&ws.program, &cfg, selection)?;
    print!("{}", render_report(&report, &cfg));
    if let Some(path) = &a.metrics_out {
        write_metrics(path, &MetricsRecord::from_run(&report, &cfg))?;
    }
    Ok(if report.all_verified() { 0 } else { EXIT_FAIL })
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool")
}

fn minimize_ws(ws: &Workspace, cfg: &RunConfig, scope: Scope) -> Result<(tunav_core::minimize::MinimizationReport, Program), Failure> {
    let verify = |p: &Program, f: &str| function_status(p, f, cfg);
    pool(cfg.jobs)
        .install(|| minimize(&ws.program, &verify, scope))
        .map_err(|e| Failure(EXIT_FAIL, e.to_string()))
}

fn run_minimize(a: MinimizeArgs) -> Result<u8, Failure> {
    let (ws, cfg) = load(&a.common, false)?;
    let scope = match a.minimize_scope {
        ScopeArg::Function => Scope::Function,
        ScopeArg::Project => Scope::Project,
    };
    let (mut report, _) = minimize_ws(&ws, &cfg, scope)?;
    if !cfg.timing {
        report.wall_ms = 0.0;
    }
    print!("{}", report.render());
    if let Some(path) = &a.report_json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Failure(EXIT_INTERNAL, e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    }
    if a.write {
        let removed = report.removed_spans();
        for f in &ws.files {
            let mine: HashSet<_> = removed.iter().filter(|s| s.file == f.ast.file).copied().collect();
            if mine.is_empty() {
                continue;
            }
            let text = render_without_sites(&f.ast, &mine).map_err(|e| Failure(EXIT_INTERNAL, e.to_string()))?;
            std::fs::write(&f.path, text).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", f.path.display())))?;
        }
    }
    Ok(0)
}

fn run_compare(a: CompareArgs) -> Result<u8, Failure> {
    let ra = read_metrics(&a.metrics_a)?;
    let rb = read_metrics(&a.metrics_b)?;
    let report = compare_metrics(&ra, &rb).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
    let csv = report.to_csv();
    match &a.csv_out {
        Some(p) => std::fs::write(p, csv).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display())))?,
        None => print!("{csv}"),
    }
    print!("{}", report.summary());
    Ok(0)
}

fn run_sample(a: SampleArgs) -> Result<u8, Failure> {
    let (ws, cfg) = load(&a.common, false)?;
    let (_, pruned) = minimize_ws(&ws, &cfg, Scope::Function)?;
    let sites = enumerate_assert_sites(&pruned);
    let report = sample_failures(&pruned, &sites, a.n, a.seed, &cfg);
    let csv = report.to_csv();
    match &a.out {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display())))?;
            println!("{} samples written to {}", report.samples.len(), p.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Minimize(a) => run_minimize(a),
        Command::Compare(a) => run_compare(a),
        Command::SampleFailures(a) => run_sample(a),
    });
    match result {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(Failure(code, msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
