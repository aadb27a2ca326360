//! End-to-end acceptance checks. Each test prints one line:
//! `criterion NN PASS|FAIL name: detail`.

mod common;
#[path = "../../core/tests/support/gen.rs"]
mod gen;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{args, corpus, root, statuses, tunav, PROPERTY_GROUPS};
use tunav_core::driver::{
    compare_metrics, function_status, import_item, load_workspace, verify_program, MetricsRecord, RunConfig,
    Selection, Workspace,
};
use tunav_core::engine::{prove, Status, UnknownReason};
use tunav_core::minimize::{minimize, MinimizationReport, Scope};
use tunav_core::resolve::Program;
use tunav_core::triggers::Strategy;
use tunav_core::vcgen::VcEnv;

const ONE_SECOND: Duration = Duration::from_secs(1);

fn report(n: u32, name: &str, ok: bool, detail: impl AsRef<str>) {
    println!("criterion {n:>2} {} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    assert!(ok, "criterion {n} ({name}) failed: {}", detail.as_ref());
}

fn corpus_ws() -> Workspace {
    let paths: Vec<PathBuf> = corpus().iter().map(|p| root().join(p)).collect();
    load_workspace(&paths).unwrap()
}

fn fixture_ws(name: &str) -> Workspace {
    load_workspace(&[root().join("fixtures").join(name)]).unwrap()
}

fn run_min(program: &Program, cfg: &RunConfig) -> (MinimizationReport, Program) {
    let verify = |p: &Program, f: &str| function_status(p, f, cfg);
    minimize(program, &verify, Scope::Function).unwrap()
}

fn with_groups(ws: &Workspace) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.vc.ambient = PROPERTY_GROUPS.iter().map(|g| import_item(&ws.program, g).unwrap()).collect();
    cfg
}

/// `(file name, line)` of a rendered span `path:line:col`.
fn file_line(span: &str) -> (String, usize) {
    let mut parts = span.rsplitn(3, ':');
    let _col = parts.next();
    let line = parts.next().unwrap().parse().unwrap();
    let path = parts.next().unwrap();
    (PathBuf::from(path).file_name().unwrap().to_string_lossy().into_owned(), line)
}

/// Drop everything up to the last `::` of each listed path.
fn strip_prefixes(text: &str) -> String {
    text.lines()
        .map(|l| match l.rfind("::") {
            Some(i) => {
                let start = l[..i].rfind(' ').map_or(0, |s| s + 1);
                format!("{}{}", &l[..start], &l[i + 2..])
            }
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_01_push_contains_walkthrough() {
    let none = tunav(&["verify", "fixtures/push_contains_none.tv"]);
    let group = tunav(&["verify", "--broadcast-usage-info", "--no-timing", "fixtures/push_contains_group.tv"]);
    let lemma = tunav(&["verify", "fixtures/push_contains_lemma.tv"]);
    let expected = "checking this function used these broadcasted lemmas and broadcast groups:\n        - (group) vstd::seq_lib::group_seq_properties,\n        - vstd::seq_lib::lemma_seq_contains_after_push";
    let usage: String = group
        .stdout
        .lines()
        .skip_while(|l| !l.starts_with("checking"))
        .take_while(|l| !l.starts_with("verified"))
        .collect::<Vec<_>>()
        .join("\n");
    let slowest = [&none, &group, &lemma].iter().map(|r| r.elapsed).max().unwrap();
    let ok = none.code == 1
        && group.code == 0
        && lemma.code == 0
        && strip_prefixes(&usage) == strip_prefixes(expected)
        && slowest < ONE_SECOND;
    report(
        1,
        "push_contains walkthrough",
        ok,
        format!("exit codes {}/{}/{}, slowest run {:?}, usage:\n{usage}", none.code, group.code, lemma.code, slowest),
    );
}

#[test]
fn criterion_02_trigger_sensitivity() {
    let manual = tunav(&["verify", "--no-timing", "fixtures/seq_trigger_manual.tv"]);
    let index = tunav(&["verify", "fixtures/seq_trigger_index.tv"]);
    let all = tunav(&["verify", "fixtures/seq_trigger_all.tv"]);
    let slowest = [&manual, &index, &all].iter().map(|r| r.elapsed).max().unwrap();
    let fails_at_assert = manual.stdout.contains("seq_trigger_manual.tv:8:");
    let ok = manual.code == 1 && fails_at_assert && index.code == 0 && all.code == 0 && slowest < ONE_SECOND;
    report(
        2,
        "trigger sensitivity",
        ok,
        format!("manual {} (at line 8: {fails_at_assert}), index {}, all_triggers {}, slowest {:?}", manual.code, index.code, all.code, slowest),
    );
}

#[test]
fn criterion_03_default_prelude() {
    let on = tunav(&["verify", "fixtures/seq_axiom_usage.tv"]);
    let off = tunav(&["verify", "--no-default-prelude", "fixtures/seq_axiom_usage.tv"]);
    report(3, "default prelude", on.code == 0 && off.code == 1, format!("default exit {}, without prelude exit {}", on.code, off.code));
}

#[test]
fn criterion_04_soundness() {
    let start = Instant::now();
    let mut verified = 0;
    let mut models = 0;
    let mut violations = Vec::new();
    for seed in 0..1000 {
        let r = gen::run_case(seed);
        verified += r.status.is_verified() as usize;
        models += r.models_checked;
        if let Some(v) = r.violation {
            violations.push(format!("seed {}: {v}\n{}", r.seed, r.source));
        }
    }
    let elapsed = start.elapsed();
    let ok = violations.is_empty() && verified > 0 && elapsed < Duration::from_secs(120);
    report(
        4,
        "soundness",
        ok,
        format!(
            "1000 obligations, {verified} verified, {models} models checked, {} violations, {elapsed:?}{}",
            violations.len(),
            violations.first().map(|v| format!("\n{v}")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_05_core_trim() {
    let ws = corpus_ws();
    let cfg = RunConfig::default();
    let env = VcEnv::new(&ws.program, cfg.vc.clone());
    let run = verify_program(&ws.program, &cfg, Selection::User).unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for f in run.functions.iter().filter(|f| f.status.is_verified()) {
        checked += 1;
        for ob in env.generate_obligations(&f.function).unwrap() {
            let full = prove(&ob, &cfg.limits);
            let mut trimmed = ob.clone();
            trimmed.context.retain_facts(|q| full.used_core.contains(&q.origin));
            if !prove(&trimmed, &cfg.limits).status.is_verified() {
                bad.push(format!("{} {}", f.function, ob.describe()));
            }
        }
    }
    report(5, "core trim", bad.is_empty() && checked > 0, format!("{checked} verified functions re-proved, failures: {bad:?}"));
}

#[test]
fn criterion_06_minimizer_ground_truth() {
    let ws = corpus_ws();
    let cfg = RunConfig::default();
    let mut labeled = BTreeSet::new();
    for f in &ws.files {
        let name = f.path.file_name().unwrap().to_string_lossy().into_owned();
        for (i, line) in f.text.lines().enumerate() {
            if line.contains("// @redundant") {
                labeled.insert((name.clone(), i + 1));
            }
        }
    }
    let (rep, pruned) = run_min(&ws.program, &cfg);
    let removed: BTreeSet<_> = rep.removed.iter().map(|s| file_line(&s.span.to_string())).collect();
    let hits = labeled.intersection(&removed).count() as f64;
    let precision = if removed.is_empty() { 0.0 } else { hits / removed.len() as f64 };
    let recall = hits / labeled.len() as f64;
    let reverifies = verify_program(&pruned, &cfg, Selection::User).unwrap().all_verified();
    let (again, _) = run_min(&pruned, &cfg);
    let ok = precision == 1.0 && recall == 1.0 && reverifies && again.removed.is_empty();
    report(
        6,
        "minimizer ground truth",
        ok,
        format!(
            "{} asserts, {} labeled, {} removed, precision {precision}, recall {recall}, re-verifies {reverifies}, second pass removes {}",
            rep.original_count,
            labeled.len(),
            removed.len(),
            again.removed.len()
        ),
    );
}

#[test]
fn criterion_07_automation_tradeoff() {
    let ws = corpus_ws();
    let plain = RunConfig::default();
    let groups = with_groups(&ws);
    let (without, _) = run_min(&ws.program, &plain);
    let (with, _) = run_min(&ws.program, &groups);
    let a = MetricsRecord::from_run(&verify_program(&ws.program, &plain, Selection::User).unwrap(), &plain);
    let b = MetricsRecord::from_run(&verify_program(&ws.program, &groups, Selection::User).unwrap(), &groups);
    let cmp = compare_metrics(&a, &b).unwrap();
    let ok = with.removed.len() > without.removed.len() && cmp.instantiations_b > cmp.instantiations_a;
    report(
        7,
        "automation tradeoff",
        ok,
        format!(
            "removed {} without groups vs {} with; instantiations {} vs {}",
            without.removed.len(),
            with.removed.len(),
            cmp.instantiations_a,
            cmp.instantiations_b
        ),
    );
}

#[test]
fn criterion_08_trigger_strategy_tradeoff() {
    let ws = corpus_ws();
    let mut cons = RunConfig::default();
    cons.vc.strip_triggers = true;
    let mut all = cons.clone();
    all.vc.strategy = Strategy::AllTriggers;
    let rc = verify_program(&ws.program, &cons, Selection::User).unwrap();
    let ra = verify_program(&ws.program, &all, Selection::User).unwrap();
    let vc = rc.functions.iter().filter(|f| f.status.is_verified()).count();
    let va = ra.functions.iter().filter(|f| f.status.is_verified()).count();
    let lower: Vec<String> = rc
        .functions
        .iter()
        .zip(&ra.functions)
        .filter(|(c, a)| a.instantiations() < c.instantiations())
        .map(|(c, a)| format!("{} {} < {}", c.function, a.instantiations(), c.instantiations()))
        .collect();
    let (mc, _) = run_min(&ws.program, &cons);
    let (ma, _) = run_min(&ws.program, &all);
    let ok = va >= vc && ma.removed.len() > mc.removed.len() && lower.is_empty();
    report(
        8,
        "trigger strategy tradeoff",
        ok,
        format!(
            "verified {vc} conservative vs {va} all-triggers; removed {} vs {}; functions with fewer instantiations: {lower:?}",
            mc.removed.len(),
            ma.removed.len()
        ),
    );
}

#[test]
fn criterion_09_matching_loop_terminates() {
    let ws = fixture_ws("matching_loop.tv");
    let cfg = RunConfig::default();
    let start = Instant::now();
    let run = verify_program(&ws.program, &cfg, Selection::User).unwrap();
    let elapsed = start.elapsed();
    let f = &run.functions[0];
    let ok = f.status == Status::Unknown(UnknownReason::Rounds)
        && f.instantiations() <= cfg.limits.max_instantiations
        && elapsed < Duration::from_secs(5);
    report(
        9,
        "matching loop terminates",
        ok,
        format!("{} after {} instantiations in {elapsed:?}", f.status, f.instantiations()),
    );
}

#[test]
fn criterion_10_scc_ordering() {
    let ws = corpus_ws();
    let cfg = RunConfig { jobs: 4, ..RunConfig::default() };
    let run = verify_program(&ws.program, &cfg, Selection::User).unwrap();
    let mut pairs = 0;
    let mut bad = Vec::new();
    for f in &run.functions {
        for lemma in run.deps.get(&f.function).into_iter().flatten() {
            if let Some(l) = run.get(lemma) {
                pairs += 1;
                if l.finished >= f.started {
                    bad.push(format!("{lemma} -> {}", f.function));
                }
            }
        }
    }
    let cycle = tunav(&["verify", "fixtures/broadcast_cycle.tv"]);
    let names = cycle.stderr.contains("broadcast_cycle::lemma_a") && cycle.stderr.contains("broadcast_cycle::lemma_b");
    let ok = pairs > 0 && bad.is_empty() && cycle.code == 2 && names;
    report(
        10,
        "scc ordering",
        ok,
        format!("{pairs} lemma/user pairs, out of order: {bad:?}; cycle exit {} `{}`", cycle.code, cycle.stderr.trim()),
    );
}

#[test]
fn criterion_11_failure_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("samples.csv");
    let budget = RunConfig::default().limits.time_budget_ms as f64;
    let mut a = args(&["sample-failures", "--n", "20", "--seed", "1", "--out"], &[out.display().to_string()]);
    a.extend(corpus());
    let run = tunav(&a);
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default().to_string();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    let col = |name: &str| header.split(',').position(|h| h == name);
    let (fi, ri) = (col("failure_ms"), col("ratio"));
    let worst = rows
        .iter()
        .filter_map(|r| fi.and_then(|i| r.get(i)).and_then(|v| v.parse::<f64>().ok()))
        .fold(0.0f64, f64::max);
    let ratios = rows.iter().filter(|r| ri.and_then(|i| r.get(i)).is_some_and(|v| !v.is_empty())).count();
    let ok = run.code == 0 && rows.len() == 20 && ratios == 20 && worst <= budget;
    report(
        11,
        "failure sampling",
        ok,
        format!("exit {}, {} rows, {ratios} ratios, slowest failure {worst:.2} ms (budget {budget} ms)", run.code, rows.len()),
    );
}

#[test]
fn criterion_12_determinism() {
    let files = corpus();
    let one = args(&["verify", "--jobs", "1", "--no-timing"], &files);
    let first = tunav(&one);
    let second = tunav(&one);
    let min = args(&["minimize", "--jobs", "1", "--no-timing"], &files);
    let (m1, m2) = (tunav(&min), tunav(&min));
    let eight = tunav(&args(&["verify", "--jobs", "8", "--no-timing"], &files));
    let s1: BTreeMap<_, _> = statuses(&first.stdout).into_iter().collect();
    let s8: BTreeMap<_, _> = statuses(&eight.stdout).into_iter().collect();
    let identical = first.stdout == second.stdout && m1.stdout == m2.stdout;
    let ok = identical && !s1.is_empty() && s1 == s8;
    report(
        12,
        "determinism",
        ok,
        format!("{} functions, repeated runs identical {identical}, jobs 8 statuses equal {}", s1.len(), s1 == s8),
    );
}
