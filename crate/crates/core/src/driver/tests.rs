use std::path::PathBuf;

use super::*;
use crate::engine::UnknownReason;

fn ws(src: &str) -> Workspace {
    load_sources(vec![(PathBuf::from("t.tv"), src.to_string())]).unwrap()
}

fn run(src: &str, cfg: &RunConfig) -> RunReport {
    verify_program(&ws(src).program, cfg, Selection::User).unwrap()
}

fn usage_cfg() -> RunConfig {
    RunConfig { usage_report: true, timing: false, ..RunConfig::default() }
}

const GROUP: &str = "proof fn push_contains(a: Seq<int>) {\n  broadcast use group_seq_properties;\n  let b = a.push(3);\n  assert(b.contains(3));\n}\n";

#[test]
fn usage_through_group() {
    let r = run(GROUP, &usage_cfg());
    let f = &r.functions[0];
    assert_eq!(f.status, Status::Verified);
    assert_eq!(
        format_usage(&f.usage),
        "checking this function used these broadcasted lemmas and broadcast groups:\n        - (group) prelude::seq::group_seq_properties,\n        - prelude::seq::lemma_seq_contains_after_push\n"
    );
}

#[test]
fn usage_of_direct_import() {
    let src = GROUP.replace("group_seq_properties", "lemma_seq_contains_after_push");
    let f = &run(&src, &usage_cfg()).functions[0];
    assert_eq!(
        format_usage(&f.usage),
        format!("{USAGE_HEADER}\n        - prelude::seq::lemma_seq_contains_after_push\n")
    );
}

#[test]
fn usage_without_broadcast_facts() {
    let f = &run("proof fn f(x: int) { assert(x + 1 > x); }", &usage_cfg()).functions[0];
    assert_eq!(format_usage(&f.usage), format!("{USAGE_HEADER}\n"));
}

#[test]
fn aggregate_prefers_failure() {
    let u = Status::Unknown(UnknownReason::Rounds);
    assert_eq!(aggregate([]), Status::Verified);
    assert_eq!(aggregate([Status::Verified, u]), u);
    assert_eq!(aggregate([u, Status::Failed, Status::Verified]), Status::Failed);
}

const LAYERED: &str = "spec fn f(i: int) -> int;\nbroadcast proof fn lemma_f(i: int)\n  requires 0 <= i,\n  ensures #[trigger] f(i) == f(i),\n{}\nproof fn user(x: int)\n  requires 0 <= x,\n{\n  broadcast use lemma_f;\n  assert(f(x) == f(x));\n}\n";

#[test]
fn lemmas_finish_before_users_start() {
    for jobs in [1, 4] {
        let r = run(LAYERED, &RunConfig { jobs, ..RunConfig::default() });
        let lemma = r.get("t::lemma_f").unwrap();
        let user = r.get("t::user").unwrap();
        assert!(r.deps["t::user"].contains("t::lemma_f"));
        assert!(lemma.finished < user.started, "jobs={jobs}");
    }
}

#[test]
fn text_report_is_in_declaration_order() {
    let cfg = RunConfig { timing: false, ..RunConfig::default() };
    let text = render_report(&run(LAYERED, &cfg), &cfg);
    assert_eq!(
        text,
        "PASS t::lemma_f [1 obligations, 0 instantiations]\nPASS t::user [1 obligations, 0 instantiations]\nverified 2 of 2 functions\n"
    );
}

#[test]
fn failures_name_their_site() {
    let cfg = RunConfig { timing: false, ..RunConfig::default() };
    let text = render_report(&run("proof fn f() {\n  assert(1 == 2);\n}", &cfg), &cfg);
    assert!(text.starts_with("FAIL t::f"), "{text}");
    assert!(text.contains("t.tv:2:3: assertion failed"), "{text}");
}

#[test]
fn metrics_counts_sum_to_total() {
    let cfg = RunConfig::default();
    let r = run(GROUP, &cfg);
    let recs = MetricsRecord::from_run(&r, &cfg);
    assert_eq!(recs[0].instantiations, recs[0].fact_instantiations.values().sum::<u64>());
    assert!(recs[0].instantiations > 0);
    assert!(recs[0].time_ms.unwrap() >= 0.0);
    let csv = metrics_to_string(&recs, MetricsFormat::Csv);
    assert!(csv.starts_with("function,status,time_ms,obligations,instantiations,rounds,context_facts,strategy\n"));
    let json = metrics_to_string(&recs, MetricsFormat::Json);
    assert!(json.contains("\"fact_instantiations\""));
}

#[test]
fn metrics_round_trip() {
    let dir = std::env::temp_dir().join(format!("tunav-metrics-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = RunConfig { timing: false, ..RunConfig::default() };
    let recs = MetricsRecord::from_run(&run(GROUP, &cfg), &cfg);
    for name in ["m.csv", "m.json"] {
        let p = dir.join(name);
        write_metrics(&p, &recs).unwrap();
        let back = read_metrics(&p).unwrap();
        assert_eq!(back[0].function, recs[0].function);
        assert_eq!(back[0].instantiations, recs[0].instantiations);
        assert_eq!(back[0].time_ms, None);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn parallel_statuses_match_sequential() {
    let src = format!("{LAYERED}\nproof fn bad() {{ assert(1 == 2); }}\n{}", GROUP);
    let seq = run(&src, &RunConfig::default());
    let par = run(&src, &RunConfig { jobs: 8, ..RunConfig::default() });
    let st = |r: &RunReport| r.functions.iter().map(|f| (f.function.clone(), f.status)).collect::<Vec<_>>();
    assert_eq!(st(&seq), st(&par));
}

#[test]
fn import_items_are_classified() {
    let w = ws("proof fn f() {}");
    assert_eq!(import_item(&w.program, "prelude::seq::group_seq_properties").unwrap().kind, UseKind::Group);
    assert_eq!(import_item(&w.program, "prelude::seq::axiom_seq_add_len").unwrap().kind, UseKind::Fact);
    assert!(import_item(&w.program, "prelude::nope").is_err());
}

#[test]
fn smtlib_files_are_written() {
    let dir = std::env::temp_dir().join(format!("tunav-smt-{}", std::process::id()));
    let cfg = RunConfig { emit_smtlib: Some(dir.clone()), ..RunConfig::default() };
    run(GROUP, &cfg);
    let text = std::fs::read_to_string(dir.join("t__push_contains_0.smt2")).unwrap();
    assert!(text.contains("(check-sat)"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn prelude_only_checks_lemmas() {
    let r = verify_program(&ws("").program, &RunConfig::default(), Selection::PreludeOnly).unwrap();
    assert!(r.functions.len() >= 10);
    assert!(r.functions.iter().all(|f| f.function.starts_with("prelude::")));
    assert!(r.all_verified());
}
