use super::*;
use crate::driver::{function_status, RunConfig};
use crate::testutil::program;

fn run(src: &str, scope: Scope) -> (MinimizationReport, Program) {
    let cfg = RunConfig::default();
    minimize(&program(src), &|p: &Program, f: &str| function_status(p, f, &cfg), scope).unwrap()
}

#[test]
fn one_assert_one_site() {
    let p = program("proof fn push_contains(a: Seq<int>) {\n  broadcast use lemma_seq_contains_after_push;\n  let b = a.push(3);\n  assert(b.contains(3));\n}");
    let sites = enumerate_assert_sites(&p);
    assert_eq!(sites.len(), 1);
    assert_eq!((sites[0].kind, sites[0].function.as_str()), (SiteKind::Assert, "t::push_contains"));
}

#[test]
fn block_is_listed_before_its_children() {
    let p = program("proof fn f(x: int) {\n  assert(x + 0 == x) by {\n    assert(x == x);\n    assert(0 + x == x);\n  }\n}");
    let sites = enumerate_assert_sites(&p);
    let kinds: Vec<_> = sites.iter().map(|s| (s.kind, s.parent)).collect();
    assert_eq!(kinds, vec![(SiteKind::AssertBy, None), (SiteKind::Assert, Some(0)), (SiteKind::Assert, Some(0))]);
}

#[test]
fn no_proof_functions_no_sites() {
    assert!(enumerate_assert_sites(&program("spec fn f(x: int) -> int { x }")).is_empty());
}

// The index assert supplies the witness term for `contains`.
const TWO: &str = "proof fn f(a: Seq<int>)\n  ensures a.push(3).contains(3)\n{\n  assert(1 + 1 == 2);\n  assert(a.push(3).index(a.len()) == 3);\n}";

#[test]
fn redundant_arithmetic_assert_goes() {
    let (r, pruned) = run(TWO, Scope::Function);
    assert_eq!((r.original_count, r.surviving_count), (2, 1));
    assert_eq!(r.removed.len(), 1);
    assert_eq!(r.removed[0].ordinal, 0);
    assert_eq!(enumerate_assert_sites(&pruned).len(), 1);
    assert_eq!(r.per_function, vec![FunctionBreakdown { function: "t::f".into(), original: 2, surviving: 1 }]);
}

#[test]
fn minimization_is_idempotent() {
    let (_, once) = run(TWO, Scope::Function);
    let cfg = RunConfig::default();
    let (again, twice) = minimize(&once, &|p: &Program, f: &str| function_status(p, f, &cfg), Scope::Function).unwrap();
    assert!(again.removed.is_empty());
    assert_eq!(enumerate_assert_sites(&twice), enumerate_assert_sites(&once));
}

#[test]
fn needed_hint_survives() {
    // The quantifier over `f` only fires once `f(3)` exists.
    let src = "spec fn f(i: int) -> int;\nproof fn g()\n  requires forall|i: int| #[trigger] f(i) > 0,\n  ensures exists|k: int| f(k) > 0,\n{\n  assert(f(3) > 0);\n}";
    let (r, _) = run(src, Scope::Function);
    assert!(r.removed.is_empty(), "{:?}", r.removed);
    assert_eq!(r.surviving_count, 1);
}

#[test]
fn removed_block_takes_children() {
    let src = "proof fn f(x: int) {\n  assert(x + 0 == x) by {\n    assert(x == x);\n  }\n}";
    let (r, _) = run(src, Scope::Project);
    assert_eq!(r.removed.len(), 2);
    assert_eq!(r.surviving_count, 0);
    assert_eq!(r.reverifications, 2);
}

#[test]
fn baseline_must_verify() {
    let cfg = RunConfig::default();
    let p = program("proof fn bad() { assert(1 == 2); }");
    let err = minimize(&p, &|p: &Program, f: &str| function_status(p, f, &cfg), Scope::Function).unwrap_err();
    assert_eq!(err, MinimizeError::BaselineFailure(vec!["t::bad".into()]));
}

#[test]
fn unknown_trials_keep_the_site() {
    let cfg = RunConfig::default();
    let p = program(TWO);
    let oracle = |q: &Program, f: &str| {
        if enumerate_assert_sites(q).len() < 2 {
            Status::Unknown(crate::engine::UnknownReason::Rounds)
        } else {
            function_status(q, f, &cfg)
        }
    };
    let (r, _) = minimize(&p, &oracle, Scope::Function).unwrap();
    assert!(r.removed.is_empty());
    assert_eq!(r.kept_on_unknown.len(), 2);
}
