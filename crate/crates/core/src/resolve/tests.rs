use super::*;
use crate::testutil::{program, try_program};

fn err(src: &str) -> ResolveError {
    match try_program(src) {
        Ok(_) => panic!("expected an error"),
        Err(e) => e,
    }
}

#[test]
fn non_broadcast_lemma_cannot_be_used() {
    let e = err("proof fn lemma_x() ensures true {}\nproof fn f() { broadcast use {lemma_x}; }");
    assert_eq!(e.kind, ResolveErrorKind::NotBroadcastable);
    assert!(e.message.contains("not a broadcastable fact"));
}

#[test]
fn group_contains_lemma_fact() {
    let p = program("proof fn f() {}");
    let id = p.registry.fact_id("prelude::seq::lemma_seq_contains_after_push").unwrap();
    assert!(p.registry.flatten("prelude::seq::group_seq_properties").contains(&id));
}

#[test]
fn duplicate_definition_across_files() {
    let mut asts = crate::prelude::load_prelude().unwrap();
    let a = "module m;\nspec fn f() -> int;";
    asts.push(crate::syntax::parse_module(a, std::path::Path::new("a.tv")).unwrap());
    asts.push(crate::syntax::parse_module(a, std::path::Path::new("b.tv")).unwrap());
    let e = resolve_program(&asts).unwrap_err();
    assert_eq!(e.kind, ResolveErrorKind::Duplicate);
    assert!(e.message.contains("m::f"));
}

#[test]
fn unresolved_and_arity_and_type_errors() {
    assert_eq!(err("proof fn f() { assert(g(1)); }").kind, ResolveErrorKind::Unresolved);
    assert_eq!(
        err("spec fn g(x: int) -> bool;\nproof fn f() { assert(g(1, 2)); }").kind,
        ResolveErrorKind::Arity
    );
    assert_eq!(
        err("spec fn g(x: int) -> bool;\nproof fn f() { assert(g(true)); }").kind,
        ResolveErrorKind::TypeMismatch
    );
    assert_eq!(err("proof fn f(s: Seq<int>) { assert(s.len()); }").kind, ResolveErrorKind::TypeMismatch);
}

#[test]
fn overloads_pick_by_receiver_sort() {
    let p = program("proof fn f(s: Seq<int>, t: Set<int>) { assert(s.len() >= 0 && t.len() >= 0); }");
    let mut calls = std::collections::BTreeSet::new();
    for s in p.fns["t::f"].body() {
        if let TStmt::Assert { expr, .. } = s {
            expr.calls(&mut calls);
        }
    }
    let paths: Vec<String> = calls.iter().map(|c| c.mangled()).collect();
    assert_eq!(paths, vec!["prelude::seq::len<int>", "prelude::set::len<int>"]);
}

#[test]
fn nat_binders_get_guards() {
    let p = program("spec fn f(x: int) -> bool;\nproof fn g() { assert(forall|k: nat| f(k)); }");
    let TStmt::Assert { expr, .. } = &p.fns["t::g"].body()[0] else { panic!() };
    assert_eq!(expr.to_string(), "forall|k: nat| (0 <= k) ==> f(k)");
}

#[test]
fn trigger_outside_quantifier_is_rejected() {
    let e = err("spec fn f(x: int) -> bool;\nproof fn g() { assert(#[trigger] f(1)); }");
    assert_eq!(e.kind, ResolveErrorKind::Misplaced);
}

#[test]
fn recursive_lemmas_are_rejected() {
    let e = err("proof fn a() { b(); }\nproof fn b() { a(); }");
    assert_eq!(e.kind, ResolveErrorKind::RecursiveLemma);
}

#[test]
fn cyclic_groups_are_rejected() {
    let e = err("broadcast group g1 { g2 }\nbroadcast group g2 { g1 }");
    assert_eq!(e.kind, ResolveErrorKind::CyclicGroup);
}

#[test]
fn flatten_is_idempotent_over_nested_groups() {
    let p = program(
        "broadcast axiom fn ax() ensures true;\nbroadcast group inner { ax, prelude::seq::group_seq_properties }\nbroadcast group outer { inner }",
    );
    let outer = p.registry.flatten("t::outer");
    let inner = p.registry.flatten("t::inner");
    assert_eq!(outer, inner);
    assert_eq!(outer.len(), 5);
    let expanded = p.registry.expand(&[UseItem {
        path: "t::outer".into(),
        kind: UseKind::Group,
        span: SourceSpan::default(),
    }]);
    let ids: BTreeSet<FactId> = expanded.iter().map(|f| f.fact).collect();
    assert_eq!(ids, outer);
    assert_eq!(expanded[0].groups_via, vec!["t::outer", "t::inner"]);
}

#[test]
fn lemma_before_user() {
    let p = program(
        "proof fn user() { broadcast use {lemma}; }\nbroadcast proof fn lemma(x: int) ensures x + 0 == x {}",
    );
    let order = order_tasks(&p, &[]).unwrap();
    let user: Vec<&str> = order.tasks.iter().filter(|t| !t.prelude).map(|t| t.function.as_str()).collect();
    assert_eq!(user, vec!["t::lemma", "t::user"]);
    assert!(order.layers.len() >= 2);
}

#[test]
fn two_cycle_is_reported() {
    let p = program(
        "broadcast proof fn a(x: int) ensures x == x { broadcast use {b}; }\nbroadcast proof fn b(x: int) ensures x == x { broadcast use {a}; }",
    );
    let e = order_tasks(&p, &[]).unwrap_err();
    assert_eq!(e.members, vec!["t::a", "t::b"]);
}

#[test]
fn self_import_is_a_cycle() {
    let p = program("broadcast proof fn a(x: int) ensures x == x { broadcast use {a}; }");
    assert_eq!(order_tasks(&p, &[]).unwrap_err().members, vec!["t::a"]);
}

#[test]
fn no_uses_keeps_source_order() {
    let p = program("proof fn c() {}\nproof fn a() {}\nproof fn b() {}");
    let order = order_tasks(&p, &[]).unwrap();
    let user: Vec<&str> = order.tasks.iter().filter(|t| !t.prelude).map(|t| t.function.as_str()).collect();
    assert_eq!(user, vec!["t::c", "t::a", "t::b"]);
}
