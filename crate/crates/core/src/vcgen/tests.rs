use super::*;
use crate::testutil::program;

fn shown_groups(f: &QuantifiedFact) -> Vec<Vec<String>> {
    f.triggers
        .groups
        .iter()
        .map(|g| g.exprs.iter().map(|e| e.to_string()).collect())
        .collect()
}

fn lower(p: &Program, path: &str, args: Vec<Type>) -> QuantifiedFact {
    lower_quantified_fact(p, &p.fns[path], &args, Strategy::Conservative, false).unwrap()
}

const PUSH_CONTAINS_LEMMA: &str = "proof fn push_contains(a: Seq<int>) {\n    broadcast use {lemma_seq_contains_after_push};\n    let b = a.push(3);\n    assert(b.contains(3));\n}";

const PUSH_CONTAINS_GROUP: &str = "proof fn push_contains(a: Seq<int>) {\n    broadcast use {group_seq_properties};\n    let b = a.push(3);\n    assert(b.contains(3));\n}";

#[test]
fn lowers_contains_after_push() {
    let p = program("");
    let f = lower(&p, "prelude::seq::lemma_seq_contains_after_push", vec![Type::Int]);
    assert_eq!(f.binders.len(), 3);
    assert_eq!(f.origin, Origin::BroadcastLemma("prelude::seq::lemma_seq_contains_after_push".into()));
    assert_eq!(shown_groups(&f), vec![vec!["contains(push(s, v), x)"]]);
    assert_eq!(f.conclusion.to_string(), "contains(push(s, v), x) <==> ((v == x) || contains(s, x))");
}

#[test]
fn lowers_add_len_axiom() {
    let p = program("");
    let f = lower(&p, "prelude::seq::axiom_seq_add_len", vec![Type::Int]);
    assert_eq!(f.origin, Origin::Axiom("prelude::seq::axiom_seq_add_len".into()));
    assert_eq!(shown_groups(&f), vec![vec!["len(add(s1, s2))"]]);
    assert_eq!(f.conclusion.to_string(), "len(add(s1, s2)) == (len(s1) + len(s2))");
}

#[test]
fn requires_become_hypothesis() {
    let p = program("spec fn f(a: int) -> int;\nbroadcast proof fn l(a: int) requires a > 0 ensures f(a) > 0 {}");
    let f = lower(&p, "t::l", vec![]);
    assert_eq!(f.hypothesis.to_string(), "a > 0");
    assert_eq!(f.body().to_string(), "(a > 0) ==> (f(a) > 0)");
    assert_eq!(shown_groups(&f), vec![vec!["f(a)"]]);
}

#[test]
fn hypothesis_used_for_coverage_when_needed() {
    let p = program(
        "spec fn f(a: int) -> bool;\nspec fn g(a: int) -> bool;\nbroadcast axiom fn l(a: int, b: int) requires f(b) ensures g(a);",
    );
    let f = lower(&p, "t::l", vec![]);
    assert_eq!(shown_groups(&f), vec![vec!["f(b)", "g(a)"]]);
}

fn fact_labels(ctx: &FactContext) -> Vec<String> {
    ctx.facts.iter().map(|f| f.label.clone()).collect()
}

#[test]
fn function_level_import() {
    let p = program(PUSH_CONTAINS_LEMMA);
    let env = VcEnv::new(&p, VcConfig::default());
    let ctx = env.assemble_context("t::push_contains", &[3]).unwrap();
    let f = ctx
        .facts
        .iter()
        .find(|f| f.label == "prelude::seq::lemma_seq_contains_after_push<int>")
        .unwrap();
    assert_eq!(f.origin, Origin::BroadcastLemma("prelude::seq::lemma_seq_contains_after_push".into()));
    assert!(f.groups_via.is_empty());
    // no import in effect before the directive
    let before = env.assemble_context("t::push_contains", &[0]).unwrap();
    assert!(!fact_labels(&before).contains(&f.label));
}

#[test]
fn group_import_records_route() {
    let p = program(PUSH_CONTAINS_GROUP);
    let env = VcEnv::new(&p, VcConfig::default());
    let ctx = env.assemble_context("t::push_contains", &[3]).unwrap();
    let f = ctx
        .facts
        .iter()
        .find(|f| f.label == "prelude::seq::lemma_seq_contains_after_push<int>")
        .unwrap();
    assert_eq!(f.groups_via, vec!["prelude::seq::group_seq_properties"]);
}

#[test]
fn block_local_import_does_not_leak() {
    let src = "proof fn f(a: Seq<int>) {\n    assert(a.push(1).contains(1)) by {\n        broadcast use {lemma_seq_push_contains_self};\n        assert(true);\n    }\n    assert(true);\n}";
    let p = program(src);
    let env = VcEnv::new(&p, VcConfig::default());
    let label = "prelude::seq::lemma_seq_push_contains_self<int>".to_string();
    let inside = env.assemble_context("t::f", &[0, 1]).unwrap();
    assert!(fact_labels(&inside).contains(&label));
    assert_eq!(inside.scope_chain.len(), 3);
    let after = env.assemble_context("t::f", &[1]).unwrap();
    assert!(!fact_labels(&after).contains(&label));
    let obligations = env.generate_obligations("t::f").unwrap();
    assert_eq!(obligations.len(), 3);
    assert!(fact_labels(&obligations[1].context).contains(&label));
    assert!(!fact_labels(&obligations[2].context).contains(&label));
    // the head fact persists, the inner one does not
    let ground: Vec<String> = obligations[2].context.ground.iter().map(|h| h.expr.to_string()).collect();
    assert_eq!(ground, vec!["contains(push(a, 1), 1)"]);
}

const PRIMES: &str = "spec fn divides(n: int, k: nat) -> bool { n % k == 0 }\n\nspec fn is_prime(n: nat) -> bool {\n  forall|k: nat| 2 <= k < n ==> !divides(n as int, k)\n}\n\nspec fn is_even(i: int) -> bool { divides(i, 2) }\n\nproof fn even_gt_2_isnt_prime(i: nat)\n  requires i > 2 && is_even(i as int)\n  ensures !is_prime(i) { }\n";

#[test]
fn even_gt_2_isnt_prime_has_one_obligation() {
    let p = program(PRIMES);
    let obligations = generate_obligations(&p, "t::even_gt_2_isnt_prime", &VcConfig::default()).unwrap();
    assert_eq!(obligations.len(), 1);
    let ob = &obligations[0];
    assert_eq!(ob.site, Site::Ensures(0));
    let ground: Vec<String> = ob.context.ground.iter().map(|h| h.expr.to_string()).collect();
    assert!(ground.contains(&"(i > 2) && is_even(i)".to_string()), "{ground:?}");
    let defs: BTreeSet<&str> = ob
        .context
        .facts
        .iter()
        .filter_map(|f| match &f.origin {
            Origin::DefinitionalAxiom(p) => Some(p.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(defs, ["t::divides", "t::is_even", "t::is_prime"].into_iter().collect());
}

#[test]
fn counts_asserts_and_ensures() {
    let p = program("proof fn f(x: int) ensures x == x { assert(true); assert(x == x); assert(1 < 2); }");
    assert_eq!(generate_obligations(&p, "t::f", &VcConfig::default()).unwrap().len(), 4);
}

#[test]
fn lemma_preconditions_precede_use() {
    let p = program(
        "proof fn l(a: int, b: int) requires a > 0, b > 0 ensures a + b > 1 {}\nproof fn f() { l(1, 2); assert(1 + 2 > 1); }",
    );
    let obs = generate_obligations(&p, "t::f", &VcConfig::default()).unwrap();
    let sites: Vec<&Site> = obs.iter().map(|o| &o.site).collect();
    assert!(matches!(sites[0], Site::LemmaPrecondition(_, 0)));
    assert!(matches!(sites[1], Site::LemmaPrecondition(_, 1)));
    assert!(matches!(sites[2], Site::Assert(_)));
    assert_eq!(obs[0].goal.to_string(), "1 > 0");
    assert_eq!(obs[1].goal.to_string(), "2 > 0");
    let ground: Vec<String> = obs[2].context.ground.iter().map(|h| h.expr.to_string()).collect();
    assert_eq!(ground, vec!["(1 + 2) > 1"]);
}

fn defs_of(src: &str, path: &str, fuel: u32) -> Vec<QuantifiedFact> {
    let p = program(src);
    let graph = SpecGraph::build(&p);
    let mut prep = |e: &TExpr, _: &FnDef| Ok(e.clone());
    definitional_axiom(&p, &graph, &FnRef::new(path, vec![]), fuel, &mut prep).unwrap()
}

#[test]
fn is_even_definition() {
    let facts = defs_of("spec fn is_even(i: int) -> bool { i % 2 == 0 }", "t::is_even", 1);
    assert_eq!(facts.len(), 1);
    assert_eq!(facts[0].formula().to_string(), "forall|i: int| is_even(i) <==> ((i % 2) == 0)");
    assert_eq!(shown_groups(&facts[0]), vec![vec!["is_even(i)"]]);
}

#[test]
fn zero_fuel_is_opaque() {
    assert!(defs_of("spec fn is_even(i: int) -> bool { i % 2 == 0 }", "t::is_even", 0).is_empty());
}

const SUM: &str = "spec fn sum(n: int) -> int { if n <= 0 { 0 } else { n + sum(n - 1) } }";

#[test]
fn recursive_definition_is_layered() {
    let facts = defs_of(SUM, "t::sum", 2);
    let shown: Vec<String> = facts.iter().map(|f| f.conclusion.to_string()).collect();
    assert_eq!(
        shown,
        vec![
            "sum(n) == (if n <= 0 { 0 } else { n + sum@1(n - 1) })",
            "sum(n) == sum@1(n)",
            "sum@1(n) == (if n <= 0 { 0 } else { n + sum@2(n - 1) })",
            "sum@1(n) == sum@2(n)",
        ]
    );
}

#[test]
fn generic_facts_follow_task_types() {
    let p = program("proof fn f(a: Seq<int>, b: Set<bool>) { assert(true); }");
    let obs = generate_obligations(&p, "t::f", &VcConfig::default()).unwrap();
    let labels = fact_labels(&obs[0].context);
    assert!(labels.contains(&"prelude::seq::axiom_seq_len_nonneg<int>".to_string()));
    assert!(labels.contains(&"prelude::set::axiom_set_len_nonneg<bool>".to_string()));
    assert!(!labels.iter().any(|l| l.contains("multiset")));
    assert!(!labels.contains(&"prelude::seq::axiom_seq_len_nonneg<bool>".to_string()));
}

#[test]
fn default_prelude_can_be_disabled() {
    let p = program("proof fn f(a: Seq<int>) { assert(true); }");
    let cfg = VcConfig {
        default_prelude: false,
        ..VcConfig::default()
    };
    let obs = generate_obligations(&p, "t::f", &cfg).unwrap();
    assert!(obs[0].context.facts.is_empty());
}

#[test]
fn trigger_errors_surface() {
    let p = program("proof fn f() { assert(forall|x: int| x == x); }");
    let err = generate_obligations(&p, "t::f", &VcConfig::default()).unwrap_err();
    assert_eq!(err.kind, TriggerErrorKind::NoValidTrigger);
}
