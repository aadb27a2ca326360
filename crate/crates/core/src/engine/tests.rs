use super::*;
use crate::testutil::program;
use crate::vcgen::{generate_obligations, VcConfig};

fn outcomes(src: &str, function: &str, cfg: &VcConfig) -> Vec<Outcome> {
    let p = program(src);
    generate_obligations(&p, function, cfg)
        .unwrap()
        .iter()
        .map(|ob| prove(ob, &Limits::default()))
        .collect()
}

fn statuses(src: &str, function: &str) -> Vec<Status> {
    outcomes(src, function, &VcConfig::default()).iter().map(|o| o.status).collect()
}

const PUSH_NONE: &str = "proof fn push_contains(a: Seq<int>) {\n    let b = a.push(3);\n    assert(b.contains(3));\n}";
const PUSH_LEMMA: &str = "proof fn push_contains(a: Seq<int>) {\n    broadcast use {lemma_seq_contains_after_push};\n    let b = a.push(3);\n    assert(b.contains(3));\n}";

#[test]
fn push_contains_needs_import() {
    assert_eq!(statuses(PUSH_NONE, "t::push_contains"), vec![Status::Failed]);
    let out = outcomes(PUSH_LEMMA, "t::push_contains", &VcConfig::default());
    assert_eq!(out[0].status, Status::Verified);
    assert!(out[0]
        .used_core
        .contains(&Origin::BroadcastLemma("prelude::seq::lemma_seq_contains_after_push".into())));
}

#[test]
fn false_assert_fails() {
    assert_eq!(statuses("proof fn f() { assert(1 == 2); }", "t::f"), vec![Status::Failed]);
}

#[test]
fn tautology_needs_no_facts() {
    let out = outcomes("proof fn f(x: int) { assert(x + 1 > x); }", "t::f", &VcConfig::default());
    assert_eq!(out[0].status, Status::Verified);
    assert!(out[0].used_core.iter().all(|o| o.broadcast_path().is_none()));
}

const PRIMES: &str = "spec fn divides(n: int, k: nat) -> bool { n % k == 0 }\nspec fn is_prime(n: nat) -> bool {\n  forall|k: nat| 2 <= k < n ==> !divides(n as int, k)\n}\nspec fn is_even(i: int) -> bool { divides(i, 2) }\nproof fn even_gt_2_isnt_prime(i: nat)\n  requires i > 2 && is_even(i as int)\n  ensures !is_prime(i) { }\n";

#[test]
fn even_numbers_above_two_are_not_prime() {
    assert_eq!(statuses(PRIMES, "t::even_gt_2_isnt_prime"), vec![Status::Verified]);
}

fn trigger_example(quant: &str) -> String {
    format!(
        "spec fn is_even(i: int) -> bool {{ i % 2 == 0 }}\nproof fn seq_trigger_example(s: Seq<int>)\n  requires 5 <= s.len(), {quant},\n{{\n  assert(s.index(3) % 2 == 0);\n}}"
    )
}

#[test]
fn trigger_choice_decides_the_index_example() {
    let manual = trigger_example("forall|i: int| 0 <= i < s.len() ==> #[trigger] is_even(s.index(i))");
    assert_eq!(statuses(&manual, "t::seq_trigger_example"), vec![Status::Failed]);
    let on_index = trigger_example("forall|i: int| 0 <= i < s.len() ==> is_even(#[trigger] s.index(i))");
    assert_eq!(statuses(&on_index, "t::seq_trigger_example"), vec![Status::Verified]);
    let all = trigger_example("forall|i: int| #![all_triggers] 0 <= i < s.len() ==> is_even(s.index(i))");
    assert_eq!(statuses(&all, "t::seq_trigger_example"), vec![Status::Verified]);
}

const AXIOM_USAGE: &str = "proof fn seq_axiom_usage(s1: Seq<nat>, s2: Seq<nat>)\n  requires s1.len() > 10 && s2.len() > 20\n  ensures s1.add(s2).len() > 30\n{}";

#[test]
fn add_len_comes_from_default_group() {
    let out = outcomes(AXIOM_USAGE, "t::seq_axiom_usage", &VcConfig::default());
    assert_eq!(out[0].status, Status::Verified);
    assert!(out[0].used_core.contains(&Origin::Axiom("prelude::seq::axiom_seq_add_len".into())));
    let bare = VcConfig {
        default_prelude: false,
        ..VcConfig::default()
    };
    assert_eq!(outcomes(AXIOM_USAGE, "t::seq_axiom_usage", &bare)[0].status, Status::Failed);
}

#[test]
fn matching_loop_hits_round_cap() {
    let src = "spec fn f(x: int) -> int;\nbroadcast axiom fn f_loop(x: int) ensures f(f(x)) == #[trigger] f(x) + 1;\nproof fn g() {\n  broadcast use {f_loop};\n  assert(f(0) == 7);\n}";
    let start = std::time::Instant::now();
    let out = outcomes(src, "t::g", &VcConfig::default());
    assert_eq!(out[0].status, Status::Unknown(UnknownReason::Rounds));
    assert!(out[0].metrics.instantiations <= Limits::default().max_instantiations);
    assert_eq!(out[0].metrics.rounds, 5);
    assert!(start.elapsed().as_secs() < 5);
}

#[test]
fn arithmetic_example_is_inconsistent() {
    let src = "spec fn x() -> int;\nspec fn y() -> int;\nproof fn f(z: int) requires x() > 10, y() > 20, z == x() + y() { assert(z > 30); }";
    assert_eq!(statuses(src, "t::f"), vec![Status::Verified]);
}

#[test]
fn prelude_lemmas_verify() {
    let p = program("");
    let env = crate::vcgen::VcEnv::new(&p, VcConfig::default());
    for def in p.fns.values().filter(|d| d.is_proof() && p.is_prelude_fn(d)) {
        for ob in env.generate_obligations(&def.path).unwrap() {
            let o = prove(&ob, &Limits::default());
            assert_eq!(o.status, Status::Verified, "{} {} {:?}", def.path, ob.describe(), o.metrics);
        }
    }
}
