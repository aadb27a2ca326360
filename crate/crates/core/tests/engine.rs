use std::path::PathBuf;

use proptest::prelude::*;
use tunav_core::driver::load_sources;
use tunav_core::engine::{ematch, instantiate_round, prove, Limits, ProverState, Status};
use tunav_core::resolve::Program;
use tunav_core::vcgen::{generate_obligations, Obligation, VcConfig};

fn program(src: &str) -> Program {
    load_sources(vec![(PathBuf::from("t.tv"), src.to_string())]).unwrap().program
}

fn obligations(src: &str, function: &str) -> Vec<Obligation> {
    generate_obligations(&program(src), function, &VcConfig::default()).unwrap()
}

fn state(ob: &Obligation) -> ProverState {
    let ground: Vec<_> = ob.context.ground.iter().map(|h| h.expr.clone()).collect();
    ProverState::with_context(&ground, &ob.context.facts, &Limits::default()).expect("consistent context")
}

const POS: &str = "spec fn f(x: int) -> int;
broadcast axiom fn f_pos(x: int)
    ensures
        #[trigger] f(x) > 0;
proof fn t()
    requires
        f(1) + f(2) == f(3),
{
    broadcast use f_pos;
    assert(f(1) > 0);
}";

#[test]
fn ematch_finds_each_ground_application_once() {
    let ob = &obligations(POS, "t::t")[0];
    let fact = ob.context.facts.iter().find(|f| f.label.contains("f_pos")).cloned().expect("f_pos in context");
    let mut st = state(ob);
    let trigger = &fact.triggers.groups[0];
    assert_eq!(ematch(&mut st, trigger, &fact).len(), 3);
    let n = instantiate_round(&mut st).unwrap();
    assert!(n >= 3, "{n}");
    assert!(ematch(&mut st, trigger, &fact).is_empty(), "instantiated substitutions are not matched again");
}

fn pairs_source(k: usize) -> String {
    let fs: Vec<String> = (0..k).map(|i| format!("f({i})")).collect();
    let gs: Vec<String> = (0..k).map(|i| format!("g({})", i + 100)).collect();
    format!(
        "spec fn f(x: int) -> int;\nspec fn g(x: int) -> int;\nspec fn r(x: int, y: int) -> bool;\n\
         proof fn t()\n    requires\n        forall|x: int, y: int| #[trigger] f(x) + #[trigger] g(y) > 0 ==> r(x, y),\n        \
         {} + {} == 0,\n{{\n    assert(true);\n}}",
        fs.join(" + "),
        gs.join(" + ")
    )
}

#[test]
fn multi_trigger_round_pairs_every_term() {
    for k in 1..=4 {
        let ob = &obligations(&pairs_source(k), "t::t")[0];
        let mut st = state(ob);
        let before = st.instantiations();
        instantiate_round(&mut st).unwrap();
        assert_eq!(st.instantiations() - before, (k * k) as u64, "k = {k}");
    }
}

const CORE_CASES: &[(&str, &str)] = &[
    (
        "proof fn t(a: Seq<int>) {\n    broadcast use {prelude::seq::group_seq_properties};\n    assert(a.push(3).contains(3));\n}",
        "t::t",
    ),
    (
        "spec fn is_even(i: int) -> bool { i % 2 == 0 }\nproof fn t(s: Seq<int>)\n    requires 5 <= s.len(), forall|i: int| 0 <= i < s.len() ==> is_even(#[trigger] s.index(i)),\n{\n    assert(s.index(3) % 2 == 0);\n}",
        "t::t",
    ),
    (
        "proof fn t(s: Set<int>, a: int, b: int) {\n    assert(s.insert(a).insert(b).contains(a));\n}",
        "t::t",
    ),
];

#[test]
fn used_core_alone_reproves() {
    for (src, f) in CORE_CASES {
        for ob in obligations(src, f) {
            let full = prove(&ob, &Limits::default());
            assert_eq!(full.status, Status::Verified, "{src}");
            let mut trimmed = ob.clone();
            trimmed.context.retain_facts(|q| full.used_core.contains(&q.origin));
            assert!(trimmed.context.facts.len() <= ob.context.facts.len());
            let again = prove(&trimmed, &Limits::default());
            assert_eq!(again.status, Status::Verified, "trimmed to {:?}\n{src}", full.used_core);
        }
    }
}

#[test]
fn more_rounds_never_lose_a_proof() {
    for (src, f) in CORE_CASES {
        for ob in obligations(src, f) {
            let mut lim = Limits::default();
            let mut last = Status::Failed;
            for rounds in 0..=6 {
                lim.max_rounds = rounds;
                let s = prove(&ob, &lim).status;
                if last.is_verified() {
                    assert!(s.is_verified(), "{src}: verified at {} rounds but not at {rounds}", rounds - 1);
                }
                last = s;
            }
            assert!(last.is_verified());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Extra hypotheses about fresh symbols cannot break a proof.
    #[test]
    fn unrelated_hypotheses_keep_proofs(k in 0usize..4, c in -5i64..5) {
        let extra: Vec<String> = (0..k).map(|i| format!("u(x + {i}) > {c}")).collect();
        let src = format!(
            "spec fn u(x: int) -> int;\nproof fn t(a: Seq<int>, x: int)\n    requires {}\n{{\n    assert(a.push(3).index(a.len()) == 3);\n}}",
            if extra.is_empty() { "true".to_string() } else { extra.join(", ") }
        );
        for ob in obligations(&src, "t::t") {
            prop_assert_eq!(prove(&ob, &Limits::default()).status, Status::Verified);
        }
    }
}
