//! Random finite-domain obligations for soundness checking.
//!
//! A case fixes a model, writes a proof function whose preconditions hold in
//! it and picks a goal (some derivable, some not). Whenever the prover says
//! Verified, the goal is evaluated on the model and on perturbed models that
//! satisfy the preconditions.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tunav_core::driver::{function_status, load_sources, RunConfig};
use tunav_core::engine::{eval_finite, FnTable, Model, Status};
use tunav_core::ir::TExpr;

pub const DOMAIN: usize = 4;
const VARS: [&str; 3] = ["a", "b", "c"];
const TABLE: std::ops::RangeInclusive<i128> = -8..=8;
const PERTURBED: usize = 40;

#[derive(Debug)]
pub struct CaseResult {
    pub seed: u64,
    pub source: String,
    pub status: Status,
    /// Models satisfying the preconditions that were checked.
    pub models_checked: usize,
    pub violation: Option<String>,
}

fn model(rng: &mut ChaCha8Rng) -> Model {
    let mut m = Model::default();
    for v in VARS {
        m.vars.insert(v.into(), rng.gen_range(-3..=3));
    }
    let mut f = FnTable::default();
    let mut p = FnTable::default();
    for x in TABLE {
        f.points.insert(vec![x], rng.gen_range(-3..=3));
        p.points.insert(vec![x], rng.gen_range(0..=1));
    }
    m.funcs.insert("gen::f".into(), f);
    m.funcs.insert("gen::p".into(), p);
    m
}

fn perturb(rng: &mut ChaCha8Rng, base: &Model) -> Model {
    let mut m = base.clone();
    for _ in 0..rng.gen_range(1..=3) {
        match rng.gen_range(0..3) {
            0 => {
                let v = VARS[rng.gen_range(0..VARS.len())];
                m.vars.insert(v.into(), rng.gen_range(-3..=3));
            }
            1 => {
                let x = rng.gen_range(TABLE);
                m.funcs.get_mut("gen::f").unwrap().points.insert(vec![x], rng.gen_range(-3..=3));
            }
            _ => {
                let x = rng.gen_range(TABLE);
                m.funcs.get_mut("gen::p").unwrap().points.insert(vec![x], rng.gen_range(0..=1));
            }
        }
    }
    m
}

/// Integer term; `bound` is the quantified variable in scope, if any.
fn term(rng: &mut ChaCha8Rng, depth: u32, bound: Option<&str>) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return match rng.gen_range(0..5) {
            0 => rng.gen_range(-2..=3).to_string(),
            4 if bound.is_some() => bound.unwrap().to_string(),
            _ => VARS[rng.gen_range(0..VARS.len())].to_string(),
        };
    }
    match rng.gen_range(0..4) {
        0 | 1 => format!("f({})", term(rng, depth - 1, bound)),
        2 => format!("({} + {})", term(rng, depth - 1, bound), term(rng, depth - 1, bound)),
        _ => format!("({} - {})", term(rng, depth - 1, bound), term(rng, depth - 1, bound)),
    }
}

fn atom(rng: &mut ChaCha8Rng, bound: Option<&str>) -> String {
    let op = ["<=", "<", "==", "!="][rng.gen_range(0..4)];
    match rng.gen_range(0..5) {
        0 => format!("p({})", term(rng, 1, bound)),
        _ => format!("{} {op} {}", term(rng, 2, bound), term(rng, 2, bound)),
    }
}

/// Body of a bounded quantifier over `i`; always mentions `f(i)` or `p(i)`.
fn quant_body(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => format!("f(i) >= {}", term(rng, 1, None)),
        1 => "p(i)".to_string(),
        2 => format!("p(i) || f(i) == {}", term(rng, 1, None)),
        _ => format!("f(i) <= f(i) + {}", rng.gen_range(-1..=2)),
    }
}

struct Hyp {
    text: String,
    /// `(body with i, bound)` when the hypothesis is a bounded forall.
    quant: Option<(String, i64)>,
}

fn forall(body: &str, k: i64) -> String {
    format!("forall|i: int| 0 <= i < {k} ==> ({body})")
}

fn source(requires: &[String], goal: &str) -> String {
    let mut s = String::from("spec fn f(x: int) -> int;\nspec fn p(x: int) -> bool;\n\nproof fn t(a: int, b: int, c: int)\n");
    if !requires.is_empty() {
        s.push_str("    requires\n");
        for r in requires {
            s.push_str(&format!("        {r},\n"));
        }
    }
    s.push_str(&format!("    ensures\n        {goal},\n{{\n}}\n"));
    s
}

struct Resolved {
    program: tunav_core::resolve::Program,
    requires: Vec<TExpr>,
    ensures: Vec<TExpr>,
}

fn resolve(text: &str) -> Resolved {
    let ws = load_sources(vec![(PathBuf::from("gen.tv"), text.to_string())])
        .unwrap_or_else(|e| panic!("generated program does not load: {e}\n{text}"));
    let def = &ws.program.fns["gen::t"];
    Resolved {
        requires: def.requires.clone(),
        ensures: def.ensures.clone(),
        program: ws.program.clone(),
    }
}

fn holds(e: &TExpr, m: &Model) -> bool {
    eval_finite(e, DOMAIN, m).unwrap_or_else(|err| panic!("oracle cannot evaluate `{e}`: {err}"))
}

fn goal(rng: &mut ChaCha8Rng, hyps: &[Hyp]) -> String {
    let pick = |rng: &mut ChaCha8Rng| &hyps[rng.gen_range(0..hyps.len())];
    match rng.gen_range(0..7) {
        0 | 1 => atom(rng, None),
        2 => format!("({}) && ({})", pick(rng).text, pick(rng).text),
        3 => format!("({}) || ({})", pick(rng).text, atom(rng, None)),
        4 => {
            let h = pick(rng);
            match &h.quant {
                Some((body, k)) => {
                    let j = rng.gen_range(0..*k + 1);
                    format!("({})", body.replace('i', &j.to_string()))
                }
                None => format!("!({}) ==> ({})", h.text, atom(rng, None)),
            }
        }
        5 => {
            let h = pick(rng);
            match &h.quant {
                Some((body, k)) => forall(body, (k - 1).max(0) + rng.gen_range(0..2)),
                None => format!("({}) || ({})", h.text, pick(rng).text),
            }
        }
        _ => format!("({}) && ({})", pick(rng).text, atom(rng, None)),
    }
}

/// Generate, prove and check the case for `seed`.
pub fn run_case(seed: u64) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = model(&mut rng);
    let mut hyps = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        hyps.push(Hyp { text: atom(&mut rng, None), quant: None });
    }
    if rng.gen_bool(0.6) {
        let body = quant_body(&mut rng);
        let k = rng.gen_range(1..=3);
        hyps.push(Hyp { text: forall(&body, k), quant: Some((body, k)) });
    }
    // Keep hypotheses true in the model by negating false ones.
    let raw: Vec<String> = hyps.iter().map(|h| h.text.clone()).collect();
    let first = resolve(&source(&raw, "true"));
    for (h, e) in hyps.iter_mut().zip(&first.requires) {
        if !holds(e, &m) {
            h.text = format!("!({})", h.text);
            h.quant = None;
        }
    }
    let g = goal(&mut rng, &hyps);
    let requires: Vec<String> = hyps.iter().map(|h| h.text.clone()).collect();
    let text = source(&requires, &g);
    let r = resolve(&text);
    let cfg = {
        let mut c = RunConfig::default();
        c.vc.default_prelude = false;
        c.timing = false;
        c
    };
    let status = function_status(&r.program, "gen::t", &cfg);
    let mut result = CaseResult { seed, source: text, status, models_checked: 0, violation: None };
    if !status.is_verified() {
        return result;
    }
    let mut models = vec![m.clone()];
    models.extend((0..PERTURBED).map(|_| perturb(&mut rng, &m)));
    for (n, model) in models.iter().enumerate() {
        if !r.requires.iter().all(|e| holds(e, model)) {
            continue;
        }
        result.models_checked += 1;
        if !r.ensures.iter().all(|e| holds(e, model)) {
            result.violation = Some(format!("goal false in model #{n}: {model:?}"));
            break;
        }
    }
    result
}
