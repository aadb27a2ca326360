//! Helpers shared by unit tests.

use std::path::Path;

use crate::ir::{Quantifier, TExprKind};
use crate::prelude::load_prelude;
use crate::resolve::{resolve_program, FnKind, Program, ResolveError};
use crate::syntax::parse_module;

pub fn try_program(src: &str) -> Result<Program, ResolveError> {
    let mut asts = load_prelude().unwrap();
    asts.push(parse_module(src, Path::new("t.tv")).unwrap());
    resolve_program(&asts)
}

pub fn program(src: &str) -> Program {
    try_program(src).unwrap_or_else(|e| panic!("{e}"))
}

/// Resolve `expr` (a quantifier) as the body of a spec fn with `params`,
/// alongside `decls`.
pub fn quantifier(decls: &str, params: &str, expr: &str) -> Quantifier {
    let src = format!("{decls}\nspec fn q__({params}) -> bool {{ {expr} }}");
    let p = program(&src);
    let FnKind::Spec { body: Some(body) } = &p.fns["t::q__"].kind else {
        panic!("no body")
    };
    match &body.kind {
        TExprKind::Quant(q) => (**q).clone(),
        other => panic!("not a quantifier: {other:?}"),
    }
}
