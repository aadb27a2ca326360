//! Pretty-printer. Output reparses to a structurally equal AST; comments and
//! original layout are not preserved.

use std::collections::HashSet;
use std::fmt::Write;

use super::ast::*;
use super::span::SourceSpan;
use super::ParseError;

/// Print `program` with every assert statement whose span is in `removed`
/// deleted. Removing an `assert(..) by { .. }` drops its whole block.
pub fn render_without_sites(
    program: &ProgramAst,
    removed: &HashSet<SourceSpan>,
) -> Result<String, ParseError> {
    let mut found = HashSet::new();
    for decl in &program.decls {
        if let DeclKind::ProofFn(f) = &decl.kind {
            collect_assert_spans(&f.body, &mut found);
        }
    }
    if let Some(bad) = removed.iter().find(|s| !found.contains(*s)) {
        return Err(ParseError::new(*bad, "span does not identify an assert statement"));
    }
    Ok(render_program(program, removed))
}

fn collect_assert_spans(stmts: &[Stmt], out: &mut HashSet<SourceSpan>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assert(_) => {
                out.insert(s.span);
            }
            StmtKind::AssertBy(_, body) => {
                out.insert(s.span);
                collect_assert_spans(body, out);
            }
            _ => {}
        }
    }
}

pub fn render_program(program: &ProgramAst, removed: &HashSet<SourceSpan>) -> String {
    let mut out = String::new();
    if let Some(m) = &program.module {
        let _ = writeln!(out, "module {};", m.joined());
    }
    for decl in &program.decls {
        if !out.is_empty() {
            out.push('\n');
        }
        render_decl(&mut out, decl, removed);
    }
    out
}

fn render_type(t: &TypeExpr) -> String {
    if t.args.is_empty() {
        t.name.joined()
    } else {
        let args: Vec<_> = t.args.iter().map(render_type).collect();
        format!("{}<{}>", t.name.joined(), args.join(", "))
    }
}

fn render_params(params: &[Param]) -> String {
    params
        .iter()
        .map(|p| format!("{}: {}", p.name.name, render_type(&p.ty)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_type_params(tps: &[Ident]) -> String {
    if tps.is_empty() {
        String::new()
    } else {
        let names: Vec<_> = tps.iter().map(|t| t.name.as_str()).collect();
        format!("<{}>", names.join(", "))
    }
}

fn render_paths(paths: &[PathRef]) -> String {
    paths.iter().map(|p| p.joined()).collect::<Vec<_>>().join(", ")
}

fn render_decl(out: &mut String, decl: &Declaration, removed: &HashSet<SourceSpan>) {
    match &decl.kind {
        DeclKind::SpecFn(f) => {
            let _ = write!(
                out,
                "spec fn {}{}({}) -> {}",
                f.name.name,
                render_type_params(&f.type_params),
                render_params(&f.params),
                render_type(&f.ret)
            );
            match &f.body {
                Some(body) => {
                    let _ = writeln!(out, " {{\n    {}\n}}", render_expr(body));
                }
                None => out.push_str(";\n"),
            }
        }
        DeclKind::ProofFn(f) | DeclKind::AxiomFn(f) => {
            let is_axiom = matches!(decl.kind, DeclKind::AxiomFn(_));
            let _ = write!(
                out,
                "{}{} fn {}{}({})",
                if f.broadcast { "broadcast " } else { "" },
                if is_axiom { "axiom" } else { "proof" },
                f.name.name,
                render_type_params(&f.type_params),
                render_params(&f.params)
            );
            for (kw, clauses) in [("requires", &f.requires), ("ensures", &f.ensures)] {
                if !clauses.is_empty() {
                    let _ = write!(out, "\n    {kw}");
                    for c in clauses.iter() {
                        let _ = write!(out, "\n        {},", render_expr(c));
                    }
                }
            }
            if is_axiom {
                out.push_str(";\n");
            } else {
                out.push_str("\n{\n");
                render_block(out, &f.body, 1, removed);
                out.push_str("}\n");
            }
        }
        DeclKind::BroadcastGroup { name, members } => {
            let _ = writeln!(out, "broadcast group {} {{", name.name);
            for m in members {
                let _ = writeln!(out, "    {},", m.joined());
            }
            out.push_str("}\n");
        }
        DeclKind::BroadcastUse(paths) => {
            let _ = writeln!(out, "broadcast use {{{}}};", render_paths(paths));
        }
        DeclKind::SortDecl { name, params } => {
            let _ = writeln!(out, "type {}{};", name.name, render_type_params(params));
        }
        DeclKind::ConstDecl { name, ty, value } => {
            let _ = write!(out, "const {}: {}", name.name, render_type(ty));
            if let Some(v) = value {
                let _ = write!(out, " = {}", render_expr(v));
            }
            out.push_str(";\n");
        }
    }
}

fn render_block(out: &mut String, stmts: &[Stmt], depth: usize, removed: &HashSet<SourceSpan>) {
    let pad = "    ".repeat(depth);
    for s in stmts {
        if removed.contains(&s.span) && s.kind.is_assert() {
            continue;
        }
        match &s.kind {
            StmtKind::Assert(e) => {
                let _ = writeln!(out, "{pad}assert({});", render_expr(e));
            }
            StmtKind::AssertBy(e, body) => {
                let _ = writeln!(out, "{pad}assert({}) by {{", render_expr(e));
                render_block(out, body, depth + 1, removed);
                let _ = writeln!(out, "{pad}}}");
            }
            StmtKind::Let { name, ty, value } => {
                let ty = ty.as_ref().map(|t| format!(": {}", render_type(t))).unwrap_or_default();
                let _ = writeln!(out, "{pad}let {}{} = {};", name.name, ty, render_expr(value));
            }
            StmtKind::LemmaCall { func, args } => {
                let args: Vec<_> = args.iter().map(render_expr).collect();
                let _ = writeln!(out, "{pad}{}({});", func.joined(), args.join(", "));
            }
            StmtKind::BroadcastUse(paths) => {
                let _ = writeln!(out, "{pad}broadcast use {{{}}};", render_paths(paths));
            }
        }
    }
}

fn is_atomic(e: &Expr) -> bool {
    !e.trigger && matches!(e.kind, ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) | ExprKind::Call { .. })
}

fn render_operand(e: &Expr) -> String {
    if is_atomic(e) {
        render_expr(e)
    } else {
        format!("({})", render_expr(e))
    }
}

/// Render an expression with explicit parentheses around every compound
/// operand.
pub fn render_expr(e: &Expr) -> String {
    let body = match &e.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Call { func, args } => {
            let args: Vec<_> = args.iter().map(render_expr).collect();
            format!("{}({})", func.joined(), args.join(", "))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            format!("{} {} {}", render_operand(lhs), op.symbol(), render_operand(rhs))
        }
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            };
            format!("{sym}{}", render_operand(operand))
        }
        ExprKind::Forall {
            binders,
            all_triggers,
            body,
        } => format!(
            "forall|{}| {}{}",
            render_binders(binders),
            if *all_triggers { "#![all_triggers] " } else { "" },
            render_expr(body)
        ),
        ExprKind::Exists { binders, body } => {
            format!("exists|{}| {}", render_binders(binders), render_expr(body))
        }
        ExprKind::If { cond, then, els } => format!(
            "if {} {{ {} }} else {{ {} }}",
            render_expr(cond),
            render_expr(then),
            render_expr(els)
        ),
    };
    if e.trigger {
        let inner = if matches!(e.kind, ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) | ExprKind::Call { .. }) {
            body
        } else {
            format!("({body})")
        };
        format!("#[trigger] {inner}")
    } else {
        body
    }
}

fn render_binders(bs: &[Binder]) -> String {
    bs.iter()
        .map(|b| format!("{}: {}", b.name.name, render_type(&b.ty)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Structural equality: spans and layout are ignored.
pub fn structurally_equal(a: &ProgramAst, b: &ProgramAst) -> bool {
    let none = HashSet::new();
    render_program(a, &none) == render_program(b, &none)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_module;
    use std::path::Path;

    const TWO_ASSERTS: &str = "proof fn f(a: Seq<int>) {\n    assert(1 + 1 == 2);\n    assert(a.push(3).contains(3)) by {\n        assert(true);\n    }\n}\n";

    fn sites(p: &ProgramAst) -> Vec<SourceSpan> {
        let DeclKind::ProofFn(f) = &p.decls[0].kind else { panic!() };
        f.body.iter().map(|s| s.span).collect()
    }

    #[test]
    fn removing_everything_leaves_no_asserts() {
        let p = parse_module(TWO_ASSERTS, Path::new("r.tv")).unwrap();
        let removed: HashSet<_> = sites(&p).into_iter().collect();
        let text = render_without_sites(&p, &removed).unwrap();
        assert!(!text.contains("assert"), "{text}");
        parse_module(&text, Path::new("r2.tv")).unwrap();
    }

    #[test]
    fn removing_assert_by_drops_block() {
        let p = parse_module(TWO_ASSERTS, Path::new("r.tv")).unwrap();
        let removed: HashSet<_> = [sites(&p)[1]].into_iter().collect();
        let text = render_without_sites(&p, &removed).unwrap();
        assert_eq!(text.matches("assert").count(), 1);
        assert!(!text.contains("by"));
    }

    #[test]
    fn empty_removal_round_trips() {
        let p = parse_module(TWO_ASSERTS, Path::new("r.tv")).unwrap();
        let text = render_without_sites(&p, &HashSet::new()).unwrap();
        let q = parse_module(&text, Path::new("r3.tv")).unwrap();
        assert!(structurally_equal(&p, &q));
    }

    #[test]
    fn rejects_non_assert_span() {
        let p = parse_module(TWO_ASSERTS, Path::new("r.tv")).unwrap();
        let removed: HashSet<_> = [p.decls[0].span].into_iter().collect();
        assert!(render_without_sites(&p, &removed).is_err());
    }

    #[test]
    fn trigger_marks_survive_printing() {
        let src = "broadcast axiom fn ax(s1: Seq<int>, s2: Seq<int>) ensures #[trigger] s1.add(s2).len() == s1.len() + s2.len();";
        let p = parse_module(src, Path::new("t.tv")).unwrap();
        let text = render_program(&p, &HashSet::new());
        assert!(text.contains("#[trigger] len(add(s1, s2))"), "{text}");
        let q = parse_module(&text, Path::new("t2.tv")).unwrap();
        assert!(structurally_equal(&p, &q));
    }
}
