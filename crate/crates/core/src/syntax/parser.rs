use std::path::Path;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::span::{FileId, SourceSpan};
use super::ParseError;

/// Parse one `.tv` source file.
pub fn parse_module(source: &str, path: &Path) -> Result<ProgramAst, ParseError> {
    let file = FileId::intern(path);
    let tokens = tokenize(source, file)?;
    let mut p = Parser { tokens, pos: 0 };
    let module = if p.at_kw("module") {
        p.bump();
        let path = p.path()?;
        p.expect(Tok::Semi)?;
        Some(path)
    } else {
        None
    };
    let mut decls = Vec::new();
    while !p.at(&Tok::Eof) {
        decls.push(p.decl()?);
    }
    Ok(ProgramAst {
        file,
        path: path.to_path_buf(),
        module,
        decls,
    })
}

/// Parse a standalone expression. Handy in tests and for command-line probes.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source, FileId::intern(Path::new("<expr>")))?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::new(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if self.at(&tok) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{}`", tok.text()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<SourceSpan, ParseError> {
        if self.at_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if !is_reserved(&name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("identifier"),
        }
    }

    fn path(&mut self) -> Result<PathRef, ParseError> {
        let first = self.ident()?;
        let mut span = first.span;
        let mut segments = vec![first.name];
        while self.at(&Tok::ColonColon) {
            self.bump();
            let next = self.ident()?;
            span = span.to(next.span);
            segments.push(next.name);
        }
        Ok(PathRef { segments, span })
    }

    fn path_list(&mut self) -> Result<Vec<PathRef>, ParseError> {
        let mut paths = Vec::new();
        if self.eat(&Tok::LBrace) {
            while !self.at(&Tok::RBrace) {
                paths.push(self.path()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        } else {
            paths.push(self.path()?);
        }
        Ok(paths)
    }

    fn ty(&mut self) -> Result<TypeExpr, ParseError> {
        let name = self.path()?;
        let mut args = Vec::new();
        if self.eat(&Tok::Lt) {
            loop {
                args.push(self.ty()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Gt)?;
        }
        Ok(TypeExpr { name, args })
    }

    fn type_params(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut params = Vec::new();
        if self.eat(&Tok::Lt) {
            loop {
                params.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Gt)?;
        }
        Ok(params)
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        while !self.at(&Tok::RParen) {
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            params.push(Param { name, ty });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(params)
    }

    fn decl(&mut self) -> Result<Declaration, ParseError> {
        let start = self.span();
        while self.eat_kw("pub") || self.eat_kw("open") || self.eat_kw("closed") {}
        let broadcast = self.eat_kw("broadcast");
        let kind = if self.at_kw("spec") && !broadcast {
            self.bump();
            self.expect_kw("fn")?;
            DeclKind::SpecFn(self.spec_fn()?)
        } else if self.eat_kw("proof") {
            self.expect_kw("fn")?;
            DeclKind::ProofFn(self.proof_fn(broadcast, true)?)
        } else if self.eat_kw("axiom") {
            self.expect_kw("fn")?;
            DeclKind::AxiomFn(self.proof_fn(broadcast, false)?)
        } else if broadcast && self.eat_kw("group") {
            let name = self.ident()?;
            self.expect(Tok::LBrace)?;
            let mut members = Vec::new();
            while !self.at(&Tok::RBrace) {
                members.push(self.path()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            DeclKind::BroadcastGroup { name, members }
        } else if broadcast && self.eat_kw("use") {
            let paths = self.path_list()?;
            self.expect(Tok::Semi)?;
            DeclKind::BroadcastUse(paths)
        } else if !broadcast && self.eat_kw("type") {
            let name = self.ident()?;
            let params = self.type_params()?;
            self.expect(Tok::Semi)?;
            DeclKind::SortDecl { name, params }
        } else if !broadcast && self.eat_kw("const") {
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            let value = if self.eat(&Tok::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect(Tok::Semi)?;
            DeclKind::ConstDecl { name, ty, value }
        } else if broadcast {
            return self.error("`proof`, `axiom`, `group` or `use` after `broadcast`");
        } else {
            return self.error("a declaration");
        };
        Ok(Declaration {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn spec_fn(&mut self) -> Result<SpecFn, ParseError> {
        let name = self.ident()?;
        let type_params = self.type_params()?;
        let params = self.params()?;
        self.expect(Tok::Arrow)?;
        let ret = self.ty()?;
        let body = if self.eat(&Tok::Semi) {
            None
        } else {
            self.expect(Tok::LBrace)?;
            let e = self.expr()?;
            self.expect(Tok::RBrace)?;
            Some(e)
        };
        Ok(SpecFn {
            name,
            type_params,
            params,
            ret,
            body,
        })
    }

    fn clause_list(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        loop {
            if self.at(&Tok::LBrace) || self.at(&Tok::Semi) || self.at_kw("ensures") {
                break;
            }
            out.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn proof_fn(&mut self, broadcast: bool, has_body: bool) -> Result<ProofFn, ParseError> {
        let name = self.ident()?;
        let type_params = self.type_params()?;
        let params = self.params()?;
        let requires = if self.eat_kw("requires") {
            self.clause_list()?
        } else {
            Vec::new()
        };
        let ensures = if self.eat_kw("ensures") {
            self.clause_list()?
        } else {
            Vec::new()
        };
        let body = if has_body {
            self.block()?
        } else {
            self.expect(Tok::Semi)?;
            Vec::new()
        };
        Ok(ProofFn {
            name,
            broadcast,
            type_params,
            params,
            requires,
            ensures,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) {
            if self.at(&Tok::Eof) {
                return self.error("`}`");
            }
            stmts.push(self.stmt()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.span();
        let kind = if self.eat_kw("assert") {
            self.expect(Tok::LParen)?;
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            if self.eat_kw("by") {
                let body = self.block()?;
                self.eat(&Tok::Semi);
                StmtKind::AssertBy(e, body)
            } else {
                self.expect(Tok::Semi)?;
                StmtKind::Assert(e)
            }
        } else if self.eat_kw("let") {
            let name = self.ident()?;
            let ty = if self.eat(&Tok::Colon) {
                Some(self.ty()?)
            } else {
                None
            };
            self.expect(Tok::Assign)?;
            let value = self.expr()?;
            self.expect(Tok::Semi)?;
            StmtKind::Let { name, ty, value }
        } else if self.at_kw("broadcast") && matches!(self.peek_at(1), Tok::Ident(s) if s == "use")
        {
            self.bump();
            self.bump();
            let paths = self.path_list()?;
            self.expect(Tok::Semi)?;
            StmtKind::BroadcastUse(paths)
        } else {
            let e = self.expr()?;
            self.expect(Tok::Semi)?;
            match e.kind {
                ExprKind::Call { func, args } => StmtKind::LemmaCall { func, args },
                _ => {
                    return Err(ParseError::new(
                        e.span,
                        "expected a statement (assert, let, broadcast use, or lemma call)",
                    ))
                }
            }
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.iff()
    }

    fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        let span = lhs.span.to(rhs.span);
        Expr {
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
            trigger: false,
        }
    }

    fn iff(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            lhs = Self::binary(BinOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Self::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and()?;
            lhs = Self::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.comparison()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.comparison()?;
            lhs = Self::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return None,
        })
    }

    /// Comparisons chain: `a <= b < c` means `a <= b && b < c`.
    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let first = self.additive()?;
        let Some(op) = self.cmp_op() else {
            return Ok(first);
        };
        self.bump();
        let mut prev = self.additive()?;
        let mut acc = Self::binary(op, first, prev.clone());
        while let Some(op) = self.cmp_op() {
            self.bump();
            let next = self.additive()?;
            let link = Self::binary(op, prev, next.clone());
            acc = Self::binary(BinOp::And, acc, link);
            prev = next;
        }
        Ok(acc)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Self::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Self::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let start = self.span();
        if self.at(&Tok::Hash) && self.peek_at(1) == &Tok::LBracket {
            self.bump();
            self.bump();
            self.expect_kw("trigger")?;
            self.expect(Tok::RBracket)?;
            let mut e = self.unary()?;
            e.trigger = true;
            return Ok(e);
        }
        let op = match self.peek() {
            Tok::Bang => UnOp::Not,
            Tok::Minus => UnOp::Neg,
            _ => return self.postfix(),
        };
        self.bump();
        let operand = self.unary()?;
        let span = start.to(operand.span);
        Ok(Expr {
            kind: ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            span,
            trigger: false,
        })
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        while !self.at(&Tok::RParen) {
            args.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        loop {
            if self.at(&Tok::Dot) {
                self.bump();
                let name = self.ident()?;
                let mut args = self.call_args()?;
                args.insert(0, e);
                let span = args[0].span.to(self.prev_span());
                e = Expr {
                    kind: ExprKind::Call {
                        func: PathRef {
                            segments: vec![name.name],
                            span: name.span,
                        },
                        args,
                    },
                    span,
                    trigger: false,
                };
            } else if self.at_kw("as") {
                // Casts between int and nat are the identity on the logical level.
                self.bump();
                let ty = self.ty()?;
                if !matches!(ty.name.joined().as_str(), "int" | "nat") || !ty.args.is_empty() {
                    return Err(ParseError::new(ty.name.span, "only `as int` and `as nat` casts are supported"));
                }
                e.span = e.span.to(self.prev_span());
            } else {
                return Ok(e);
            }
        }
    }

    fn binders(&mut self) -> Result<Vec<Binder>, ParseError> {
        self.expect(Tok::Pipe)?;
        let mut binders = Vec::new();
        while !self.at(&Tok::Pipe) {
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            binders.push(Binder { name, ty });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Pipe)?;
        if binders.is_empty() {
            return Err(ParseError::new(self.prev_span(), "quantifier needs at least one binder"));
        }
        Ok(binders)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.span();
        let mk = |kind, span| Expr {
            kind,
            span,
            trigger: false,
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(mk(ExprKind::Int(n), start))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                let close = self.expect(Tok::RParen)?;
                e.span = start.to(close);
                Ok(e)
            }
            Tok::Ident(kw) if kw == "true" || kw == "false" => {
                self.bump();
                Ok(mk(ExprKind::Bool(kw == "true"), start))
            }
            Tok::Ident(kw) if kw == "forall" || kw == "exists" => {
                self.bump();
                let binders = self.binders()?;
                let mut all_triggers = false;
                if self.at(&Tok::Hash) && self.peek_at(1) == &Tok::Bang {
                    self.bump();
                    self.bump();
                    self.expect(Tok::LBracket)?;
                    self.expect_kw("all_triggers")?;
                    self.expect(Tok::RBracket)?;
                    all_triggers = true;
                }
                let body = Box::new(self.expr()?);
                let span = start.to(body.span);
                if kw == "forall" {
                    Ok(mk(
                        ExprKind::Forall {
                            binders,
                            all_triggers,
                            body,
                        },
                        span,
                    ))
                } else {
                    if all_triggers {
                        return Err(ParseError::new(span, "`#![all_triggers]` is only allowed on `forall`"));
                    }
                    Ok(mk(ExprKind::Exists { binders, body }, span))
                }
            }
            Tok::Ident(kw) if kw == "if" => {
                self.bump();
                let cond = self.expr()?;
                self.expect(Tok::LBrace)?;
                let then = self.expr()?;
                self.expect(Tok::RBrace)?;
                self.expect_kw("else")?;
                let els = if self.at_kw("if") {
                    self.primary()?
                } else {
                    self.expect(Tok::LBrace)?;
                    let e = self.expr()?;
                    self.expect(Tok::RBrace)?;
                    e
                };
                let span = start.to(self.prev_span());
                Ok(mk(
                    ExprKind::If {
                        cond: Box::new(cond),
                        then: Box::new(then),
                        els: Box::new(els),
                    },
                    span,
                ))
            }
            Tok::Ident(_) => {
                let path = self.path()?;
                if self.at(&Tok::LParen) {
                    let args = self.call_args()?;
                    let span = start.to(self.prev_span());
                    Ok(mk(ExprKind::Call { func: path, args }, span))
                } else if path.segments.len() == 1 {
                    Ok(mk(ExprKind::Var(path.segments[0].clone()), path.span))
                } else {
                    // Qualified constant reference: a zero-argument call.
                    let span = path.span;
                    Ok(mk(
                        ExprKind::Call {
                            func: path,
                            args: Vec::new(),
                        },
                        span,
                    ))
                }
            }
            _ => self.error("an expression"),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(
        name,
        "fn" | "spec"
            | "proof"
            | "axiom"
            | "broadcast"
            | "group"
            | "use"
            | "assert"
            | "by"
            | "let"
            | "forall"
            | "exists"
            | "if"
            | "else"
            | "true"
            | "false"
            | "requires"
            | "ensures"
            | "pub"
            | "module"
            | "type"
            | "const"
            | "as"
    )
}
