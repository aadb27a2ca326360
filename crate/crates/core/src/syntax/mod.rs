//! Lexing, parsing and printing of `.tv` sources.

pub mod ast;
mod lexer;
mod parser;
mod render;
pub mod span;

pub use parser::{parse_expr, parse_module};
pub use render::{render_expr, render_program, render_without_sites, structurally_equal};
pub use span::{FileId, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}
