use super::span::{FileId, SourceSpan};
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i128),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Assign,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    Pipe,
    Hash,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    AndAnd,
    OrOr,
    Implies,
    Iff,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Assign => "=",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Dot => ".",
            Tok::Pipe => "|",
            Tok::Hash => "#",
            Tok::Bang => "!",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Implies => "==>",
            Tok::Iff => "<==>",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

// Longest match first.
const PUNCT: &[(&str, Tok)] = &[
    ("<==>", Tok::Iff),
    ("==>", Tok::Implies),
    ("==", Tok::EqEq),
    ("!=", Tok::Ne),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("&&", Tok::AndAnd),
    ("||", Tok::OrOr),
    ("->", Tok::Arrow),
    ("::", Tok::ColonColon),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("=", Tok::Assign),
    (",", Tok::Comma),
    (";", Tok::Semi),
    (":", Tok::Colon),
    (".", Tok::Dot),
    ("|", Tok::Pipe),
    ("#", Tok::Hash),
    ("!", Tok::Bang),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    ("%", Tok::Percent),
];

pub fn tokenize(source: &str, file: FileId) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0usize;
    let mut line = 1u32;
    let mut line_start = 0usize;

    let span_at = |start: usize, end: usize, line: u32, line_start: usize| SourceSpan {
        file,
        start: start as u32,
        end: end as u32,
        line,
        col: (source[line_start..start].chars().count() + 1) as u32,
    };

    while pos < bytes.len() {
        let c = bytes[pos];
        if c == b'\n' {
            pos += 1;
            line += 1;
            line_start = pos;
            continue;
        }
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if source[pos..].starts_with("//") {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        if source[pos..].starts_with("/*") {
            let open = span_at(pos, pos + 2, line, line_start);
            pos += 2;
            loop {
                if pos >= bytes.len() {
                    return Err(ParseError::new(open, "unterminated block comment"));
                }
                if source[pos..].starts_with("*/") {
                    pos += 2;
                    break;
                }
                if bytes[pos] == b'\n' {
                    line += 1;
                    line_start = pos + 1;
                }
                pos += 1;
            }
            continue;
        }
        let start = pos;
        if c.is_ascii_digit() {
            while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'_') {
                pos += 1;
            }
            let text: String = source[start..pos].chars().filter(|&c| c != '_').collect();
            let span = span_at(start, pos, line, line_start);
            let value = text
                .parse::<i128>()
                .map_err(|_| ParseError::new(span, "integer literal out of range"))?;
            tokens.push(Token { tok: Tok::Int(value), span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(source[start..pos].to_string()),
                span: span_at(start, pos, line, line_start),
            });
            continue;
        }
        let rest = &source[pos..];
        match PUNCT.iter().find(|(text, _)| rest.starts_with(text)) {
            Some((text, tok)) => {
                pos += text.len();
                tokens.push(Token {
                    tok: tok.clone(),
                    span: span_at(start, pos, line, line_start),
                });
            }
            None => {
                let ch = rest.chars().next().unwrap();
                return Err(ParseError::new(
                    span_at(start, start + ch.len_utf8(), line, line_start),
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: span_at(pos, pos, line, line_start),
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, FileId(0)).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_match_on_arrows() {
        assert_eq!(
            toks("a <==> b ==> c <= d == e"),
            vec![
                Tok::Ident("a".into()),
                Tok::Iff,
                Tok::Ident("b".into()),
                Tok::Implies,
                Tok::Ident("c".into()),
                Tok::Le,
                Tok::Ident("d".into()),
                Tok::EqEq,
                Tok::Ident("e".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn nested_generic_closes_are_separate() {
        assert_eq!(
            toks("Seq<Seq<int>>"),
            vec![
                Tok::Ident("Seq".into()),
                Tok::Lt,
                Tok::Ident("Seq".into()),
                Tok::Lt,
                Tok::Ident("int".into()),
                Tok::Gt,
                Tok::Gt,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  /* a\n b */ x", FileId(0)).unwrap();
        assert_eq!(t[0].tok, Tok::Ident("x".into()));
        assert_eq!((t[0].span.line, t[0].span.col), (3, 7));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("a @ b", FileId(0)).unwrap_err();
        assert_eq!(err.span.col, 3);
    }
}
