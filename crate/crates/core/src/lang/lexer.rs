use super::{ParseError, ParseErrorKind, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    In,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
}

impl OpKind {
    pub fn lexeme(self) -> &'static str {
        match self {
            OpKind::Lt => "<",
            OpKind::Gt => ">",
            OpKind::Le => "<=",
            OpKind::Ge => ">=",
            OpKind::Eq => "==",
            OpKind::Ne => "!=",
            OpKind::In => "%in%",
            OpKind::And => "&",
            OpKind::Or => "|",
            OpKind::Not => "!",
            OpKind::Plus => "+",
            OpKind::Minus => "-",
            OpKind::Star => "*",
        }
    }
}

/// Token kinds. A leading `-` inside `select()` is lexed as [`OpKind::Minus`]
/// and resolved to an exclusion by the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident,
    Number(f64),
    Na,
    Bool(bool),
    Pipe,
    LParen,
    RParen,
    Comma,
    Equals,
    Op(OpKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let peek = chars.get(i + 1).copied();
        let kind = match c {
            '(' => single(&mut i, TokenKind::LParen),
            ')' => single(&mut i, TokenKind::RParen),
            ',' => single(&mut i, TokenKind::Comma),
            '+' => single(&mut i, TokenKind::Op(OpKind::Plus)),
            '-' => single(&mut i, TokenKind::Op(OpKind::Minus)),
            '*' => single(&mut i, TokenKind::Op(OpKind::Star)),
            '&' => single(&mut i, TokenKind::Op(OpKind::And)),
            '|' if peek == Some('>') => double(&mut i, TokenKind::Pipe),
            '|' => single(&mut i, TokenKind::Op(OpKind::Or)),
            '<' if peek == Some('=') => double(&mut i, TokenKind::Op(OpKind::Le)),
            '<' => single(&mut i, TokenKind::Op(OpKind::Lt)),
            '>' if peek == Some('=') => double(&mut i, TokenKind::Op(OpKind::Ge)),
            '>' => single(&mut i, TokenKind::Op(OpKind::Gt)),
            '=' if peek == Some('=') => double(&mut i, TokenKind::Op(OpKind::Eq)),
            '=' => single(&mut i, TokenKind::Equals),
            '!' if peek == Some('=') => double(&mut i, TokenKind::Op(OpKind::Ne)),
            '!' => single(&mut i, TokenKind::Op(OpKind::Not)),
            '%' => {
                if chars[i..].starts_with(&['%', 'i', 'n', '%']) {
                    i += 4;
                    TokenKind::Op(OpKind::In)
                } else {
                    let end = chars[i + 1..]
                        .iter()
                        .position(|c| c.is_whitespace() || *c == '%')
                        .map_or(chars.len(), |p| i + 1 + p + usize::from(chars[i + 1 + p] == '%'));
                    return Err(lex_error(
                        Span::new(start, end),
                        "incomplete operator: the membership operator is written `%in%`",
                    ));
                }
            }
            c if c.is_ascii_digit() || (c == '.' && peek.is_some_and(|p| p.is_ascii_digit())) => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
                    return Err(lex_error(
                        Span::new(start, i + 1),
                        "numbers are written in plain decimal notation",
                    ));
                }
                let text: String = chars[start..i].iter().collect();
                let value = text
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| lex_error(Span::new(start, i), "number out of range"))?;
                TokenKind::Number(value)
            }
            c if c.is_alphabetic() => {
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.')
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match text.as_str() {
                    "NA" => TokenKind::Na,
                    "TRUE" => TokenKind::Bool(true),
                    "FALSE" => TokenKind::Bool(false),
                    _ => TokenKind::Ident,
                }
            }
            other => {
                return Err(lex_error(
                    Span::new(start, start + 1),
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        tokens.push(Token {
            kind,
            lexeme: chars[start..i].iter().collect(),
            span: Span::new(start, i),
        });
    }
    Ok(tokens)
}

fn single(i: &mut usize, kind: TokenKind) -> TokenKind {
    *i += 1;
    kind
}

fn double(i: &mut usize, kind: TokenKind) -> TokenKind {
    *i += 2;
    kind
}

fn lex_error(span: Span, message: impl Into<String>) -> ParseError {
    ParseError::new(
        ParseErrorKind::Lex {
            message: message.into(),
        },
        span,
    )
}
