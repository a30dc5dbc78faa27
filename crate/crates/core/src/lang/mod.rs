//! The pipeline shorthand: `data |> filter(red == 3 | green > 4) |> ...`.

pub mod ast;
pub mod debug_json;
pub mod lexer;
pub mod parser;
pub mod printer;

use std::fmt;

use thiserror::Error;

pub use ast::{
    Assignment, BinaryOp, Expr, ExprKind, Pipeline, SelectItem, SelectMode, Stage, UnaryOp, Verb,
    VerbKind,
};
pub use lexer::{tokenize, OpKind, Token, TokenKind};
pub use parser::{parse_expression, parse_pipeline};
pub use printer::{print_expr, print_pipeline, print_stage};

/// Half-open range of character offsets into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lex { message: String },
    Unexpected { expected: String, found: String },
    UnknownVerb { name: String, suggestion: Option<String> },
    MixedSelectSigns,
    ChainedComparison,
    AssignInsteadOfCompare,
    BadArgument { message: String },
}

impl ParseErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::Lex { .. } => "LexError",
            ParseErrorKind::Unexpected { .. } => "ParseError",
            ParseErrorKind::UnknownVerb { .. } => "UnknownVerb",
            ParseErrorKind::MixedSelectSigns => "MixedSelectSigns",
            ParseErrorKind::ChainedComparison => "ChainedComparison",
            ParseErrorKind::AssignInsteadOfCompare => "AssignInsteadOfCompare",
            ParseErrorKind::BadArgument { .. } => "BadArgument",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lex { message } => f.write_str(message),
            ParseErrorKind::Unexpected { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::UnknownVerb { name, .. } => write!(f, "unknown verb `{name}`"),
            ParseErrorKind::MixedSelectSigns => {
                f.write_str("select() mixes kept columns with `-` removed columns")
            }
            ParseErrorKind::ChainedComparison => f.write_str("comparisons cannot be chained"),
            ParseErrorKind::AssignInsteadOfCompare => {
                f.write_str("`=` used where a comparison was expected")
            }
            ParseErrorKind::BadArgument { message } => f.write_str(message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at {span}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    pub hint: Option<String>,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, span: Span) -> ParseError {
        ParseError {
            kind,
            span,
            hint: None,
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> ParseError {
        self.hint = Some(hint.into());
        self
    }
}

/// Normalises user input into a full pipeline source.
///
/// Accepts a complete `data |> ...` text, or bare stages one per line
/// (optionally prefixed with `|>`), or blank input meaning "no stages".
pub fn normalize_source(text: &str) -> String {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return "data".to_string();
    }
    let starts_with_data = trimmed.strip_prefix("data").is_some_and(|rest| {
        rest.chars()
            .next()
            .is_none_or(|c| !(c.is_alphanumeric() || c == '_' || c == '.'))
    });
    if starts_with_data {
        return text.to_string();
    }
    let mut out = String::from("data");
    for line in text.lines() {
        let line = line.trim();
        let line = line.strip_prefix("|>").unwrap_or(line).trim();
        let line = line.strip_suffix("|>").unwrap_or(line).trim();
        if !line.is_empty() {
            out.push_str(" |> ");
            out.push_str(line);
        }
    }
    out
}
