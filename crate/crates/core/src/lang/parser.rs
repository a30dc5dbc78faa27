//! Recursive-descent parser for the pipeline shorthand.
//!
//! Precedence, tightest first: unary `!`/`-`, `*`, `+ -`, comparisons and
//! `%in%` (non-associative), `&`, `|`.

use super::ast::*;
use super::lexer::{tokenize, OpKind, Token, TokenKind};
use super::{ParseError, ParseErrorKind, Span};

pub fn parse_pipeline(src: &str) -> Result<Pipeline, ParseError> {
    let mut p = Parser::new(src)?;
    let pipeline = p.pipeline()?;
    p.expect_end()?;
    Ok(pipeline)
}

pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let expr = p.expr()?;
    p.expect_end()?;
    Ok(expr)
}

/// Finds the verb closest to a misspelling, if any is plausibly meant.
pub fn suggest_verb(name: &str) -> Option<&'static str> {
    nearest(name, VerbKind::ALL.iter().map(|v| v.name()))
}

/// Nearest candidate by edit distance, within a small budget.
pub fn nearest<'a, I>(name: &str, candidates: I) -> Option<&'a str>
where
    I: IntoIterator<Item = &'a str>,
{
    let budget = (name.chars().count() / 3).clamp(1, 3);
    candidates
        .into_iter()
        .map(|c| (strsim::osa_distance(name, c), c))
        .filter(|(d, _)| *d <= budget)
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c)
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(src)?,
            cursor: 0,
            end: src.chars().count(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.cursor + offset).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.cursor].clone();
        self.cursor += 1;
        tok
    }

    fn current_span(&self) -> Span {
        self.peek()
            .map_or(Span::new(self.end, self.end), |t| t.span)
    }

    fn found(&self) -> String {
        self.peek()
            .map_or_else(|| "end of input".to_string(), |t| format!("`{}`", t.lexeme))
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let mut err = ParseError::new(
            ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found: self.found(),
            },
            self.current_span(),
        );
        if self.peek_kind() == Some(&TokenKind::Equals) {
            err = assign_error(self.current_span());
        }
        err
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, ParseError> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek_kind() {
            None => Ok(()),
            Some(TokenKind::Op(op)) if is_comparison_token(*op) => Err(chained_error(self.current_span())),
            Some(_) => Err(self.unexpected("end of input")),
        }
    }

    fn pipeline(&mut self) -> Result<Pipeline, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident && t.lexeme == "data" => {
                self.bump();
            }
            Some(t) if t.kind == TokenKind::Ident && VerbKind::from_name(&t.lexeme).is_some() => {
                return Err(self
                    .unexpected("`data`")
                    .with_hint("start the pipeline with the data: `data |> ...`"));
            }
            _ => return Err(self.unexpected("`data`")),
        }
        let mut stages = Vec::new();
        while self.peek().is_some() {
            self.expect(TokenKind::Pipe, "`|>`")?;
            stages.push(self.stage()?);
        }
        Ok(Pipeline { stages })
    }

    fn stage(&mut self) -> Result<Stage, ParseError> {
        let name_tok = match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => self.bump(),
            _ => return Err(self.unexpected("a verb")),
        };
        let kind = VerbKind::from_name(&name_tok.lexeme).ok_or_else(|| {
            let suggestion = suggest_verb(&name_tok.lexeme).map(str::to_string);
            let hint = suggestion.as_ref().map(|s| format!("did you mean {s}"));
            let err = ParseError::new(
                ParseErrorKind::UnknownVerb {
                    name: name_tok.lexeme.clone(),
                    suggestion,
                },
                name_tok.span,
            );
            match hint {
                Some(h) => err.with_hint(h),
                None => err.with_hint(
                    "the verbs are filter, select, mutate, arrange, group_by and summarize",
                ),
            }
        })?;
        self.expect(TokenKind::LParen, "`(`")?;
        let verb = match kind {
            VerbKind::Select => self.select_args()?,
            VerbKind::Mutate => Verb::Mutate(self.comma_list(Self::assignment)?),
            VerbKind::Filter => Verb::Filter(self.comma_list(Self::expr)?),
            VerbKind::Arrange => Verb::Arrange(self.comma_list(Self::expr)?),
            VerbKind::GroupBy => Verb::GroupBy(self.comma_list(Self::expr)?),
            VerbKind::Summarize => Verb::Summarize(self.comma_list(Self::expr)?),
        };
        let close = self.expect(TokenKind::RParen, "`,` or `)`")?;
        Ok(Stage {
            verb,
            span: name_tok.span.join(close.span),
            name_span: name_tok.span,
        })
    }

    /// Parses `item, item, ...` up to (not including) the closing paren.
    fn comma_list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut items = Vec::new();
        if self.peek_kind() == Some(&TokenKind::RParen) {
            return Ok(items);
        }
        loop {
            items.push(item(self)?);
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                }
                Some(TokenKind::RParen) => return Ok(items),
                Some(TokenKind::Op(op)) if is_comparison_token(*op) => {
                    return Err(chained_error(self.current_span()))
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
    }

    fn select_args(&mut self) -> Result<Verb, ParseError> {
        let mut mode = None;
        let items = self.comma_list(|p| {
            let start = p.current_span();
            let item_mode = if p.peek_kind() == Some(&TokenKind::Op(OpKind::Minus)) {
                p.bump();
                SelectMode::Exclude
            } else {
                SelectMode::Include
            };
            let tok = match p.peek() {
                Some(t) if t.kind == TokenKind::Ident => p.bump(),
                _ => return Err(p.unexpected("a column name")),
            };
            let span = start.join(tok.span);
            match mode {
                None => mode = Some(item_mode),
                Some(m) if m != item_mode => {
                    return Err(ParseError::new(ParseErrorKind::MixedSelectSigns, span).with_hint(
                        "either list the columns to keep or the columns to drop with `-`, not both",
                    ))
                }
                _ => {}
            }
            Ok(SelectItem {
                name: tok.lexeme,
                span,
            })
        })?;
        Ok(Verb::Select {
            mode: mode.unwrap_or(SelectMode::Include),
            items,
        })
    }

    fn assignment(&mut self) -> Result<Assignment, ParseError> {
        let target = match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => self.bump(),
            _ => {
                return Err(self
                    .unexpected("a new column name")
                    .with_hint("mutate takes `name = expression`"))
            }
        };
        match self.peek_kind() {
            Some(TokenKind::Equals) => {
                self.bump();
            }
            Some(TokenKind::Op(OpKind::Eq)) => {
                return Err(self
                    .unexpected("`=`")
                    .with_hint("mutate assigns with a single `=`: `name = expression`"))
            }
            _ => {
                return Err(self
                    .unexpected("`=`")
                    .with_hint("mutate takes `name = expression`"))
            }
        }
        let value = self.expr()?;
        Ok(Assignment {
            target: target.lexeme,
            target_span: target.span,
            value,
        })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(1)
    }

    /// Left-associative levels `|`, `&`, `+ -`, `*`; comparisons are handled
    /// separately because they do not chain.
    fn binary_level(&mut self, level: u8) -> Result<Expr, ParseError> {
        if level == 3 {
            return self.comparison();
        }
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while let Some(op) = self.peek_binary_op().filter(|op| op.precedence() == level) {
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            );
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.binary_level(4)?;
        let Some(op) = self.peek_binary_op().filter(|op| op.is_comparison()) else {
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.binary_level(4)?;
        if self.peek_binary_op().is_some_and(BinaryOp::is_comparison) {
            return Err(chained_error(self.current_span()));
        }
        let span = lhs.span.join(rhs.span);
        Ok(Expr::new(
            ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        ))
    }

    fn peek_binary_op(&self) -> Option<BinaryOp> {
        let TokenKind::Op(op) = self.peek_kind()? else {
            return None;
        };
        Some(match op {
            OpKind::Lt => BinaryOp::Lt,
            OpKind::Gt => BinaryOp::Gt,
            OpKind::Le => BinaryOp::Le,
            OpKind::Ge => BinaryOp::Ge,
            OpKind::Eq => BinaryOp::Eq,
            OpKind::Ne => BinaryOp::Ne,
            OpKind::In => BinaryOp::In,
            OpKind::And => BinaryOp::And,
            OpKind::Or => BinaryOp::Or,
            OpKind::Plus => BinaryOp::Add,
            OpKind::Minus => BinaryOp::Sub,
            OpKind::Star => BinaryOp::Mul,
            OpKind::Not => return None,
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek_kind() {
            Some(TokenKind::Op(OpKind::Not)) => UnaryOp::Not,
            Some(TokenKind::Op(OpKind::Minus)) => UnaryOp::Negate,
            _ => return self.primary(),
        };
        let op_span = self.bump().span;
        let operand = self.unary()?;
        let span = op_span.join(operand.span);
        Ok(Expr::new(
            ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            span,
        ))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("an expression"));
        };
        match tok.kind {
            TokenKind::Number(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Number(v), tok.span))
            }
            TokenKind::Na => {
                self.bump();
                Ok(Expr::new(ExprKind::Na, tok.span))
            }
            TokenKind::Bool(b) => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(b), tok.span))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                let close = self.expect(TokenKind::RParen, "`)`")?;
                Ok(Expr::new(inner.kind, tok.span.join(close.span)))
            }
            TokenKind::Ident if self.peek_at(1) == Some(&TokenKind::LParen) => self.call(),
            TokenKind::Ident => {
                self.bump();
                Ok(Expr::new(ExprKind::Column(tok.lexeme), tok.span))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn call(&mut self) -> Result<Expr, ParseError> {
        let name = self.bump();
        self.bump(); // `(`
        let mut args = Vec::new();
        let mut named_args = Vec::new();
        let _ = self.comma_list(|p| {
            let is_named = matches!(
                (p.peek_kind(), p.peek_at(1)),
                (Some(TokenKind::Ident), Some(TokenKind::Equals))
            );
            if !is_named {
                args.push(p.expr()?);
                return Ok(());
            }
            let key = p.bump();
            let eq_span = p.bump().span;
            if key.lexeme != "probs" {
                if name.lexeme == "quantile" {
                    return Err(ParseError::new(
                        ParseErrorKind::BadArgument {
                            message: format!("quantile has no argument `{}`", key.lexeme),
                        },
                        key.span,
                    )
                    .with_hint("set the level with `probs = 0.25`"));
                }
                return Err(assign_error(eq_span));
            }
            let value = p.expr()?;
            named_args.push((key.lexeme, value));
            Ok(())
        })?;
        let close = self.expect(TokenKind::RParen, "`,` or `)`")?;
        let span = name.span.join(close.span);

        if name.lexeme == "desc" {
            if args.len() != 1 || !named_args.is_empty() {
                return Err(ParseError::new(
                    ParseErrorKind::BadArgument {
                        message: "desc() takes exactly one column".to_string(),
                    },
                    span,
                ));
            }
            let operand = args.pop().expect("one argument");
            return Ok(Expr::new(
                ExprKind::Unary {
                    op: UnaryOp::Desc,
                    operand: Box::new(operand),
                },
                span,
            ));
        }
        Ok(Expr::new(
            ExprKind::Call {
                name: name.lexeme,
                args,
                named_args,
            },
            span,
        ))
    }
}

fn is_comparison_token(op: OpKind) -> bool {
    matches!(
        op,
        OpKind::Lt | OpKind::Gt | OpKind::Le | OpKind::Ge | OpKind::Eq | OpKind::Ne | OpKind::In
    )
}

fn chained_error(span: Span) -> ParseError {
    ParseError::new(ParseErrorKind::ChainedComparison, span)
        .with_hint("comparisons do not chain; join them with `&`, e.g. `a < b & b < c`")
}

fn assign_error(span: Span) -> ParseError {
    ParseError::new(ParseErrorKind::AssignInsteadOfCompare, span)
        .with_hint("`=` assigns; `==` compares")
}
