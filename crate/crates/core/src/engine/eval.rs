//! Static checking and vectorised evaluation of expressions.
//!
//! Expressions are checked against the column set before any row is
//! touched, so unknown names and type mistakes are reported even on empty
//! frames. Evaluation then runs over a "context": the rows of one group, or
//! every row when the frame is ungrouped.

use crate::frame::{CellValue, CubeFrame};
use crate::lang::parser::nearest;
use crate::lang::{BinaryOp, Expr, ExprKind, Span, UnaryOp};

use super::logic::Logical;
use super::stats::{self, Summary, SUMMARY_FUNCTIONS};
use super::{EvalError, EvalErrorKind};

const SCALAR_FUNCTIONS: [&str; 3] = ["ifelse", "is.na", "c"];

/// Static type of an expression. `Missing` is the bare `NA` literal, which
/// fits wherever a number or a logical is expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Num,
    Logical,
    Missing,
}

impl Ty {
    fn describe(self) -> &'static str {
        match self {
            Ty::Num => "a number",
            Ty::Logical => "a TRUE/FALSE condition",
            Ty::Missing => "NA",
        }
    }
}

/// A column of results: one cell per context row, or a single broadcastable cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Vector {
    Num(Vec<CellValue>),
    Logical(Vec<Logical>),
    Missing(usize),
}

impl Vector {
    pub fn len(&self) -> usize {
        match self {
            Vector::Num(v) => v.len(),
            Vector::Logical(v) => v.len(),
            Vector::Missing(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn num_at(&self, i: usize) -> CellValue {
        match self {
            Vector::Num(v) => v[if v.len() == 1 { 0 } else { i }],
            _ => CellValue::Na,
        }
    }

    fn logical_at(&self, i: usize) -> Logical {
        match self {
            Vector::Logical(v) => v[if v.len() == 1 { 0 } else { i }],
            _ => Logical::Na,
        }
    }

    /// Numeric cells; `Missing` becomes NA cells.
    pub fn into_cells(self) -> Vec<CellValue> {
        match self {
            Vector::Num(v) => v,
            Vector::Missing(n) => vec![CellValue::Na; n],
            Vector::Logical(v) => vec![CellValue::Na; v.len()],
        }
    }

    pub fn into_logicals(self) -> Vec<Logical> {
        match self {
            Vector::Logical(v) => v,
            Vector::Missing(n) => vec![Logical::Na; n],
            Vector::Num(v) => vec![Logical::Na; v.len()],
        }
    }
}

pub fn is_known_function(name: &str) -> bool {
    SCALAR_FUNCTIONS.contains(&name) || SUMMARY_FUNCTIONS.contains(&name)
}

fn err(kind: EvalErrorKind, span: Span) -> EvalError {
    EvalError::new(kind, span)
}

fn type_error(span: Span, message: String) -> EvalError {
    err(EvalErrorKind::TypeError { message }, span)
}

fn expect_ty(expr: &Expr, ty: Ty, wanted: Ty, what: &str) -> Result<(), EvalError> {
    if ty == wanted || ty == Ty::Missing {
        Ok(())
    } else {
        Err(type_error(
            expr.span,
            format!("{what} needs {}, but this is {}", wanted.describe(), ty.describe()),
        ))
    }
}

pub fn unknown_column(name: &str, span: Span, columns: &[&str]) -> EvalError {
    let nearest = nearest(name, columns.iter().copied()).map(str::to_string);
    let hint = nearest.as_ref().map(|n| format!("did you mean `{n}`?"));
    let mut e = err(
        EvalErrorKind::UnknownColumn {
            name: name.to_string(),
            nearest,
        },
        span,
    );
    e.hint = hint;
    e
}

/// Checks names, arity, placement and types; returns the expression type.
pub fn check(expr: &Expr, columns: &[&str]) -> Result<Ty, EvalError> {
    match &expr.kind {
        ExprKind::Number(_) => Ok(Ty::Num),
        ExprKind::Na => Ok(Ty::Missing),
        ExprKind::Bool(_) => Ok(Ty::Logical),
        ExprKind::Column(name) => {
            if columns.contains(&name.as_str()) {
                Ok(Ty::Num)
            } else {
                Err(unknown_column(name, expr.span, columns))
            }
        }
        ExprKind::Unary {
            op: UnaryOp::Desc, ..
        } => Err(err(EvalErrorKind::DescOutsideArrange, expr.span)
            .with_hint("desc() only sorts: use it inside arrange(), e.g. arrange(desc(red))")),
        ExprKind::Unary { op, operand } => {
            let ty = check(operand, columns)?;
            match op {
                UnaryOp::Not => {
                    expect_ty(operand, ty, Ty::Logical, "`!`")?;
                    Ok(Ty::Logical)
                }
                _ => {
                    expect_ty(operand, ty, Ty::Num, "`-`")?;
                    Ok(Ty::Num)
                }
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let lt = check(lhs, columns)?;
            let rt = check(rhs, columns)?;
            let what = format!("`{}`", op.symbol());
            match op {
                BinaryOp::And | BinaryOp::Or => {
                    for (side, ty) in [(lhs, lt), (rhs, rt)] {
                        expect_ty(side, ty, Ty::Logical, &what).map_err(|e| {
                            e.with_hint("each side of `&` / `|` must be a comparison such as `red == 3`")
                        })?;
                    }
                    Ok(Ty::Logical)
                }
                BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
                    expect_ty(lhs, lt, Ty::Num, &what)?;
                    expect_ty(rhs, rt, Ty::Num, &what)?;
                    Ok(Ty::Num)
                }
                _ => {
                    expect_ty(lhs, lt, Ty::Num, &what)?;
                    expect_ty(rhs, rt, Ty::Num, &what)?;
                    Ok(Ty::Logical)
                }
            }
        }
        ExprKind::Call {
            name,
            args,
            named_args,
        } => check_call(expr, name, args, named_args, columns),
    }
}

fn check_call(
    expr: &Expr,
    name: &str,
    args: &[Expr],
    named_args: &[(String, Expr)],
    columns: &[&str],
) -> Result<Ty, EvalError> {
    let arity = |message: String| err(EvalErrorKind::Arity { message }, expr.span);
    if !is_known_function(name) {
        let candidates = SCALAR_FUNCTIONS.iter().chain(SUMMARY_FUNCTIONS.iter()).copied();
        let nearest = nearest(name, candidates).map(str::to_string);
        let hint = nearest.as_ref().map(|n| format!("did you mean {n}()?"));
        let mut e = err(
            EvalErrorKind::UnknownFunction {
                name: name.to_string(),
                nearest,
            },
            expr.span,
        );
        e.hint = hint;
        return Err(e);
    }
    if name != "quantile" {
        if let Some((key, _)) = named_args.first() {
            return Err(arity(format!("{name}() has no argument `{key}`")));
        }
    }
    let tys = args
        .iter()
        .map(|a| check(a, columns))
        .collect::<Result<Vec<_>, _>>()?;
    match name {
        "ifelse" => {
            if args.len() != 3 {
                return Err(arity(
                    "ifelse() takes three arguments: ifelse(test, value_if_true, value_if_false)"
                        .to_string(),
                ));
            }
            expect_ty(&args[0], tys[0], Ty::Logical, "the test in ifelse()")
                .map_err(|e| e.with_hint("the first argument is a comparison, e.g. ifelse(red > 3, 4, 5)"))?;
            match (tys[1], tys[2]) {
                (Ty::Missing, t) | (t, Ty::Missing) => Ok(t),
                (a, b) if a == b => Ok(a),
                _ => Err(type_error(
                    expr.span,
                    "both ifelse() results must be numbers, or both conditions".to_string(),
                )),
            }
        }
        "is.na" => {
            if args.len() != 1 {
                return Err(arity("is.na() takes one argument".to_string()));
            }
            Ok(Ty::Logical)
        }
        "c" => {
            for (a, t) in args.iter().zip(&tys) {
                expect_ty(a, *t, Ty::Num, "c()")?;
            }
            Ok(Ty::Num)
        }
        _ => {
            if args.len() != 1 {
                return Err(arity(format!("{name}() takes one column")));
            }
            expect_ty(&args[0], tys[0], Ty::Num, &format!("{name}()"))?;
            if name == "quantile" {
                let mut probs = None;
                for (key, value) in named_args {
                    if key != "probs" || probs.is_some() {
                        return Err(arity(format!("quantile() has no argument `{key}` here")));
                    }
                    let t = check(value, columns)?;
                    expect_ty(value, t, Ty::Num, "probs")?;
                    probs = Some(value);
                }
                if probs.is_none() {
                    return Err(arity("quantile() needs a level: quantile(x, probs = 0.25)".to_string())
                        .with_hint("probs is a number between 0 and 1"));
                }
            }
            Ok(Ty::Num)
        }
    }
}

/// True when every column reference sits inside a summary function call, so
/// the expression collapses a group to one value.
pub fn is_aggregating(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::Column(_) => false,
        ExprKind::Call { name, .. } if SUMMARY_FUNCTIONS.contains(&name.as_str()) => true,
        ExprKind::Unary { operand, .. } => is_aggregating(operand),
        ExprKind::Binary { lhs, rhs, .. } => is_aggregating(lhs) && is_aggregating(rhs),
        ExprKind::Call {
            args, named_args, ..
        } => args.iter().chain(named_args.iter().map(|(_, v)| v)).all(is_aggregating),
        _ => true,
    }
}

/// Evaluation context: a frame plus the rows currently in view.
pub struct Context<'a> {
    pub frame: &'a CubeFrame,
    pub rows: &'a [usize],
}

impl Context<'_> {
    fn n(&self) -> usize {
        self.rows.len()
    }

    /// Result length of combining vectors elementwise.
    fn combine_len(&self, parts: &[(&Vector, Span)]) -> Result<usize, EvalError> {
        let n = self.n();
        for (v, span) in parts {
            if v.len() != 1 && v.len() != n {
                return Err(err(
                    EvalErrorKind::LengthMismatch {
                        expected: n,
                        got: v.len(),
                    },
                    *span,
                ));
            }
        }
        Ok(if parts.iter().all(|(v, _)| v.len() == 1) { 1 } else { n })
    }
}

/// Evaluates a checked expression.
pub fn eval(expr: &Expr, ctx: &Context<'_>) -> Result<Vector, EvalError> {
    match &expr.kind {
        ExprKind::Number(v) => Ok(Vector::Num(vec![CellValue::Num(*v)])),
        ExprKind::Na => Ok(Vector::Missing(1)),
        ExprKind::Bool(b) => Ok(Vector::Logical(vec![Logical::from_bool(*b)])),
        ExprKind::Column(name) => {
            let col = ctx
                .frame
                .column(name)
                .ok_or_else(|| unknown_column(name, expr.span, &[]))?;
            Ok(Vector::Num(ctx.rows.iter().map(|&r| col.cells[r]).collect()))
        }
        ExprKind::Unary { op, operand } => {
            let v = eval(operand, ctx)?;
            match op {
                UnaryOp::Not => Ok(Vector::Logical(
                    v.into_logicals().into_iter().map(Logical::not).collect(),
                )),
                UnaryOp::Negate => Ok(Vector::Num(
                    v.into_cells()
                        .into_iter()
                        .map(|c| match c {
                            CellValue::Num(x) => CellValue::Num(normalize_zero(-x)),
                            CellValue::Na => CellValue::Na,
                        })
                        .collect(),
                )),
                UnaryOp::Desc => Err(err(EvalErrorKind::DescOutsideArrange, expr.span)),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let l = eval(lhs, ctx)?;
            let r = eval(rhs, ctx)?;
            if *op == BinaryOp::In {
                return Ok(membership(&l, &r, ctx.combine_len(&[(&l, lhs.span)])?));
            }
            let len = ctx.combine_len(&[(&l, lhs.span), (&r, rhs.span)])?;
            binary(*op, &l, &r, len, expr.span)
        }
        ExprKind::Call {
            name,
            args,
            named_args,
        } => eval_call(expr, name, args, named_args, ctx),
    }
}

fn normalize_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn binary(op: BinaryOp, l: &Vector, r: &Vector, len: usize, span: Span) -> Result<Vector, EvalError> {
    match op {
        BinaryOp::And | BinaryOp::Or => Ok(Vector::Logical(
            (0..len)
                .map(|i| {
                    let (a, b) = (l.logical_at(i), r.logical_at(i));
                    if op == BinaryOp::And {
                        a.and(b)
                    } else {
                        a.or(b)
                    }
                })
                .collect(),
        )),
        BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
            let mut out = Vec::with_capacity(len);
            for i in 0..len {
                out.push(match (l.num_at(i), r.num_at(i)) {
                    (CellValue::Num(a), CellValue::Num(b)) => {
                        let v = match op {
                            BinaryOp::Add => a + b,
                            BinaryOp::Sub => a - b,
                            _ => a * b,
                        };
                        if !v.is_finite() {
                            return Err(err(EvalErrorKind::NonFinite, span));
                        }
                        CellValue::Num(normalize_zero(v))
                    }
                    _ => CellValue::Na,
                });
            }
            Ok(Vector::Num(out))
        }
        _ => Ok(Vector::Logical(
            (0..len)
                .map(|i| match (l.num_at(i), r.num_at(i)) {
                    (CellValue::Num(a), CellValue::Num(b)) => Logical::from_bool(match op {
                        BinaryOp::Lt => a < b,
                        BinaryOp::Gt => a > b,
                        BinaryOp::Le => a <= b,
                        BinaryOp::Ge => a >= b,
                        BinaryOp::Eq => a == b,
                        _ => a != b,
                    }),
                    _ => Logical::Na,
                })
                .collect(),
        )),
    }
}

/// `x %in% set`: NA on the left is TRUE only when NA is listed, NA otherwise.
fn membership(l: &Vector, set: &Vector, len: usize) -> Vector {
    let set = set.clone().into_cells();
    let has_na = set.iter().any(|c| c.is_na());
    Vector::Logical(
        (0..len)
            .map(|i| match l.num_at(i) {
                CellValue::Num(x) => Logical::from_bool(set.contains(&CellValue::Num(x))),
                CellValue::Na if has_na => Logical::True,
                CellValue::Na => Logical::Na,
            })
            .collect(),
    )
}

fn eval_call(
    expr: &Expr,
    name: &str,
    args: &[Expr],
    named_args: &[(String, Expr)],
    ctx: &Context<'_>,
) -> Result<Vector, EvalError> {
    match name {
        "ifelse" => {
            let test = eval(&args[0], ctx)?;
            let yes = eval(&args[1], ctx)?;
            let no = eval(&args[2], ctx)?;
            let len = ctx.combine_len(&[
                (&test, args[0].span),
                (&yes, args[1].span),
                (&no, args[2].span),
            ])?;
            let pick = |i: usize| match test.logical_at(i) {
                Logical::True => Some(true),
                Logical::False => Some(false),
                Logical::Na => None,
            };
            let logical_result =
                matches!(yes, Vector::Logical(_)) || matches!(no, Vector::Logical(_));
            if matches!((&yes, &no), (Vector::Missing(_), Vector::Missing(_))) {
                return Ok(Vector::Missing(len));
            }
            if logical_result {
                Ok(Vector::Logical(
                    (0..len)
                        .map(|i| match pick(i) {
                            Some(true) => yes.logical_at(i),
                            Some(false) => no.logical_at(i),
                            None => Logical::Na,
                        })
                        .collect(),
                ))
            } else {
                Ok(Vector::Num(
                    (0..len)
                        .map(|i| match pick(i) {
                            Some(true) => yes.num_at(i),
                            Some(false) => no.num_at(i),
                            None => CellValue::Na,
                        })
                        .collect(),
                ))
            }
        }
        "is.na" => {
            let v = eval(&args[0], ctx)?;
            Ok(Vector::Logical(match v {
                Vector::Num(cells) => cells.iter().map(|c| Logical::from_bool(c.is_na())).collect(),
                Vector::Logical(ls) => ls.iter().map(|l| Logical::from_bool(*l == Logical::Na)).collect(),
                Vector::Missing(n) => vec![Logical::True; n],
            }))
        }
        "c" => {
            let mut cells = Vec::with_capacity(args.len());
            for a in args {
                let v = eval(a, ctx)?;
                if v.len() != 1 {
                    return Err(type_error(
                        a.span,
                        "c() lists single values, e.g. c(4, 4, 5)".to_string(),
                    ));
                }
                cells.extend(v.into_cells());
            }
            Ok(Vector::Num(cells))
        }
        _ => {
            let summary = Summary::from_name(name).ok_or_else(|| {
                err(
                    EvalErrorKind::UnknownFunction {
                        name: name.to_string(),
                        nearest: None,
                    },
                    expr.span,
                )
            })?;
            let values = eval(&args[0], ctx)?.into_cells();
            let cell = match summary {
                Summary::Min => stats::min(&values),
                Summary::Max => stats::max(&values),
                Summary::Mean => stats::mean(&values),
                Summary::Sd => stats::sd(&values),
                Summary::Sum => stats::sum(&values),
                Summary::Quantile => {
                    let (_, probs_expr) = &named_args[0];
                    let probs = eval(probs_expr, ctx)?.into_cells();
                    let p = match probs.as_slice() {
                        [CellValue::Num(p)] if (0.0..=1.0).contains(p) => *p,
                        [single] => {
                            return Err(err(
                                EvalErrorKind::ProbsOutOfRange {
                                    value: single.to_string(),
                                },
                                probs_expr.span,
                            ))
                        }
                        _ => {
                            return Err(type_error(
                                probs_expr.span,
                                "probs must be a single number between 0 and 1".to_string(),
                            ))
                        }
                    };
                    stats::quantile(&values, p)
                }
            };
            Ok(Vector::Num(vec![cell]))
        }
    }
}
