use std::fmt::Write;

use super::ast::*;

/// Canonical text for an expression, with parentheses only where
/// precedence requires them.
pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

pub fn print_stage(stage: &Stage) -> String {
    let mut out = String::new();
    write_stage(&mut out, stage);
    out
}

pub fn print_pipeline(pipeline: &Pipeline) -> String {
    let mut out = String::from("data");
    for stage in &pipeline.stages {
        out.push_str(" |> ");
        write_stage(&mut out, stage);
    }
    out
}

fn write_stage(out: &mut String, stage: &Stage) {
    out.push_str(stage.verb.kind().name());
    out.push('(');
    match &stage.verb {
        Verb::Filter(es) | Verb::Arrange(es) | Verb::GroupBy(es) | Verb::Summarize(es) => {
            write_list(out, es.iter(), write_expr)
        }
        Verb::Select { mode, items } => write_list(out, items.iter(), |out, item| {
            if *mode == SelectMode::Exclude {
                out.push('-');
            }
            out.push_str(&item.name);
        }),
        Verb::Mutate(assignments) => write_list(out, assignments.iter(), |out, a| {
            let _ = write!(out, "{} = ", a.target);
            write_expr(out, &a.value);
        }),
    }
    out.push(')');
}

fn write_list<T>(out: &mut String, items: impl Iterator<Item = T>, mut each: impl FnMut(&mut String, T)) {
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        each(out, item);
    }
}

fn write_expr(out: &mut String, expr: &Expr) {
    match &expr.kind {
        ExprKind::Number(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Na => out.push_str("NA"),
        ExprKind::Bool(true) => out.push_str("TRUE"),
        ExprKind::Bool(false) => out.push_str("FALSE"),
        ExprKind::Column(name) => out.push_str(name),
        ExprKind::Unary {
            op: UnaryOp::Desc,
            operand,
        } => {
            out.push_str("desc(");
            write_expr(out, operand);
            out.push(')');
        }
        ExprKind::Unary { op, operand } => {
            out.push(if *op == UnaryOp::Not { '!' } else { '-' });
            write_operand(out, operand, operand.precedence() < UNARY_PRECEDENCE);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            // Left-associative operators may repeat on the left; comparisons
            // never chain, so an equal-precedence child always needs parens.
            let lhs_parens = if op.is_comparison() {
                lhs.precedence() <= prec
            } else {
                lhs.precedence() < prec
            };
            write_operand(out, lhs, lhs_parens);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, rhs, rhs.precedence() <= prec);
        }
        ExprKind::Call {
            name,
            args,
            named_args,
        } => {
            out.push_str(name);
            out.push('(');
            write_list(out, args.iter(), write_expr);
            for (i, (key, value)) in named_args.iter().enumerate() {
                if i > 0 || !args.is_empty() {
                    out.push_str(", ");
                }
                let _ = write!(out, "{key} = ");
                write_expr(out, value);
            }
            out.push(')');
        }
    }
}

fn write_operand(out: &mut String, expr: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, expr);
        out.push(')');
    } else {
        write_expr(out, expr);
    }
}
