//! JSON debug form of the AST: node kind, span and children. The workbench
//! uses the spans to underline source text.

use serde_json::{json, Value};

use super::ast::*;
use super::Span;

fn span(s: Span) -> Value {
    json!([s.start, s.end])
}

pub fn expr_to_json(expr: &Expr) -> Value {
    match &expr.kind {
        ExprKind::Number(v) => json!({"kind": "NumberLit", "value": v, "span": span(expr.span)}),
        ExprKind::Na => json!({"kind": "NaLit", "span": span(expr.span)}),
        ExprKind::Bool(b) => json!({"kind": "BoolLit", "value": b, "span": span(expr.span)}),
        ExprKind::Column(name) => {
            json!({"kind": "ColumnRef", "name": name, "span": span(expr.span)})
        }
        ExprKind::Unary { op, operand } => json!({
            "kind": "Unary",
            "op": match op {
                UnaryOp::Not => "not",
                UnaryOp::Negate => "negate",
                UnaryOp::Desc => "desc",
            },
            "span": span(expr.span),
            "children": [expr_to_json(operand)],
        }),
        ExprKind::Binary { op, lhs, rhs } => json!({
            "kind": "Binary",
            "op": op.name(),
            "span": span(expr.span),
            "children": [expr_to_json(lhs), expr_to_json(rhs)],
        }),
        ExprKind::Call {
            name,
            args,
            named_args,
        } => json!({
            "kind": "Call",
            "name": name,
            "span": span(expr.span),
            "children": args.iter().map(expr_to_json).collect::<Vec<_>>(),
            "named_args": named_args
                .iter()
                .map(|(k, v)| json!({"name": k, "value": expr_to_json(v)}))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn stage_to_json(stage: &Stage) -> Value {
    let children: Vec<Value> = match &stage.verb {
        Verb::Select { mode, items } => items
            .iter()
            .map(|i| {
                json!({
                    "kind": if *mode == SelectMode::Include { "Include" } else { "Exclude" },
                    "name": i.name,
                    "span": span(i.span),
                })
            })
            .collect(),
        Verb::Mutate(assignments) => assignments
            .iter()
            .map(|a| {
                json!({
                    "kind": "Assignment",
                    "target": a.target,
                    "span": span(a.target_span.join(a.value.span)),
                    "children": [expr_to_json(&a.value)],
                })
            })
            .collect(),
        other => other.exprs().into_iter().map(expr_to_json).collect(),
    };
    json!({
        "kind": "Verb",
        "verb": stage.verb.kind().name(),
        "span": span(stage.span),
        "children": children,
    })
}

pub fn pipeline_to_json(pipeline: &Pipeline) -> Value {
    json!({
        "kind": "Pipeline",
        "source": "data",
        "children": pipeline.stages.iter().map(stage_to_json).collect::<Vec<_>>(),
    })
}
