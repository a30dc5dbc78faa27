//! proptest strategies for ASTs and frames.

use cubes::frame::{CellValue, Column, ColumnName, CubeFrame};
use cubes::lang::{Assignment, BinaryOp, Expr, ExprKind, SelectItem, SelectMode, Span, Stage, UnaryOp, Verb};
use proptest::prelude::*;

pub fn arb_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["red", "orange", "x", "a.b", "y_2", "Blue"]).prop_map(String::from)
}

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..400).prop_map(|n| Expr::number(n as f64 / 4.0)),
        Just(Expr::bare(ExprKind::Na)),
        any::<bool>().prop_map(|b| Expr::bare(ExprKind::Bool(b))),
        arb_name().prop_map(|n| Expr::column(&n)),
    ];
    leaf.prop_recursive(5, 48, 4, |inner| {
        let ops = prop::sample::select(vec![
            BinaryOp::Lt,
            BinaryOp::Gt,
            BinaryOp::Le,
            BinaryOp::Ge,
            BinaryOp::Eq,
            BinaryOp::Ne,
            BinaryOp::In,
            BinaryOp::And,
            BinaryOp::Or,
            BinaryOp::Add,
            BinaryOp::Sub,
            BinaryOp::Mul,
        ]);
        let unary = prop::sample::select(vec![UnaryOp::Not, UnaryOp::Negate, UnaryOp::Desc]);
        let calls = prop::sample::select(vec!["max", "min", "quantile", "ifelse", "is.na", "c", "mean"]);
        prop_oneof![
            (ops, inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (unary, inner.clone()).prop_map(|(op, e)| Expr::unary(op, e)),
            (calls, prop::collection::vec(inner.clone(), 0..4), prop::option::of(inner)).prop_map(
                |(name, args, probs)| Expr::bare(ExprKind::Call {
                    name: name.to_string(),
                    args,
                    named_args: probs.map(|p| ("probs".to_string(), p)).into_iter().collect(),
                })
            ),
        ]
    })
}

fn item(n: String) -> SelectItem {
    SelectItem { name: n, span: Span::default() }
}

pub fn arb_stage() -> impl Strategy<Value = Stage> {
    let exprs = || prop::collection::vec(arb_expr(), 1..3);
    prop_oneof![
        exprs().prop_map(Verb::Filter),
        (any::<bool>(), prop::collection::vec(arb_name(), 1..4)).prop_map(|(ex, names)| Verb::Select {
            mode: if ex { SelectMode::Exclude } else { SelectMode::Include },
            items: names.into_iter().map(item).collect(),
        }),
        prop::collection::vec((arb_name(), arb_expr()), 1..3).prop_map(|a| Verb::Mutate(
            a.into_iter()
                .map(|(target, value)| Assignment { target, target_span: Span::default(), value })
                .collect()
        )),
        exprs().prop_map(Verb::Arrange),
        exprs().prop_map(Verb::GroupBy),
        exprs().prop_map(Verb::Summarize),
    ]
    .prop_map(Stage::bare)
}

fn arb_cell() -> impl Strategy<Value = CellValue> {
    prop_oneof![
        1 => Just(CellValue::Na),
        3 => (1u8..=9).prop_map(|v| CellValue::Num(v as f64)),
        2 => any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(CellValue::Num),
        1 => (-1000i32..1000, 1u32..1000).prop_map(|(a, b)| CellValue::Num(a as f64 / b as f64)),
    ]
}

/// Names as they appear in real frames, including computed ones whose text
/// needs quoting in CSV.
fn arb_column_name() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9_.]{0,8}",
        Just("max(red)".to_string()),
        Just("quantile(x, probs = 0.25)".to_string()),
        Just("say \"hi\"".to_string()),
    ]
}

/// Ungrouped frames of up to 5 columns and 7 rows, zero rows included.
pub fn arb_frame() -> impl Strategy<Value = CubeFrame> {
    (prop::collection::btree_set(arb_column_name(), 1..6), 0usize..8)
        .prop_flat_map(|(names, nrows)| {
            let names: Vec<String> = names.into_iter().collect();
            let ncols = names.len();
            (Just(names), prop::collection::vec(prop::collection::vec(arb_cell(), nrows), ncols), Just(nrows))
        })
        .prop_map(|(names, cols, nrows)| {
            let columns = names
                .into_iter()
                .zip(cols)
                .map(|(n, cells)| Column {
                    name: ColumnName::derived(n).unwrap(),
                    cells,
                })
                .collect();
            CubeFrame::from_columns(columns, nrows).unwrap()
        })
}

/// Cell bits, with -0.0 and 0.0 counted as the same cube.
pub fn cell_bits(f: &CubeFrame) -> Vec<Vec<Option<u64>>> {
    f.columns()
        .iter()
        .map(|c| {
            c.cells
                .iter()
                .map(|v| v.as_f64().map(|x| if x == 0.0 { 0 } else { x.to_bits() }))
                .collect()
        })
        .collect()
}
