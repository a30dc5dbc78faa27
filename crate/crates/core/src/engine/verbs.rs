//! The six verbs. Each returns the new frame, its row lineage and any notes
//! worth showing a student.

use std::cmp::Ordering;

use crate::frame::{CellValue, Column, ColumnName, CubeFrame, GroupSpec, Lineage};
use crate::lang::{print_expr, Assignment, Expr, ExprKind, SelectItem, SelectMode, Span, UnaryOp};

use super::eval::{check, eval, is_aggregating, unknown_column, Context, Ty};
use super::logic::Logical;
use super::{EvalError, EvalErrorKind};

#[derive(Debug)]
pub struct VerbOutput {
    pub frame: CubeFrame,
    pub lineage: Lineage,
    pub notes: Vec<String>,
}

impl VerbOutput {
    fn rows(frame: CubeFrame, rows: Vec<usize>) -> VerbOutput {
        VerbOutput {
            frame,
            lineage: Lineage::Rows(rows),
            notes: Vec::new(),
        }
    }
}

fn names(frame: &CubeFrame) -> Vec<&str> {
    frame.column_names().map(|c| c.as_str()).collect()
}

fn frame_error(e: crate::frame::FrameError, span: Span) -> EvalError {
    EvalError::new(EvalErrorKind::Frame(e), span)
}

/// Rows of each group, groups ordered by ascending key tuple (NA last), rows
/// in frame order. An ungrouped frame is a single group of every row.
pub fn partition(frame: &CubeFrame) -> Vec<(Vec<CellValue>, Vec<usize>)> {
    let Some(spec) = frame.groups() else {
        return vec![(Vec::new(), (0..frame.nrows()).collect())];
    };
    let key_cols: Vec<&Column> = spec
        .keys()
        .iter()
        .map(|k| frame.column(k.as_str()).expect("group keys name existing columns"))
        .collect();
    let key_of = |r: usize| key_cols.iter().map(|c| c.cells[r]).collect::<Vec<_>>();
    let mut order: Vec<usize> = (0..frame.nrows()).collect();
    order.sort_by(|&a, &b| cmp_keys(&key_of(a), &key_of(b)));
    let mut groups: Vec<(Vec<CellValue>, Vec<usize>)> = Vec::new();
    for r in order {
        let key = key_of(r);
        match groups.last_mut() {
            Some((k, rows)) if cmp_keys(k, &key) == Ordering::Equal => rows.push(r),
            _ => groups.push((key, vec![r])),
        }
    }
    groups
}

fn cmp_keys(a: &[CellValue], b: &[CellValue]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.cmp_na_last(*y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Expands a context-length (or length-1) result to one cell per context row.
fn spread<T: Copy>(values: Vec<T>, n: usize, span: Span) -> Result<Vec<T>, EvalError> {
    match values.len() {
        len if len == n => Ok(values),
        1 => Ok(vec![values[0]; n]),
        got => Err(EvalError::new(
            EvalErrorKind::LengthMismatch { expected: n, got },
            span,
        )),
    }
}

pub fn apply_filter(frame: &CubeFrame, predicates: &[Expr]) -> Result<VerbOutput, EvalError> {
    let cols = names(frame);
    for p in predicates {
        match check(p, &cols)? {
            Ty::Num => {
                return Err(EvalError::new(
                    EvalErrorKind::TypeError {
                        message: "filter() needs a TRUE/FALSE condition, but this is a number"
                            .to_string(),
                    },
                    p.span,
                )
                .with_hint("comparison expected — did you mean `==`?"))
            }
            Ty::Logical | Ty::Missing => {}
        }
    }
    let mut kept = Vec::new();
    for (_, rows) in partition(frame) {
        let ctx = Context { frame, rows: &rows };
        let mut keep = vec![Logical::True; rows.len()];
        for p in predicates {
            let v = spread(eval(p, &ctx)?.into_logicals(), rows.len(), p.span)?;
            for (k, x) in keep.iter_mut().zip(v) {
                *k = k.and(x);
            }
        }
        kept.extend(rows.iter().zip(keep).filter(|(_, k)| k.is_true()).map(|(r, _)| *r));
    }
    kept.sort_unstable();
    Ok(VerbOutput::rows(frame.take_rows(&kept), kept))
}

pub fn apply_select(
    frame: &CubeFrame,
    mode: SelectMode,
    items: &[SelectItem],
) -> Result<VerbOutput, EvalError> {
    let cols = names(frame);
    let mut notes = Vec::new();
    for item in items {
        if frame.column(&item.name).is_none() {
            return Err(unknown_column(&item.name, item.span, &cols));
        }
    }
    let chosen: Vec<&Column> = match mode {
        SelectMode::Include => {
            let mut chosen: Vec<&Column> = Vec::new();
            for item in items {
                if chosen.iter().any(|c| c.name == item.name.as_str()) {
                    notes.push(format!("`{}` listed more than once; kept the first", item.name));
                    continue;
                }
                chosen.push(frame.column(&item.name).expect("checked above"));
            }
            chosen
        }
        SelectMode::Exclude => frame
            .columns()
            .iter()
            .filter(|c| !items.iter().any(|i| c.name == i.name.as_str()))
            .collect(),
    };
    if let Some(spec) = frame.groups() {
        for key in spec.keys() {
            if !chosen.iter().any(|c| &c.name == key) {
                let span = items
                    .iter()
                    .find(|i| i.name == key.as_str())
                    .map_or_else(|| items.first().map(|i| i.span).unwrap_or_default(), |i| i.span);
                return Err(EvalError::new(
                    EvalErrorKind::SelectDropsGroupKey {
                        name: key.to_string(),
                    },
                    span,
                )
                .with_hint("keep the grouping column, or summarize first"));
            }
        }
    }
    let out = CubeFrame::from_columns(chosen.into_iter().cloned().collect(), frame.nrows())
        .and_then(|f| f.with_groups(frame.groups().cloned()))
        .map_err(|e| frame_error(e, Span::default()))?
        .with_summary_flag(frame.is_summary());
    Ok(VerbOutput {
        frame: out,
        lineage: Lineage::identity(frame.nrows()),
        notes,
    })
}

pub fn apply_mutate(frame: &CubeFrame, assignments: &[Assignment]) -> Result<VerbOutput, EvalError> {
    let groups = partition(frame);
    let mut columns: Vec<Column> = frame.columns().to_vec();
    let n = frame.nrows();
    for a in assignments {
        let working = CubeFrame::from_columns(columns.clone(), n)
            .map_err(|e| frame_error(e, a.target_span))?;
        let cols = names(&working);
        match check(&a.value, &cols)? {
            Ty::Logical => {
                return Err(EvalError::new(
                    EvalErrorKind::TypeError {
                        message: format!(
                            "`{}` would hold TRUE/FALSE values, but columns hold numbers",
                            a.target
                        ),
                    },
                    a.value.span,
                )
                .with_hint("turn a condition into numbers with ifelse(test, value_if_true, value_if_false)"))
            }
            Ty::Num | Ty::Missing => {}
        }
        let mut cells = vec![CellValue::Na; n];
        for (_, rows) in &groups {
            let ctx = Context {
                frame: &working,
                rows,
            };
            let v = spread(eval(&a.value, &ctx)?.into_cells(), rows.len(), a.value.span)?;
            for (&r, c) in rows.iter().zip(v) {
                cells[r] = c;
            }
        }
        let name = ColumnName::new(a.target.clone()).map_err(|e| frame_error(e, a.target_span))?;
        match columns.iter_mut().find(|c| c.name == name) {
            Some(existing) => existing.cells = cells,
            None => columns.push(Column { name, cells }),
        }
    }
    let out = CubeFrame::from_columns(columns, n)
        .and_then(|f| f.with_groups(frame.groups().cloned()))
        .map_err(|e| frame_error(e, Span::default()))?
        .with_summary_flag(frame.is_summary());
    Ok(VerbOutput::rows(out, (0..n).collect()))
}

struct SortKey {
    column: usize,
    descending: bool,
}

pub fn apply_arrange(frame: &CubeFrame, keys: &[Expr]) -> Result<VerbOutput, EvalError> {
    let cols = names(frame);
    let mut sort_keys = Vec::new();
    for key in keys {
        let (name, descending, span) = match &key.kind {
            ExprKind::Column(name) => (name, false, key.span),
            ExprKind::Unary {
                op: UnaryOp::Desc,
                operand,
            } => match &operand.kind {
                ExprKind::Column(name) => (name, true, operand.span),
                _ => return Err(arrange_key_error(key)),
            },
            _ => return Err(arrange_key_error(key)),
        };
        let column = frame
            .column_index(name)
            .ok_or_else(|| unknown_column(name, span, &cols))?;
        sort_keys.push(SortKey { column, descending });
    }
    let cells = |r: usize, k: &SortKey| frame.columns()[k.column].cells[r];
    let compare = |a: usize, b: usize| {
        sort_keys
            .iter()
            .map(|k| {
                let (x, y) = (cells(a, k), cells(b, k));
                match (x, y) {
                    // NA sorts last in both directions.
                    (CellValue::Na, _) | (_, CellValue::Na) => x.cmp_na_last(y),
                    _ if k.descending => y.cmp_na_last(x),
                    _ => x.cmp_na_last(y),
                }
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    let mut order = Vec::with_capacity(frame.nrows());
    for (_, mut rows) in partition(frame) {
        rows.sort_by(|&a, &b| compare(a, b));
        order.extend(rows);
    }
    Ok(VerbOutput::rows(frame.take_rows(&order), order))
}

fn arrange_key_error(key: &Expr) -> EvalError {
    let hint = match &key.kind {
        ExprKind::Unary {
            op: UnaryOp::Negate,
            ..
        } => "for descending order wrap the column in desc(), e.g. arrange(desc(red))",
        _ => "arrange() takes column names, optionally wrapped in desc()",
    };
    EvalError::new(
        EvalErrorKind::ArrangeKey {
            found: print_expr(key),
        },
        key.span,
    )
    .with_hint(hint)
}

pub fn apply_group_by(frame: &CubeFrame, keys: &[Expr]) -> Result<VerbOutput, EvalError> {
    let cols = names(frame);
    let mut names_out: Vec<ColumnName> = Vec::new();
    let mut notes = Vec::new();
    for key in keys {
        let ExprKind::Column(name) = &key.kind else {
            return Err(EvalError::new(
                EvalErrorKind::GroupKey {
                    found: print_expr(key),
                },
                key.span,
            )
            .with_hint("group_by() takes column names"));
        };
        let column = frame
            .column(name)
            .ok_or_else(|| unknown_column(name, key.span, &cols))?;
        if names_out.contains(&column.name) {
            notes.push(format!("`{name}` listed more than once"));
            continue;
        }
        names_out.push(column.name.clone());
    }
    let spec = if names_out.is_empty() {
        None
    } else {
        Some(GroupSpec::new(names_out).map_err(|e| frame_error(e, Span::default()))?)
    };
    let out = frame
        .clone()
        .with_groups(spec)
        .map_err(|e| frame_error(e, Span::default()))?;
    let ngroups = if out.groups().is_some() {
        partition(&out).len()
    } else {
        1
    };
    notes.push(format!(
        "{ngroups} group{}; the cells are unchanged",
        if ngroups == 1 { "" } else { "s" }
    ));
    Ok(VerbOutput {
        frame: out,
        lineage: Lineage::identity(frame.nrows()),
        notes,
    })
}

pub fn apply_summarize(frame: &CubeFrame, exprs: &[Expr]) -> Result<VerbOutput, EvalError> {
    let cols = names(frame);
    for e in exprs {
        let ty = check(e, &cols)?;
        if !is_aggregating(e) {
            return Err(EvalError::new(
                EvalErrorKind::NonScalarSummary {
                    expr: print_expr(e),
                },
                e.span,
            )
            .with_hint("wrap columns in a summary function such as max(red) or mean(red)"));
        }
        if ty == Ty::Logical {
            return Err(EvalError::new(
                EvalErrorKind::TypeError {
                    message: "summaries hold numbers, not TRUE/FALSE values".to_string(),
                },
                e.span,
            ));
        }
    }
    let groups = partition(frame);
    let key_names: Vec<ColumnName> = frame
        .groups()
        .map(|g| g.keys().to_vec())
        .unwrap_or_default();
    let mut columns: Vec<Column> = key_names
        .iter()
        .enumerate()
        .map(|(j, name)| Column {
            name: name.clone(),
            cells: groups.iter().map(|(key, _)| key[j]).collect(),
        })
        .collect();
    for e in exprs {
        let mut cells = Vec::with_capacity(groups.len());
        for (_, rows) in &groups {
            let v = eval(e, &Context { frame, rows })?;
            if v.len() != 1 {
                return Err(EvalError::new(
                    EvalErrorKind::NonScalarSummary {
                        expr: print_expr(e),
                    },
                    e.span,
                ));
            }
            cells.extend(v.into_cells());
        }
        let name = ColumnName::derived(print_expr(e)).map_err(|err| frame_error(err, e.span))?;
        if columns.iter().any(|c| c.name == name) {
            return Err(EvalError::new(
                EvalErrorKind::Frame(crate::frame::FrameError::DuplicateColumn(name.to_string())),
                e.span,
            ));
        }
        columns.push(Column { name, cells });
    }
    let out = CubeFrame::from_columns(columns, groups.len())
        .map_err(|e| frame_error(e, Span::default()))?
        .with_summary_flag(true);
    Ok(VerbOutput {
        frame: out,
        lineage: Lineage::Aggregated(groups.into_iter().map(|(_, rows)| rows).collect()),
        notes: Vec::new(),
    })
}
