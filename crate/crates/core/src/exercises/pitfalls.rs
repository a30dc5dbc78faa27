//! Known student misconceptions and the hints that answer them.

use serde::{Deserialize, Serialize};

use crate::engine::{eval_pipeline, EvalError, EvalErrorKind};
use crate::frame::CubeFrame;
use crate::lang::{BinaryOp, Expr, ExprKind, ParseError, ParseErrorKind, Pipeline, UnaryOp, Verb};

use super::compare::compare_frames;
use super::{Exercise, ExpectedResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PitfallId {
    FilterDropsColumns,
    AndOrSwap,
    AssignVsCompare,
    DescMisplacement,
}

impl PitfallId {
    pub const ALL: [PitfallId; 4] = [
        PitfallId::FilterDropsColumns,
        PitfallId::AndOrSwap,
        PitfallId::AssignVsCompare,
        PitfallId::DescMisplacement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PitfallId::FilterDropsColumns => "filter-drops-columns",
            PitfallId::AndOrSwap => "and-or-swap",
            PitfallId::AssignVsCompare => "assign-vs-compare",
            PitfallId::DescMisplacement => "desc-misplacement",
        }
    }

    /// Rules that fire on their error shape in any exercise. The others
    /// need the exercise to opt in, since they compare against its answer.
    fn universal(self) -> bool {
        matches!(self, PitfallId::AssignVsCompare | PitfallId::DescMisplacement)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PitfallHit {
    pub id: PitfallId,
    pub message: String,
}

/// What happened to a submission.
#[derive(Debug, Clone, Copy)]
pub enum Outcome<'a> {
    ParseFailed(&'a ParseError),
    EvalFailed {
        pipeline: &'a Pipeline,
        error: &'a EvalError,
    },
    Evaluated {
        pipeline: &'a Pipeline,
        result: &'a CubeFrame,
    },
}

pub const AND_OR_MESSAGE: &str = "Boolean operators: `&` requires BOTH conditions to be true; `|` requires AT LEAST ONE of them to be true. Check whether the task asks for \"and\" or \"or\".";
pub const ASSIGN_MESSAGE: &str = "`=` assigns; `==` compares. Use `==` to test whether two values are equal; `=` only names a column in mutate().";
pub const DESC_MESSAGE: &str = "desc() goes inside arrange(), around the column to sort from largest to smallest, as in `arrange(desc(red))`.";

fn filter_message(ncols: usize) -> String {
    format!(
        "filter() keeps every column and only removes rows. The answer should still have all {ncols} columns; leave out the select() step."
    )
}

/// Runs the rules that apply to `ex` against a submission outcome.
pub fn diagnose_pitfalls(ex: &Exercise, outcome: &Outcome<'_>) -> Vec<PitfallHit> {
    let mut hits = Vec::new();
    for id in PitfallId::ALL {
        if !(id.universal() || ex.pitfalls.contains(&id)) {
            continue;
        }
        let listed = ex.pitfalls.contains(&id);
        let message = match id {
            PitfallId::FilterDropsColumns => filter_drops_columns(ex, outcome),
            PitfallId::AndOrSwap => and_or_swap(ex, outcome).then(|| AND_OR_MESSAGE.to_string()),
            PitfallId::AssignVsCompare => {
                assign_vs_compare(outcome).then(|| ASSIGN_MESSAGE.to_string())
            }
            PitfallId::DescMisplacement => {
                desc_misplaced(ex, outcome, listed).then(|| DESC_MESSAGE.to_string())
            }
        };
        if let Some(message) = message {
            hits.push(PitfallHit { id, message });
        }
    }
    hits
}

fn expected_frame(ex: &Exercise) -> Option<&CubeFrame> {
    ex.expected.frame()
}

fn matches_expected(ex: &Exercise, pipeline: &Pipeline) -> bool {
    let Some(want) = expected_frame(ex) else {
        return false;
    };
    let ordered = matches!(ex.expected, ExpectedResult::ExactFrame(_));
    eval_pipeline(&ex.start_frame, pipeline)
        .is_ok_and(|(got, _)| compare_frames(want, &got, ordered).is_empty())
}

fn filter_drops_columns(ex: &Exercise, outcome: &Outcome<'_>) -> Option<String> {
    let Outcome::Evaluated { pipeline, result } = outcome else {
        return None;
    };
    let want = expected_frame(ex)?;
    let has = |f: fn(&Verb) -> bool| pipeline.stages.iter().any(|s| f(&s.verb));
    if !has(|v| matches!(v, Verb::Filter(_))) || !has(|v| matches!(v, Verb::Select { .. })) {
        return None;
    }
    let subset = result.ncols() < want.ncols()
        && result.column_names().all(|n| want.column(n.as_str()).is_some());
    subset.then(|| filter_message(want.ncols()))
}

/// Every copy of `e` with exactly one `&`/`|` flipped.
fn flips(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    match &e.kind {
        ExprKind::Binary { op, lhs, rhs } => {
            let flipped = match op {
                BinaryOp::And => Some(BinaryOp::Or),
                BinaryOp::Or => Some(BinaryOp::And),
                _ => None,
            };
            if let Some(f) = flipped {
                out.push(Expr::new(
                    ExprKind::Binary {
                        op: f,
                        lhs: lhs.clone(),
                        rhs: rhs.clone(),
                    },
                    e.span,
                ));
            }
            for l in flips(lhs) {
                out.push(Expr::new(
                    ExprKind::Binary {
                        op: *op,
                        lhs: Box::new(l),
                        rhs: rhs.clone(),
                    },
                    e.span,
                ));
            }
            for r in flips(rhs) {
                out.push(Expr::new(
                    ExprKind::Binary {
                        op: *op,
                        lhs: lhs.clone(),
                        rhs: Box::new(r),
                    },
                    e.span,
                ));
            }
        }
        ExprKind::Unary { op, operand } => {
            for o in flips(operand) {
                out.push(Expr::new(
                    ExprKind::Unary {
                        op: *op,
                        operand: Box::new(o),
                    },
                    e.span,
                ));
            }
        }
        _ => {}
    }
    out
}

/// Alternative filters a student who confused "and" with "or" meant.
fn swapped_filters(predicates: &[Expr]) -> Vec<Vec<Expr>> {
    let mut out = Vec::new();
    for (i, p) in predicates.iter().enumerate() {
        for f in flips(p) {
            let mut v = predicates.to_vec();
            v[i] = f;
            out.push(v);
        }
    }
    // Comma-separated conditions all have to hold; the `|` reading joins them.
    if predicates.len() > 1 {
        let joined = predicates[1..]
            .iter()
            .cloned()
            .fold(predicates[0].clone(), |acc, p| Expr::binary(BinaryOp::Or, acc, p));
        out.push(vec![joined]);
    }
    out
}

fn and_or_swap(ex: &Exercise, outcome: &Outcome<'_>) -> bool {
    let Outcome::Evaluated { pipeline, .. } = outcome else {
        return false;
    };
    pipeline.stages.iter().enumerate().any(|(i, stage)| {
        let Verb::Filter(predicates) = &stage.verb else {
            return false;
        };
        swapped_filters(predicates).into_iter().any(|alt| {
            let mut candidate = (*pipeline).clone();
            candidate.stages[i].verb = Verb::Filter(alt);
            matches_expected(ex, &candidate)
        })
    })
}

fn assign_vs_compare(outcome: &Outcome<'_>) -> bool {
    matches!(
        outcome,
        Outcome::ParseFailed(ParseError {
            kind: ParseErrorKind::AssignInsteadOfCompare,
            ..
        })
    )
}

fn is_negated_column(e: &Expr) -> bool {
    matches!(
        &e.kind,
        ExprKind::Unary { op: UnaryOp::Negate, operand } if matches!(operand.kind, ExprKind::Column(_))
    )
}

fn desc_misplaced(ex: &Exercise, outcome: &Outcome<'_>, listed: bool) -> bool {
    match outcome {
        Outcome::ParseFailed(e) => {
            matches!(&e.kind, ParseErrorKind::UnknownVerb { name, .. } if name == "desc")
        }
        Outcome::EvalFailed { pipeline, error } => match &error.kind {
            EvalErrorKind::DescOutsideArrange => true,
            EvalErrorKind::ArrangeKey { .. } => error
                .stage
                .and_then(|i| pipeline.stages.get(i))
                .is_some_and(|s| matches!(&s.verb, Verb::Arrange(keys) if keys.iter().any(is_negated_column))),
            _ => false,
        },
        // Sorted the wrong way round: toggling desc() on one key would fix it.
        Outcome::Evaluated { pipeline, .. } if listed => {
            pipeline.stages.iter().enumerate().any(|(i, stage)| {
                let Verb::Arrange(keys) = &stage.verb else {
                    return false;
                };
                (0..keys.len()).any(|k| {
                    let mut toggled = keys.clone();
                    toggled[k] = match &keys[k].kind {
                        ExprKind::Unary {
                            op: UnaryOp::Desc,
                            operand,
                        } => (**operand).clone(),
                        _ => Expr::unary(UnaryOp::Desc, keys[k].clone()),
                    };
                    let mut candidate = (*pipeline).clone();
                    candidate.stages[i].verb = Verb::Arrange(toggled);
                    matches_expected(ex, &candidate)
                })
            })
        }
        Outcome::Evaluated { .. } => false,
    }
}
