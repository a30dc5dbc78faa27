use serde::Serialize;

use crate::engine::eval_pipeline;
use crate::lang::parse_pipeline;
use crate::wire::{Diagnostic, WireFrame};

use super::compare::{compare_answers, compare_frames, GradeDiff};
use super::pitfalls::{diagnose_pitfalls, Outcome, PitfallHit};
use super::{Answer, Exercise, ExpectedResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
    ParseError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradeReport {
    pub exercise_id: String,
    pub verdict: Verdict,
    pub cell_diffs: GradeDiff,
    pub triggered_pitfalls: Vec<PitfallHit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Diagnostic>,
    /// The submission's result frame, when it evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<WireFrame>,
}

impl GradeReport {
    fn new(ex: &Exercise, verdict: Verdict) -> GradeReport {
        GradeReport {
            exercise_id: ex.id.clone(),
            verdict,
            cell_diffs: GradeDiff::default(),
            triggered_pitfalls: Vec::new(),
            error: None,
            result: None,
        }
    }

    pub fn summary_line(&self) -> String {
        match self.verdict {
            Verdict::Correct => "correct".to_string(),
            Verdict::ParseError => format!(
                "parse error: {}",
                self.error.as_ref().map_or("", |e| e.message.as_str())
            ),
            Verdict::Incorrect => match &self.error {
                Some(e) => format!("incorrect: {}", e.message),
                None => format!("incorrect: {}", self.cell_diffs.describe()),
            },
        }
    }
}

/// Reads a free-text answer list such as `3, 6`, `c(3, 6)` or
/// `red orange "yellow"`.
pub fn parse_answers(text: &str) -> Vec<Answer> {
    let mut body = text.trim();
    if let Some(inner) = body.strip_prefix("c(").and_then(|b| b.strip_suffix(')')) {
        body = inner;
    } else if let Some(inner) = ["()", "[]", "{}"].iter().find_map(|p| {
        let mut cs = p.chars();
        let (open, close) = (cs.next().unwrap(), cs.next().unwrap());
        body.strip_prefix(open).and_then(|b| b.strip_suffix(close))
    }) {
        body = inner;
    }
    body.split(|c: char| c == ',' || c.is_whitespace())
        .map(|t| t.trim_matches(|c| c == '"' || c == '\'' || c == '`'))
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Answer::Number(v),
            _ => Answer::Text(t.to_string()),
        })
        .collect()
}

/// Grades a submission. Never fails: every problem is part of the report.
pub fn grade(ex: &Exercise, submission: &str) -> GradeReport {
    let (want, ordered) = match &ex.expected {
        ExpectedResult::ScalarAnswers { answers, ordered } => {
            let diff = compare_answers(answers, &parse_answers(submission), *ordered);
            let verdict = if diff.is_empty() {
                Verdict::Correct
            } else {
                Verdict::Incorrect
            };
            return GradeReport {
                cell_diffs: diff,
                ..GradeReport::new(ex, verdict)
            };
        }
        ExpectedResult::ExactFrame(f) => (f, true),
        ExpectedResult::FrameUpToRowOrder(f) => (f, false),
    };

    let pipeline = match parse_pipeline(submission) {
        Ok(p) => p,
        Err(e) => {
            return GradeReport {
                error: Some(Diagnostic::from(&e)),
                triggered_pitfalls: diagnose_pitfalls(ex, &Outcome::ParseFailed(&e)),
                ..GradeReport::new(ex, Verdict::ParseError)
            }
        }
    };
    match eval_pipeline(&ex.start_frame, &pipeline) {
        Err(error) => GradeReport {
            error: Some(Diagnostic::from(&error)),
            triggered_pitfalls: diagnose_pitfalls(
                ex,
                &Outcome::EvalFailed {
                    pipeline: &pipeline,
                    error: &error,
                },
            ),
            ..GradeReport::new(ex, Verdict::Incorrect)
        },
        Ok((result, _)) => {
            let diff = compare_frames(want, &result, ordered);
            let mut report = GradeReport {
                result: Some(WireFrame::from_frame(&result)),
                ..GradeReport::new(ex, Verdict::Correct)
            };
            if !diff.is_empty() {
                report.verdict = Verdict::Incorrect;
                report.triggered_pitfalls = diagnose_pitfalls(
                    ex,
                    &Outcome::Evaluated {
                        pipeline: &pipeline,
                        result: &result,
                    },
                );
                report.cell_diffs = diff;
            }
            report
        }
    }
}
