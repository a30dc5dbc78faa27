//! The interactive loop behind `cubes repl`.
//!
//! [`Repl::handle_line`] does all the work and returns the text to print, so
//! the loop itself is a thin wrapper over stdin/stdout.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::engine::{run_pipeline, StageTrace};
use crate::exercises::{find_exercise, grade, Exercise, Verdict};
use crate::frame::{CubeFrame, FrameDiff};
use crate::io;
use crate::lang::{normalize_source, parse_pipeline, print_stage};
use crate::render::{render_frame, RenderOptions};
use crate::wire::Diagnostic;

pub const HELP: &str = "\
Type a pipeline such as `data |> filter(red == 3 | green > 4)`, or just the
stages (`filter(red == 3)`); `data` is the current frame. End a line with `|>`
or leave a parenthesis open to continue on the next line.

  :show            print the current frame
  :undo            go back one step
  :reset           back to the starting frame
  :load PATH       load a CSV or JSON frame
  :save PATH       save the current frame (.json for JSON, else CSV)
  :exercises       list the exercises
  :check ID [ANS]  grade the steps so far (or the answer ANS) against exercise ID
  :help            this text
  :quit            leave
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Print this and keep going.
    Output(String),
    /// The input continues on the next line.
    More,
    Quit,
}

#[derive(Clone)]
struct State {
    frame: CubeFrame,
    /// Stages applied since the starting frame, as canonical text.
    stages: Vec<String>,
}

pub struct Repl {
    start: CubeFrame,
    state: State,
    undo: Vec<State>,
    pending: String,
    exercises: Vec<Exercise>,
    render: RenderOptions,
}

impl Repl {
    pub fn new(frame: CubeFrame, exercises: Vec<Exercise>, render: RenderOptions) -> Repl {
        Repl {
            start: frame.clone(),
            state: State {
                frame,
                stages: Vec::new(),
            },
            undo: Vec::new(),
            pending: String::new(),
            exercises,
            render,
        }
    }

    pub fn frame(&self) -> &CubeFrame {
        &self.state.frame
    }

    /// The steps so far as one pipeline over the starting frame.
    pub fn transcript(&self) -> String {
        std::iter::once("data")
            .chain(self.state.stages.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" |> ")
    }

    pub fn prompt(&self) -> &'static str {
        if self.pending.is_empty() {
            "cubes> "
        } else {
            "  ...> "
        }
    }

    fn show(&self, frame: &CubeFrame) -> String {
        render_frame(frame, &self.render).unwrap_or_else(|e| format!("{e}\n"))
    }

    pub fn handle_line(&mut self, line: &str) -> Step {
        if self.pending.is_empty() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                return Step::Output(String::new());
            }
            if let Some(cmd) = trimmed.strip_prefix(':') {
                return self.command(cmd);
            }
        } else if line.trim().is_empty() {
            // A blank line ends an unfinished pipeline so it can be reported.
            let source = std::mem::take(&mut self.pending);
            return Step::Output(self.execute(&source));
        }
        if !self.pending.is_empty() {
            self.pending.push('\n');
        }
        self.pending.push_str(line.trim_end());
        if continues(&self.pending) {
            return Step::More;
        }
        let source = std::mem::take(&mut self.pending);
        Step::Output(self.execute(&source))
    }

    fn command(&mut self, cmd: &str) -> Step {
        let (name, arg) = match cmd.split_once(char::is_whitespace) {
            Some((n, a)) => (n, a.trim()),
            None => (cmd, ""),
        };
        let text = match name {
            "q" | "quit" | "exit" => return Step::Quit,
            "h" | "help" => HELP.to_string(),
            "show" => self.show(&self.state.frame),
            "undo" => match self.undo.pop() {
                Some(prev) => {
                    self.state = prev;
                    format!("undone\n{}", self.show(&self.state.frame))
                }
                None => "nothing to undo\n".to_string(),
            },
            "reset" => {
                self.commit(State {
                    frame: self.start.clone(),
                    stages: Vec::new(),
                });
                format!("reset to the starting frame\n{}", self.show(&self.state.frame))
            }
            "load" if !arg.is_empty() => match io::load(Path::new(arg)) {
                Ok(frame) => {
                    self.start = frame.clone();
                    self.commit(State {
                        frame,
                        stages: Vec::new(),
                    });
                    format!("loaded {arg}\n{}", self.show(&self.state.frame))
                }
                Err(e) => format!("error: {e}\n"),
            },
            "save" if !arg.is_empty() => {
                let path = Path::new(arg);
                match io::save(&self.state.frame, path, io::Format::from_path(path)) {
                    Ok(()) => format!("saved {arg}\n"),
                    Err(e) => format!("error: {e}\n"),
                }
            }
            "load" | "save" => format!("usage: :{name} PATH\n"),
            "exercises" => {
                let mut out = String::new();
                for ex in &self.exercises {
                    out.push_str(&format!("{:<22} {}\n", ex.id, ex.prompt));
                }
                out
            }
            "check" if !arg.is_empty() => self.check(arg),
            "check" => "usage: :check ID [ANSWER]\n".to_string(),
            other => format!("unknown command `:{other}`; try :help\n"),
        };
        Step::Output(text)
    }

    fn commit(&mut self, next: State) {
        let prev = std::mem::replace(&mut self.state, next);
        self.undo.push(prev);
    }

    fn check(&self, arg: &str) -> String {
        let (id, answer) = match arg.split_once(char::is_whitespace) {
            Some((id, a)) => (id, Some(a.trim())),
            None => (arg, None),
        };
        let Some(ex) = find_exercise(&self.exercises, id) else {
            return format!("no exercise `{id}`; :exercises lists them\n");
        };
        let transcript = self.transcript();
        let submission = answer.unwrap_or(&transcript);
        let report = grade(ex, submission);
        let mut out = match report.verdict {
            Verdict::Correct => "correct\n".to_string(),
            _ => format!("{}\n", report.summary_line()),
        };
        for hit in &report.triggered_pitfalls {
            out.push_str(&format!("hint: {}\n", hit.message));
        }
        out
    }

    fn execute(&mut self, input: &str) -> String {
        let source = normalize_source(input);
        let pipeline = match parse_pipeline(&source) {
            Ok(p) => p,
            Err(e) => return Diagnostic::from(&e).render(&source),
        };
        let run = run_pipeline(&self.state.frame, &pipeline);
        let mut out = String::new();
        for (i, trace) in run.traces.iter().enumerate() {
            out.push_str(&describe_stage(i, trace));
            out.push_str(&self.show(&trace.output));
        }
        if let Some(e) = &run.error {
            out.push_str(&Diagnostic::from(e).render(&source));
            if !run.traces.is_empty() {
                out.push_str("nothing was kept; fix the step above and run the pipeline again\n");
            }
            return out;
        }
        if let Some(last) = run.traces.last() {
            let mut stages = self.state.stages.clone();
            stages.extend(pipeline.stages.iter().map(print_stage));
            self.commit(State {
                frame: last.output.clone(),
                stages,
            });
        } else {
            out.push_str(&self.show(&self.state.frame));
        }
        out
    }
}

/// An unfinished pipeline: trailing `|>` or operator, or an open parenthesis.
fn continues(text: &str) -> bool {
    let depth = text.chars().fold(0i32, |d, c| match c {
        '(' => d + 1,
        ')' => d - 1,
        _ => d,
    });
    let t = text.trim_end();
    depth > 0 || ["|>", "|", "&", ",", "+", "-", "*", "==", "!=", "<", ">", "<=", ">=", "%in%"]
        .iter()
        .any(|s| t.ends_with(s))
}

pub fn describe_diff(diff: &FrameDiff) -> Vec<String> {
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let mut notes = Vec::new();
    if let Some(groups) = &diff.aggregated_rows {
        let parts: Vec<String> = groups.iter().map(|g| format!("[{}]", list(g))).collect();
        notes.push(format!("summarized rows {}", parts.join(" ")));
    } else if !diff.dropped_rows.is_empty() {
        notes.push(format!("rows kept: {}", list(&diff.kept_rows)));
        let d = &diff.dropped_rows;
        let word = if d.len() == 1 { "row" } else { "rows" };
        notes.push(format!("dropped {word} {}", list(d)));
    }
    if let Some(p) = &diff.row_permutation {
        notes.push(format!("new row order: {}", list(p)));
    }
    let cols = |v: &[String]| v.join(", ");
    if !diff.added_columns.is_empty() {
        notes.push(format!("added {}", cols(&diff.added_columns)));
    }
    if !diff.dropped_columns.is_empty() {
        notes.push(format!("dropped {}", cols(&diff.dropped_columns)));
    }
    if !diff.changed_columns.is_empty() {
        notes.push(format!("changed {}", cols(&diff.changed_columns)));
    }
    notes
}

fn describe_stage(i: usize, trace: &StageTrace) -> String {
    let mut out = format!("[{}] {}\n", i + 1, print_stage(&trace.stage));
    for note in describe_diff(&trace.diff).iter().chain(&trace.notes) {
        out.push_str(&format!("    {note}\n"));
    }
    out
}

/// Runs the loop until `:quit` or end of input.
pub fn run<R: BufRead, W: Write>(repl: &mut Repl, input: R, mut output: W) -> std::io::Result<()> {
    write!(output, "{}", repl.prompt())?;
    output.flush()?;
    for line in input.lines() {
        match repl.handle_line(&line?) {
            Step::Quit => return Ok(()),
            Step::More => {}
            Step::Output(text) => write!(output, "{text}")?,
        }
        write!(output, "{}", repl.prompt())?;
        output.flush()?;
    }
    writeln!(output)?;
    Ok(())
}
