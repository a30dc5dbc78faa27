//! Checks that return `Err(description)` instead of panicking, so the topic
//! tests and the acceptance report run the very same code.

use cubes::engine::stats;
use cubes::exercises::{builtin_exercises, find_exercise, grade, PitfallId, Verdict};
use cubes::frame::fixtures::figure1;
use cubes::frame::CellValue;
use cubes::lang::{parse_expression, BinaryOp, Expr, UnaryOp};
use cubes::{eval_pipeline, io, parse_pipeline};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub const QUANTILE_TOL: f64 = 1e-9;
pub const QUANTILE_POINT_TOL: f64 = 1e-12;

/// Runs `cases` random (frame, pipeline) pairs through the engine and the
/// reference interpreter. Returns how many frames contained NA.
pub fn oracle_agree(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut with_na = 0;
    for case in 0..cases {
        let f = gen_frame(&mut rng, 6, 6, 0.15);
        if f.rows.iter().flatten().any(Option::is_none) {
            with_na += 1;
        }
        let stages = gen_pipeline(&mut rng, &f, 4);
        let src = render_pipeline(&stages, &mut rng);
        let input = to_engine(&f);
        let pipeline = parse_pipeline(&src).map_err(|e| format!("case {case}: {src}\n{e}"))?;
        let (out, _) = eval_pipeline(&input, &pipeline).map_err(|e| format!("case {case}: {src}\n{e}"))?;
        compare(&from_engine(&out), &ref_run(&f, &stages))
            .map_err(|why| format!("case {case} disagrees: {why}\nsource: {src}\nframe: {f:?}"))?;
        if input != to_engine(&f) {
            return Err(format!("case {case}: input frame was modified"));
        }
    }
    Ok(with_na)
}

/// A random frame, optionally grouped first, then one stage of `kind`.
/// Every stage trace must satisfy the per-verb invariants.
pub fn verb_case(seed: u64, kind: Kind) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = gen_frame(&mut rng, 6, 6, 0.15);
    let mut stages = Vec::new();
    let mut cur = f.clone();
    if rng.gen_bool(0.4) {
        let g = gen_stage(&mut rng, &cur, Kind::GroupBy);
        cur = ref_apply(&cur, &g);
        stages.push(g);
    }
    stages.push(gen_stage(&mut rng, &cur, kind));
    let src = render_pipeline(&stages, &mut rng);
    let input = to_engine(&f);
    let before = input.clone();
    let pipeline = parse_pipeline(&src).map_err(|e| format!("{src}: {e}"))?;
    let (_, traces) = eval_pipeline(&input, &pipeline).map_err(|e| format!("{src}: {e}"))?;
    if input != before {
        return Err(format!("{src}: input modified"));
    }
    if traces.len() != stages.len() {
        return Err(format!("{src}: {} traces for {} stages", traces.len(), stages.len()));
    }
    for t in &traces {
        check_stage(t).map_err(|why| format!("{src}: {why}"))?;
        if !t.recheck() {
            return Err(format!("{src}: stage output is not reproducible"));
        }
    }
    Ok(())
}

const T: Option<bool> = Some(true);
const F: Option<bool> = Some(false);
const N: Option<bool> = None;

/// The three-valued tables, written out entry by entry.
pub const AND_TABLE: [(Option<bool>, Option<bool>, Option<bool>); 9] = [
    (T, T, T),
    (T, F, F),
    (T, N, N),
    (F, T, F),
    (F, F, F),
    (F, N, F),
    (N, T, N),
    (N, F, F),
    (N, N, N),
];
pub const OR_TABLE: [(Option<bool>, Option<bool>, Option<bool>); 9] = [
    (T, T, T),
    (T, F, T),
    (T, N, T),
    (F, T, T),
    (F, F, F),
    (F, N, N),
    (N, T, T),
    (N, F, N),
    (N, N, N),
];
pub const NOT_TABLE: [(Option<bool>, Option<bool>); 3] = [(T, F), (F, T), (N, N)];

fn lit(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "TRUE",
        Some(false) => "FALSE",
        None => "NA",
    }
}

/// Evaluates a logical expression of literals; ifelse turns it into a cell.
fn truth(src: &str) -> Result<Option<bool>, String> {
    let f = io::parse_csv("k\n1\n").unwrap();
    let p = parse_pipeline(&format!("data |> mutate(v = ifelse({src}, 1, 0)) |> select(v)"))
        .map_err(|e| format!("{src}: {e}"))?;
    let out = eval_pipeline(&f, &p).map_err(|e| format!("{src}: {e}"))?.0;
    Ok(out.columns()[0].cells[0].as_f64().map(|v| v == 1.0))
}

/// Every table entry through literal expressions. Returns the number checked.
pub fn kleene_literals() -> Result<usize, String> {
    let mut n = 0;
    let mut expect = |src: String, want: Option<bool>| -> Result<(), String> {
        let got = truth(&src)?;
        n += 1;
        if got == want {
            Ok(())
        } else {
            Err(format!("{src}: got {got:?}, want {want:?}"))
        }
    };
    for (a, b, want) in AND_TABLE {
        expect(format!("{} & {}", lit(a), lit(b)), want)?;
    }
    for (a, b, want) in OR_TABLE {
        expect(format!("{} | {}", lit(a), lit(b)), want)?;
    }
    for (a, want) in NOT_TABLE {
        expect(format!("!{}", lit(a)), want)?;
    }
    Ok(n)
}

/// The same tables vectorised over columns, plus filter keeping only TRUE.
/// Returns the number of cells checked.
pub fn kleene_columns() -> Result<usize, String> {
    let code = |v: Option<bool>| match v {
        Some(true) => "1",
        Some(false) => "0",
        None => "NA",
    };
    let mut csv = String::from("a,b\n");
    for (a, b, _) in AND_TABLE {
        csv.push_str(&format!("{},{}\n", code(a), code(b)));
    }
    let f = io::parse_csv(&csv).unwrap();
    let run = |src: &str| -> Result<cubes::CubeFrame, String> {
        let p = parse_pipeline(src).map_err(|e| format!("{src}: {e}"))?;
        Ok(eval_pipeline(&f, &p).map_err(|e| format!("{src}: {e}"))?.0)
    };
    let mut n = 0;
    for (op, table) in [("&", AND_TABLE), ("|", OR_TABLE)] {
        let out = run(&format!("data |> mutate(r = ifelse(a == 1 {op} b == 1, 1, 0))"))?;
        let got: Vec<Option<bool>> =
            out.column("r").unwrap().cells.iter().map(|c| c.as_f64().map(|v| v == 1.0)).collect();
        let want: Vec<Option<bool>> = table.iter().map(|t| t.2).collect();
        if got != want {
            return Err(format!("`{op}` column: got {got:?}, want {want:?}"));
        }
        n += got.len();
        let kept = run(&format!("data |> filter(a == 1 {op} b == 1)"))?.nrows();
        let want_kept = want.iter().filter(|w| **w == T).count();
        if kept != want_kept {
            return Err(format!("filter with `{op}` kept {kept} rows, want {want_kept}"));
        }
    }
    let not = run("data |> mutate(r = ifelse(!(a == 1), 1, 0))")?;
    for (i, (a, _, _)) in AND_TABLE.iter().enumerate() {
        let want = NOT_TABLE.iter().find(|(x, _)| x == a).unwrap().1;
        let got = not.column("r").unwrap().cells[i].as_f64().map(|v| v == 1.0);
        if got != want {
            return Err(format!("!{a:?}: got {got:?}"));
        }
        n += 1;
    }
    Ok(n)
}

/// Filter drops rows whose predicate is NA.
pub fn filter_drops_na() -> Result<(), String> {
    let f = io::parse_csv("red,blue\nNA,1\n3,2\n4,3\n").unwrap();
    let run = |src: &str| eval_pipeline(&f, &parse_pipeline(src).unwrap()).unwrap().0;
    let out = run("data |> filter(red == 3)");
    if out.rows() != vec![vec![CellValue::Num(3.0), CellValue::Num(2.0)]] {
        return Err(format!("filter(red == 3) gave {:?}", out.rows()));
    }
    let n = run("data |> filter(red >= 0)").nrows();
    if n != 2 {
        return Err(format!("filter(red >= 0) kept {n} rows"));
    }
    Ok(())
}

pub fn nums(xs: &[f64]) -> Vec<CellValue> {
    xs.iter().copied().map(CellValue::Num).collect()
}

/// sd(3, 4, 5) must be exactly 1, by the engine and by the Welford oracle.
pub fn sd_exact() -> Result<(), String> {
    let engine = stats::sd(&nums(&[3.0, 4.0, 5.0]));
    let oracle = welford_sd(&[3.0, 4.0, 5.0]);
    if engine == CellValue::Num(1.0) && oracle == 1.0 {
        Ok(())
    } else {
        Err(format!("engine {engine}, oracle {oracle}"))
    }
}

/// quantile(c(3, 4, 5), probs = 0.25), directly and through the language.
pub fn quantile_quarter() -> Result<f64, String> {
    let direct = stats::quantile(&nums(&[3.0, 4.0, 5.0]), 0.25).as_f64().ok_or("NA")?;
    let f = io::parse_csv("x\n5\n3\n4\n").unwrap();
    let out = eval_pipeline(&f, &parse_pipeline("data |> summarize(quantile(x, probs = 0.25))").unwrap())
        .map_err(|e| e.to_string())?
        .0;
    let name = out.column_names().next().unwrap().to_string();
    if name != "quantile(x, probs = 0.25)" {
        return Err(format!("column named {name}"));
    }
    let via_lang = out.columns()[0].cells[0].as_f64().ok_or("NA")?;
    let err = (direct - 3.5).abs().max((via_lang - 3.5).abs());
    if err <= QUANTILE_POINT_TOL {
        Ok(err)
    } else {
        Err(format!("direct {direct}, pipeline {via_lang}"))
    }
}

/// Engine quantile vs the direct formula on random vectors. Returns the
/// largest relative error seen.
pub fn random_quantiles(seed: u64, vectors: usize) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..vectors {
        let n = rng.gen_range(1..=25);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let p: f64 = if i % 10 == 0 { [0.0, 1.0][i / 10 % 2] } else { rng.gen() };
        let want = quantile_formula(&xs, p);
        match stats::quantile(&nums(&xs), p) {
            CellValue::Num(got) => {
                let err = (got - want).abs() / want.abs().max(1.0);
                worst = worst.max(err);
                if err > QUANTILE_TOL {
                    return Err(format!("vector {i}: p={p} got {got} want {want}"));
                }
            }
            CellValue::Na => return Err(format!("vector {i}: NA")),
        }
    }
    Ok(worst)
}

fn col(n: &str) -> Expr {
    Expr::column(n)
}

fn bin(op: BinaryOp, l: Expr, r: Expr) -> Expr {
    Expr::binary(op, l, r)
}

fn parses_to(src: &str, want: &Expr) -> Result<(), String> {
    match parse_expression(src) {
        Ok(got) if &got == want => Ok(()),
        Ok(got) => Err(format!("{src}: got {got:?}")),
        Err(e) => Err(format!("{src}: {e}")),
    }
}

pub fn precedence() -> Result<(), String> {
    parses_to("a | b & c", &bin(BinaryOp::Or, col("a"), bin(BinaryOp::And, col("b"), col("c"))))?;
    parses_to("a & b | c", &bin(BinaryOp::Or, bin(BinaryOp::And, col("a"), col("b")), col("c")))?;
    parses_to("(a | b) & c", &bin(BinaryOp::And, bin(BinaryOp::Or, col("a"), col("b")), col("c")))?;
    parses_to(
        "red == 3 | green > 4",
        &bin(
            BinaryOp::Or,
            bin(BinaryOp::Eq, col("red"), Expr::number(3.0)),
            bin(BinaryOp::Gt, col("green"), Expr::number(4.0)),
        ),
    )?;
    parses_to(
        "a + b * c - d",
        &bin(BinaryOp::Sub, bin(BinaryOp::Add, col("a"), bin(BinaryOp::Mul, col("b"), col("c"))), col("d")),
    )?;
    if parse_expression("a < b < c").is_ok() {
        return Err("chained comparison accepted".into());
    }
    Ok(())
}

/// The logical shorthand table. Returns the number of entries.
pub fn shorthand_goldens() -> Result<usize, String> {
    let x = || col("x");
    let y = || col("y");
    let cases = [
        ("x < y", bin(BinaryOp::Lt, x(), y())),
        ("x > y", bin(BinaryOp::Gt, x(), y())),
        ("x <= y", bin(BinaryOp::Le, x(), y())),
        ("x >= y", bin(BinaryOp::Ge, x(), y())),
        ("x == y", bin(BinaryOp::Eq, x(), y())),
        ("x != y", bin(BinaryOp::Ne, x(), y())),
        ("x %in% y", bin(BinaryOp::In, x(), y())),
        ("is.na(x)", Expr::call("is.na", vec![x()])),
        ("!is.na(x)", Expr::unary(UnaryOp::Not, Expr::call("is.na", vec![x()]))),
        ("a & b", bin(BinaryOp::And, col("a"), col("b"))),
        ("a | b", bin(BinaryOp::Or, col("a"), col("b"))),
        ("!a", Expr::unary(UnaryOp::Not, col("a"))),
    ];
    for (src, want) in &cases {
        parses_to(src, want)?;
    }
    Ok(cases.len())
}

/// `%in%`, `is.na` and `desc` parsed and run on the kit.
pub fn kit_goldens() -> Result<(), String> {
    let run = |src: &str| -> Result<cubes::CubeFrame, String> {
        let p = parse_pipeline(src).map_err(|e| format!("{src}: {e}"))?;
        Ok(eval_pipeline(&figure1(), &p).map_err(|e| format!("{src}: {e}"))?.0)
    };
    let red = |src: &str| -> Result<Vec<CellValue>, String> { Ok(run(src)?.column("red").unwrap().cells.clone()) };
    parses_to(
        "red %in% c(3, 5)",
        &bin(BinaryOp::In, col("red"), Expr::call("c", vec![Expr::number(3.0), Expr::number(5.0)])),
    )?;
    parses_to("desc(red)", &Expr::unary(UnaryOp::Desc, col("red")))?;
    let checks: [(&str, Vec<CellValue>); 5] = [
        ("data |> filter(red %in% c(3, 5))", nums(&[3.0, 5.0])),
        ("data |> filter(!is.na(red))", nums(&[3.0, 4.0, 5.0])),
        ("data |> filter(is.na(red))", vec![]),
        ("data |> arrange(desc(red))", nums(&[5.0, 4.0, 3.0])),
        ("data |> arrange(red)", nums(&[3.0, 4.0, 5.0])),
    ];
    for (src, want) in checks {
        let got = red(src)?;
        if got != want {
            return Err(format!("{src}: red is {got:?}"));
        }
    }
    Ok(())
}

/// Every built-in model solution grades correct with no diffs or hints.
pub fn model_solutions_correct() -> Result<usize, String> {
    let bank = builtin_exercises();
    for ex in &bank {
        let r = grade(ex, &ex.model_solution);
        if r.verdict != Verdict::Correct || !r.cell_diffs.is_empty() || !r.triggered_pitfalls.is_empty() {
            return Err(format!("{}: {}", ex.id, r.summary_line()));
        }
    }
    Ok(bank.len())
}

pub const AND_OR_SUBMISSION: &str = "data |> filter(red == 3 & green > 4)";
pub const DROPS_COLUMNS_SUBMISSION: &str = "data |> filter(red == 3 | green > 4) |> select(red, green)";

/// The two filter-task misconceptions grade incorrect with their hint.
pub fn pitfall_submissions() -> Result<(), String> {
    let bank = builtin_exercises();
    let ex = find_exercise(&bank, "filter-1").ok_or("no filter-1")?;
    for (src, id, prefix) in [
        (AND_OR_SUBMISSION, PitfallId::AndOrSwap, "Boolean operators: `&` requires BOTH"),
        (DROPS_COLUMNS_SUBMISSION, PitfallId::FilterDropsColumns, "filter() keeps every column and only removes rows"),
    ] {
        let r = grade(ex, src);
        if r.verdict != Verdict::Incorrect {
            return Err(format!("{src}: verdict {:?}", r.verdict));
        }
        match r.triggered_pitfalls.as_slice() {
            [hit] if hit.id == id && hit.message.starts_with(prefix) => {}
            other => return Err(format!("{src}: pitfalls {other:?}")),
        }
    }
    Ok(())
}

/// Kit dimensions, distinct values, column names, and the same answers
/// accepted by the warm-up exercises.
pub fn warm_ups() -> Result<(), String> {
    let kit = figure1();
    if kit.dimensions() != (3, 6) {
        return Err(format!("dimensions {:?}", kit.dimensions()));
    }
    if kit.distinct_values() != vec![3.0, 4.0, 5.0, 6.0] {
        return Err(format!("distinct values {:?}", kit.distinct_values()));
    }
    let names: Vec<&str> = kit.column_names().map(|n| n.as_str()).collect();
    if names != COLORS {
        return Err(format!("names {names:?}"));
    }
    let bank = builtin_exercises();
    for (id, answer) in [
        ("warmup-observations", "3"),
        ("warmup-values", "3, 4, 5, 6"),
        ("warmup-columns", "6"),
        ("warmup-names", "red, orange, yellow, green, blue, purple"),
        ("warmup-dims", "3, 6"),
    ] {
        let ex = find_exercise(&bank, id).ok_or_else(|| format!("no {id}"))?;
        let r = grade(ex, answer);
        if r.verdict != Verdict::Correct {
            return Err(format!("{id} rejects {answer}: {}", r.summary_line()));
        }
    }
    Ok(())
}
