//! Shared test support: a naive reference interpreter, random frame and
//! pipeline generators, and per-verb invariant checks.
//!
//! The reference interpreter has its own tiny AST and works one row at a
//! time over `Vec<Vec<Option<f64>>>`. Generated pipelines are rendered to
//! source text, so the engine side goes through the real lexer and parser.
#![allow(dead_code)]

pub mod checks;
pub mod strategies;

use std::cmp::Ordering;

use cubes::engine::StageTrace;
use cubes::frame::{CellValue, CubeFrame, Lineage};
use cubes::lang::{ExprKind, UnaryOp, Verb};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Cell = Option<f64>;

pub const COLORS: [&str; 6] = ["red", "orange", "yellow", "green", "blue", "purple"];
const NEW_NAMES: [&str; 3] = ["x", "y", "z"];

/// Cells compare equal within this absolute/relative tolerance. Only sd and
/// interpolated quantiles ever produce values that are not exact.
pub const CELL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RefFrame {
    pub names: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub groups: Vec<String>,
    pub summary: bool,
}

impl RefFrame {
    pub fn idx(&self, name: &str) -> usize {
        self.names.iter().position(|n| n == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn key(&self, r: usize) -> Vec<Cell> {
        self.groups.iter().map(|g| self.rows[r][self.idx(g)]).collect()
    }

    /// Rows sharing row `r`'s group key (every row when ungrouped).
    fn group_of(&self, r: usize) -> Vec<usize> {
        let k = self.key(r);
        (0..self.rows.len()).filter(|&i| self.key(i) == k).collect()
    }

    /// Names usable in generated source (summary columns like `max(red)` are not).
    pub fn referable(&self) -> Vec<String> {
        self.names.iter().filter(|n| !n.contains('(')).cloned().collect()
    }
}

pub fn cmp_cell(a: Cell, b: Cell) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn cmp_tuple(a: &[Cell], b: &[Cell]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = cmp_cell(*x, *y);
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agg {
    Min,
    Max,
    Mean,
    Sum,
    Sd,
    Quantile(f64),
}

impl Agg {
    pub fn text(self, col: &str) -> String {
        match self {
            Agg::Min => format!("min({col})"),
            Agg::Max => format!("max({col})"),
            Agg::Mean => format!("mean({col})"),
            Agg::Sum => format!("sum({col})"),
            Agg::Sd => format!("sd({col})"),
            Agg::Quantile(p) => format!("quantile({col}, probs = {p})"),
        }
    }

    pub fn apply(self, xs: &[Cell]) -> Cell {
        if xs.iter().any(Option::is_none) {
            return None;
        }
        let v: Vec<f64> = xs.iter().map(|x| x.unwrap()).collect();
        let n = v.len();
        match self {
            Agg::Sum => Some(v.iter().sum()),
            _ if n == 0 => None,
            Agg::Min => Some(v.iter().copied().fold(f64::INFINITY, f64::min)),
            Agg::Max => Some(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            Agg::Mean => Some(v.iter().sum::<f64>() / n as f64),
            Agg::Sd if n < 2 => None,
            Agg::Sd => Some(welford_sd(&v)),
            Agg::Quantile(p) => Some(quantile_formula(&v, p)),
        }
    }
}

/// Sample sd via Welford's online update (a different route from two-pass).
pub fn welford_sd(v: &[f64]) -> f64 {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in v.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    (m2 / (v.len() - 1) as f64).sqrt()
}

/// Quantile at 1-based position h = (n - 1) p + 1 with linear interpolation.
pub fn quantile_formula(v: &[f64], p: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    let h = (n as f64 - 1.0) * p + 1.0;
    let lo = h.floor();
    let x = |k: f64| s[(k as usize).clamp(1, n) - 1];
    x(lo) + (h - lo) * (x(lo + 1.0) - x(lo))
}

#[derive(Debug, Clone)]
pub enum Num {
    Col(String),
    Lit(f64),
    Na,
    Bin(char, Box<Num>, Box<Num>),
    IfElse(Box<Pred>, Box<Num>, Box<Num>),
    Agg(Agg, String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cmp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    const ALL: [Cmp; 6] = [Cmp::Lt, Cmp::Gt, Cmp::Le, Cmp::Ge, Cmp::Eq, Cmp::Ne];

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Gt => a > b,
            Cmp::Le => a <= b,
            Cmp::Ge => a >= b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Pred {
    Cmp(Cmp, Num, Num),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    IsNa(Num),
    In(Num, Vec<Cell>),
    Lit(bool),
}

#[derive(Debug, Clone)]
pub enum RefStage {
    Filter(Vec<Pred>),
    Select { exclude: bool, cols: Vec<String> },
    Mutate(Vec<(String, Num)>),
    Arrange(Vec<(String, bool)>),
    GroupBy(Vec<String>),
    Summarize(Vec<(Agg, String)>),
}

// Kleene connectives written out case by case.
pub fn k_and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

pub fn k_or(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

pub fn k_not(a: Option<bool>) -> Option<bool> {
    a.map(|x| !x)
}

fn eval_num(e: &Num, f: &RefFrame, r: usize) -> Cell {
    match e {
        Num::Col(c) => f.rows[r][f.idx(c)],
        Num::Lit(v) => Some(*v),
        Num::Na => None,
        Num::Bin(op, a, b) => {
            let (x, y) = (eval_num(a, f, r)?, eval_num(b, f, r)?);
            let v = match op {
                '+' => x + y,
                '-' => x - y,
                _ => x * y,
            };
            Some(if v == 0.0 { 0.0 } else { v })
        }
        Num::IfElse(p, a, b) => match eval_pred(p, f, r) {
            Some(true) => eval_num(a, f, r),
            Some(false) => eval_num(b, f, r),
            None => None,
        },
        Num::Agg(agg, c) => {
            let j = f.idx(c);
            let xs: Vec<Cell> = f.group_of(r).iter().map(|&i| f.rows[i][j]).collect();
            agg.apply(&xs)
        }
    }
}

fn eval_pred(p: &Pred, f: &RefFrame, r: usize) -> Option<bool> {
    match p {
        Pred::Cmp(op, a, b) => match (eval_num(a, f, r), eval_num(b, f, r)) {
            (Some(x), Some(y)) => Some(op.holds(x, y)),
            _ => None,
        },
        Pred::And(a, b) => k_and(eval_pred(a, f, r), eval_pred(b, f, r)),
        Pred::Or(a, b) => k_or(eval_pred(a, f, r), eval_pred(b, f, r)),
        Pred::Not(a) => k_not(eval_pred(a, f, r)),
        Pred::IsNa(a) => Some(eval_num(a, f, r).is_none()),
        Pred::In(a, set) => match eval_num(a, f, r) {
            Some(x) => Some(set.contains(&Some(x))),
            None if set.contains(&None) => Some(true),
            None => None,
        },
        Pred::Lit(b) => Some(*b),
    }
}

pub fn ref_apply(f: &RefFrame, stage: &RefStage) -> RefFrame {
    let mut out = f.clone();
    match stage {
        RefStage::Filter(preds) => {
            out.rows = (0..f.rows.len())
                .filter(|&r| preds.iter().all(|p| eval_pred(p, f, r) == Some(true)))
                .map(|r| f.rows[r].clone())
                .collect();
        }
        RefStage::Select { exclude, cols } => {
            let mut keep: Vec<String> = Vec::new();
            if *exclude {
                keep = f.names.iter().filter(|n| !cols.contains(n)).cloned().collect();
            } else {
                for c in cols {
                    if !keep.contains(c) {
                        keep.push(c.clone());
                    }
                }
            }
            let idx: Vec<usize> = keep.iter().map(|n| f.idx(n)).collect();
            out.rows = f.rows.iter().map(|row| idx.iter().map(|&j| row[j]).collect()).collect();
            out.names = keep;
        }
        RefStage::Mutate(assignments) => {
            for (target, e) in assignments {
                let values: Vec<Cell> = (0..out.rows.len()).map(|r| eval_num(e, &out, r)).collect();
                match out.names.iter().position(|n| n == target) {
                    Some(j) => out.rows.iter_mut().zip(values).for_each(|(row, v)| row[j] = v),
                    None => {
                        out.names.push(target.clone());
                        out.rows.iter_mut().zip(values).for_each(|(row, v)| row.push(v));
                    }
                }
            }
        }
        RefStage::Arrange(keys) => {
            let mut order: Vec<usize> = (0..f.rows.len()).collect();
            order.sort_by(|&a, &b| {
                let o = cmp_tuple(&f.key(a), &f.key(b));
                if o != Ordering::Equal {
                    return o;
                }
                for (name, desc) in keys {
                    let j = f.idx(name);
                    let (x, y) = (f.rows[a][j], f.rows[b][j]);
                    let o = match (x, y, desc) {
                        (Some(x), Some(y), true) => y.partial_cmp(&x).unwrap(),
                        _ => cmp_cell(x, y),
                    };
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            });
            out.rows = order.iter().map(|&r| f.rows[r].clone()).collect();
        }
        RefStage::GroupBy(keys) => out.groups = keys.clone(),
        RefStage::Summarize(aggs) => {
            let mut keys: Vec<Vec<Cell>> = Vec::new();
            for r in 0..f.rows.len() {
                let k = f.key(r);
                if !keys.contains(&k) {
                    keys.push(k);
                }
            }
            if f.groups.is_empty() {
                keys = vec![Vec::new()];
            }
            keys.sort_by(|a, b| cmp_tuple(a, b));
            out.names = f.groups.clone();
            out.names.extend(aggs.iter().map(|(a, c)| a.text(c)));
            out.rows = keys
                .iter()
                .map(|k| {
                    let members: Vec<usize> = (0..f.rows.len()).filter(|&r| &f.key(r) == k).collect();
                    let mut row = k.clone();
                    for (agg, c) in aggs {
                        let j = f.idx(c);
                        let xs: Vec<Cell> = members.iter().map(|&r| f.rows[r][j]).collect();
                        row.push(agg.apply(&xs));
                    }
                    row
                })
                .collect();
            out.groups = Vec::new();
            out.summary = true;
        }
    }
    out
}

pub fn ref_run(f: &RefFrame, stages: &[RefStage]) -> RefFrame {
    stages.iter().fold(f.clone(), |acc, s| ref_apply(&acc, s))
}

// ---- rendering to source text -------------------------------------------

const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_CMP: u8 = 3;
const P_ADD: u8 = 4;
const P_MUL: u8 = 5;
const P_UNARY: u8 = 6;
const P_ATOM: u8 = 9;

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

fn binop(lhs: (String, u8), op: &str, rhs: (String, u8), prec: u8, comparison: bool) -> (String, u8) {
    let lp = if comparison { lhs.1 <= prec } else { lhs.1 < prec };
    let rp = rhs.1 <= prec;
    (format!("{} {op} {}", paren(lhs.0, lp), paren(rhs.0, rp)), prec)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_cell(c: Cell) -> String {
    c.map_or("NA".to_string(), fmt_num)
}

fn render_num(e: &Num) -> (String, u8) {
    match e {
        Num::Col(c) => (c.clone(), P_ATOM),
        Num::Lit(v) => (fmt_num(*v), P_ATOM),
        Num::Na => ("NA".into(), P_ATOM),
        Num::Bin(op, a, b) => {
            let prec = if *op == '*' { P_MUL } else { P_ADD };
            binop(render_num(a), &op.to_string(), render_num(b), prec, false)
        }
        Num::IfElse(p, a, b) => (
            format!("ifelse({}, {}, {})", render_pred(p).0, render_num(a).0, render_num(b).0),
            P_ATOM,
        ),
        Num::Agg(agg, c) => (agg.text(c), P_ATOM),
    }
}

fn render_pred(p: &Pred) -> (String, u8) {
    match p {
        Pred::Cmp(op, a, b) => binop(render_num(a), op.symbol(), render_num(b), P_CMP, true),
        Pred::And(a, b) => binop(render_pred(a), "&", render_pred(b), P_AND, false),
        Pred::Or(a, b) => binop(render_pred(a), "|", render_pred(b), P_OR, false),
        Pred::Not(a) => {
            let (s, prec) = render_pred(a);
            (format!("!{}", paren(s, prec < P_UNARY)), P_UNARY)
        }
        Pred::IsNa(a) => (format!("is.na({})", render_num(a).0), P_ATOM),
        Pred::In(a, set) => {
            let items: Vec<String> = set.iter().map(|c| fmt_cell(*c)).collect();
            let (s, prec) = render_num(a);
            (format!("{} %in% c({})", paren(s, prec <= P_CMP), items.join(", ")), P_CMP)
        }
        Pred::Lit(b) => ((if *b { "TRUE" } else { "FALSE" }).into(), P_ATOM),
    }
}

pub fn render_stage(s: &RefStage) -> String {
    match s {
        RefStage::Filter(ps) => {
            let parts: Vec<String> = ps.iter().map(|p| render_pred(p).0).collect();
            format!("filter({})", parts.join(", "))
        }
        RefStage::Select { exclude, cols } => {
            let sign = if *exclude { "-" } else { "" };
            let parts: Vec<String> = cols.iter().map(|c| format!("{sign}{c}")).collect();
            format!("select({})", parts.join(", "))
        }
        RefStage::Mutate(a) => {
            let parts: Vec<String> = a.iter().map(|(t, e)| format!("{t} = {}", render_num(e).0)).collect();
            format!("mutate({})", parts.join(", "))
        }
        RefStage::Arrange(keys) => {
            let parts: Vec<String> = keys
                .iter()
                .map(|(k, d)| if *d { format!("desc({k})") } else { k.clone() })
                .collect();
            format!("arrange({})", parts.join(", "))
        }
        RefStage::GroupBy(keys) => format!("group_by({})", keys.join(", ")),
        RefStage::Summarize(aggs) => {
            let parts: Vec<String> = aggs.iter().map(|(a, c)| a.text(c)).collect();
            format!("summarize({})", parts.join(", "))
        }
    }
}

pub fn render_pipeline(stages: &[RefStage], rng: &mut impl Rng) -> String {
    let mut src = String::from("data");
    for s in stages {
        src.push_str(if rng.gen_bool(0.5) { " |> " } else { " |>\n  " });
        src.push_str(&render_stage(s));
    }
    src
}

// ---- generators -------------------------------------------------------------

pub fn gen_cell(rng: &mut impl Rng, na_rate: f64) -> Cell {
    if rng.gen_bool(na_rate) {
        None
    } else {
        Some(rng.gen_range(1..=9) as f64)
    }
}

/// A random frame of up to `max_rows` x `max_cols` with values in {NA, 1..9}.
pub fn gen_frame(rng: &mut impl Rng, max_rows: usize, max_cols: usize, na_rate: f64) -> RefFrame {
    let ncols = rng.gen_range(1..=max_cols.min(COLORS.len()));
    let mut names: Vec<String> = COLORS.iter().map(|s| s.to_string()).collect();
    names.shuffle(rng);
    names.truncate(ncols);
    let nrows = rng.gen_range(0..=max_rows);
    let rows = (0..nrows)
        .map(|_| (0..ncols).map(|_| gen_cell(rng, na_rate)).collect())
        .collect();
    RefFrame {
        names,
        rows,
        groups: Vec::new(),
        summary: false,
    }
}

fn pick<'a, T>(rng: &mut impl Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty")
}

fn gen_agg(rng: &mut impl Rng, with_spread: bool) -> Agg {
    let k = rng.gen_range(0..if with_spread { 6 } else { 4 });
    match k {
        0 => Agg::Min,
        1 => Agg::Max,
        2 => Agg::Mean,
        3 => Agg::Sum,
        4 => Agg::Sd,
        _ => Agg::Quantile(*pick(rng, &[0.0, 0.25, 0.5, 0.75, 1.0])),
    }
}

pub fn gen_num(rng: &mut impl Rng, cols: &[String], depth: u32) -> Num {
    let roll = rng.gen_range(0..100);
    match roll {
        _ if depth == 0 || roll < 40 => Num::Col(pick(rng, cols).clone()),
        40..=59 => Num::Lit(rng.gen_range(0..=9) as f64),
        60..=64 => Num::Na,
        65..=84 => Num::Bin(
            *pick(rng, &['+', '-', '*']),
            Box::new(gen_num(rng, cols, depth - 1)),
            Box::new(gen_num(rng, cols, depth - 1)),
        ),
        85..=92 => Num::IfElse(
            Box::new(gen_pred(rng, cols, depth - 1)),
            Box::new(gen_num(rng, cols, depth - 1)),
            Box::new(gen_num(rng, cols, depth - 1)),
        ),
        _ => Num::Agg(gen_agg(rng, false), pick(rng, cols).clone()),
    }
}

pub fn gen_pred(rng: &mut impl Rng, cols: &[String], depth: u32) -> Pred {
    let roll = rng.gen_range(0..100);
    match roll {
        _ if depth == 0 || roll < 45 => Pred::Cmp(
            *pick(rng, &Cmp::ALL),
            gen_num(rng, cols, depth.min(1)),
            gen_num(rng, cols, depth.min(1)),
        ),
        45..=59 => Pred::And(Box::new(gen_pred(rng, cols, depth - 1)), Box::new(gen_pred(rng, cols, depth - 1))),
        60..=74 => Pred::Or(Box::new(gen_pred(rng, cols, depth - 1)), Box::new(gen_pred(rng, cols, depth - 1))),
        75..=82 => Pred::Not(Box::new(gen_pred(rng, cols, depth - 1))),
        83..=89 => Pred::IsNa(Num::Col(pick(rng, cols).clone())),
        90..=97 => {
            let n = rng.gen_range(1..=3);
            Pred::In(Num::Col(pick(rng, cols).clone()), (0..n).map(|_| gen_cell(rng, 0.2)).collect())
        }
        _ => Pred::Lit(rng.gen_bool(0.5)),
    }
}

fn distinct_subset(rng: &mut impl Rng, xs: &[String], max: usize) -> Vec<String> {
    let mut v = xs.to_vec();
    v.shuffle(rng);
    v.truncate(rng.gen_range(1..=max.min(xs.len())));
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Filter,
    Select,
    Mutate,
    Arrange,
    GroupBy,
    Summarize,
}

pub const KINDS: [Kind; 6] = [
    Kind::Filter,
    Kind::Select,
    Kind::Mutate,
    Kind::Arrange,
    Kind::GroupBy,
    Kind::Summarize,
];

/// A valid stage of the given kind for `f`. `f` must have a referable column.
pub fn gen_stage(rng: &mut impl Rng, f: &RefFrame, kind: Kind) -> RefStage {
    let cols = f.referable();
    match kind {
        Kind::Filter => RefStage::Filter((0..rng.gen_range(1..=2)).map(|_| gen_pred(rng, &cols, 2)).collect()),
        Kind::Select => {
            let free: Vec<String> = cols.iter().filter(|c| !f.groups.contains(c)).cloned().collect();
            if !free.is_empty() && rng.gen_bool(0.35) {
                RefStage::Select {
                    exclude: true,
                    cols: distinct_subset(rng, &free, free.len()),
                }
            } else {
                let mut chosen = distinct_subset(rng, &cols, cols.len());
                if rng.gen_bool(0.1) {
                    let dup = pick(rng, &chosen).clone();
                    chosen.push(dup);
                }
                for g in &f.groups {
                    if !chosen.contains(g) {
                        chosen.push(g.clone());
                    }
                }
                RefStage::Select { exclude: false, cols: chosen }
            }
        }
        Kind::Mutate => {
            let mut visible = cols.clone();
            let mut assignments = Vec::new();
            for _ in 0..rng.gen_range(1..=2) {
                let e = gen_num(rng, &visible, 2);
                let replaceable: Vec<String> = visible.iter().filter(|c| !f.groups.contains(c)).cloned().collect();
                let target = if !replaceable.is_empty() && rng.gen_bool(0.4) {
                    pick(rng, &replaceable).clone()
                } else {
                    pick(rng, &NEW_NAMES).to_string()
                };
                if !visible.contains(&target) {
                    visible.push(target.clone());
                }
                assignments.push((target, e));
            }
            RefStage::Mutate(assignments)
        }
        Kind::Arrange => RefStage::Arrange(
            (0..rng.gen_range(1..=2))
                .map(|_| (pick(rng, &cols).clone(), rng.gen_bool(0.5)))
                .collect(),
        ),
        Kind::GroupBy => RefStage::GroupBy(distinct_subset(rng, &cols, 2)),
        Kind::Summarize => {
            let mut aggs: Vec<(Agg, String)> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let a = (gen_agg(rng, true), pick(rng, &cols).clone());
                if !aggs.iter().any(|b| b.0.text(&b.1) == a.0.text(&a.1)) {
                    aggs.push(a);
                }
            }
            RefStage::Summarize(aggs)
        }
    }
}

/// Up to `max_stages` stages; stops early once no column can be referenced.
pub fn gen_pipeline(rng: &mut impl Rng, f: &RefFrame, max_stages: usize) -> Vec<RefStage> {
    let mut cur = f.clone();
    let mut stages = Vec::new();
    for _ in 0..rng.gen_range(0..=max_stages) {
        if cur.referable().is_empty() {
            break;
        }
        let kind = *pick(rng, &KINDS);
        let s = gen_stage(rng, &cur, kind);
        cur = ref_apply(&cur, &s);
        stages.push(s);
    }
    stages
}

// ---- conversion and comparison ------------------------------------------------

pub fn to_engine(f: &RefFrame) -> CubeFrame {
    let rows: Vec<Vec<CellValue>> = f
        .rows
        .iter()
        .map(|r| r.iter().map(|c| c.map_or(CellValue::Na, CellValue::Num)).collect())
        .collect();
    let frame = CubeFrame::make_frame(&f.names, &rows).expect("generated frames are valid");
    assert!(f.groups.is_empty() && !f.summary, "generated inputs are plain");
    frame
}

pub fn from_engine(f: &CubeFrame) -> RefFrame {
    RefFrame {
        names: f.column_names().map(|n| n.to_string()).collect(),
        rows: f.rows().iter().map(|r| r.iter().map(|c| c.as_f64()).collect()).collect(),
        groups: f.groups().map_or(Vec::new(), |g| g.keys().iter().map(|k| k.to_string()).collect()),
        summary: f.is_summary(),
    }
}

pub fn close(a: Cell, b: Cell) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= CELL_TOL * x.abs().max(y.abs()).max(1.0),
        (None, None) => true,
        _ => false,
    }
}

/// `Ok` when the frames agree; otherwise a description of the first difference.
pub fn compare(engine: &RefFrame, reference: &RefFrame) -> Result<(), String> {
    if engine.names != reference.names {
        return Err(format!("columns {:?} vs {:?}", engine.names, reference.names));
    }
    if engine.groups != reference.groups || engine.summary != reference.summary {
        return Err(format!(
            "groups/summary {:?}/{} vs {:?}/{}",
            engine.groups, engine.summary, reference.groups, reference.summary
        ));
    }
    if engine.rows.len() != reference.rows.len() {
        return Err(format!("{} rows vs {}", engine.rows.len(), reference.rows.len()));
    }
    for (i, (a, b)) in engine.rows.iter().zip(&reference.rows).enumerate() {
        if !a.iter().zip(b).all(|(x, y)| close(*x, *y)) {
            return Err(format!("row {}: {a:?} vs {b:?}", i + 1));
        }
    }
    Ok(())
}

// ---- per-stage invariants -------------------------------------------------------

fn group_keys(f: &CubeFrame) -> Vec<String> {
    f.groups().map_or(Vec::new(), |g| g.keys().iter().map(|k| k.to_string()).collect())
}

fn key_tuple(f: &CubeFrame, keys: &[String], r: usize) -> Vec<CellValue> {
    keys.iter().map(|k| f.column(k).unwrap().cells[r]).collect()
}

fn rows_lineage(t: &StageTrace) -> Result<&[usize], String> {
    match &t.lineage {
        Lineage::Rows(r) => Ok(r),
        Lineage::Aggregated(_) => Err("row verb reported aggregated lineage".into()),
    }
}

/// Checks the structural promises of one verb application.
pub fn check_stage(t: &StageTrace) -> Result<(), String> {
    let (input, output) = (&t.input, &t.output);
    for c in output.columns() {
        if c.cells.len() != output.nrows() {
            return Err(format!("column {} is not rectangular", c.name));
        }
    }
    let in_names: Vec<String> = input.column_names().map(|n| n.to_string()).collect();
    let out_names: Vec<String> = output.column_names().map(|n| n.to_string()).collect();
    match &t.stage.verb {
        Verb::Filter(_) => {
            if in_names != out_names {
                return Err("filter changed the columns".into());
            }
            if input.groups() != output.groups() {
                return Err("filter changed the grouping".into());
            }
            let rows = rows_lineage(t)?;
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err("filter output is not a subsequence".into());
            }
            for (i, &r) in rows.iter().enumerate() {
                if output.row(i) != input.row(r) {
                    return Err(format!("filter row {i} is not input row {r}"));
                }
            }
        }
        Verb::Select { .. } => {
            if input.nrows() != output.nrows() {
                return Err("select changed the row count".into());
            }
            for c in output.columns() {
                if input.column(c.name.as_str()) != Some(c) {
                    return Err(format!("select produced a column not in the input: {}", c.name));
                }
            }
        }
        Verb::Mutate(assignments) => {
            if input.nrows() != output.nrows() {
                return Err("mutate changed the row count".into());
            }
            for c in input.columns() {
                let targeted = assignments.iter().any(|a| c.name == a.target.as_str());
                match output.column(c.name.as_str()) {
                    None => return Err(format!("mutate dropped {}", c.name)),
                    Some(o) if !targeted && o != c => return Err(format!("mutate altered {}", c.name)),
                    _ => {}
                }
            }
        }
        Verb::Arrange(keys) => {
            let rows = rows_lineage(t)?;
            let mut sorted = rows.to_vec();
            sorted.sort_unstable();
            if sorted != (0..input.nrows()).collect::<Vec<_>>() {
                return Err("arrange is not a permutation".into());
            }
            for (i, &r) in rows.iter().enumerate() {
                if output.row(i) != input.row(r) {
                    return Err("arrange output row does not match its source".into());
                }
            }
            let again = cubes::engine::apply_stage(output, &t.stage).map_err(|e| e.to_string())?;
            if &again.frame != output {
                return Err("arrange is not idempotent".into());
            }
            let names: Vec<String> = keys
                .iter()
                .map(|k| match &k.kind {
                    ExprKind::Column(n) => n.clone(),
                    ExprKind::Unary { op: UnaryOp::Desc, operand } => match &operand.kind {
                        ExprKind::Column(n) => n.clone(),
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                })
                .collect();
            let mut all = group_keys(input);
            all.extend(names);
            for i in 1..rows.len() {
                if key_tuple(output, &all, i - 1) == key_tuple(output, &all, i) && rows[i - 1] > rows[i] {
                    return Err("arrange is not stable".into());
                }
            }
        }
        Verb::GroupBy(_) => {
            if input.columns() != output.columns() || input.nrows() != output.nrows() {
                return Err("group_by changed cells".into());
            }
        }
        Verb::Summarize(_) => {
            let keys = group_keys(input);
            let mut distinct: Vec<Vec<CellValue>> = Vec::new();
            for r in 0..input.nrows() {
                let k = key_tuple(input, &keys, r);
                if !distinct.contains(&k) {
                    distinct.push(k);
                }
            }
            if keys.is_empty() {
                distinct = vec![Vec::new()];
            }
            if output.nrows() != distinct.len() {
                return Err(format!("summarize gave {} rows for {} groups", output.nrows(), distinct.len()));
            }
            for r in 0..output.nrows() {
                let k = key_tuple(output, &keys, r);
                if !distinct.contains(&k) {
                    return Err("summarize invented a key tuple".into());
                }
            }
        }
    }
    Ok(())
}
