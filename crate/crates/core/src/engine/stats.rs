//! Summary statistics. Any `NA` in the input makes the result `NA`; empty
//! input gives `NA` for everything except `sum`, which gives 0.

use crate::frame::CellValue;

pub const SUMMARY_FUNCTIONS: [&str; 6] = ["min", "max", "mean", "sd", "sum", "quantile"];

pub fn is_summary_function(name: &str) -> bool {
    SUMMARY_FUNCTIONS.contains(&name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summary {
    Min,
    Max,
    Mean,
    Sd,
    Sum,
    Quantile,
}

impl Summary {
    pub fn from_name(name: &str) -> Option<Summary> {
        Some(match name {
            "min" => Summary::Min,
            "max" => Summary::Max,
            "mean" => Summary::Mean,
            "sd" => Summary::Sd,
            "sum" => Summary::Sum,
            "quantile" => Summary::Quantile,
            _ => return None,
        })
    }
}

/// Extracts the numbers, or `None` if any cell is missing.
fn complete(values: &[CellValue]) -> Option<Vec<f64>> {
    values.iter().map(|v| v.as_f64()).collect()
}

pub fn min(values: &[CellValue]) -> CellValue {
    reduce(values, f64::min)
}

pub fn max(values: &[CellValue]) -> CellValue {
    reduce(values, f64::max)
}

fn reduce(values: &[CellValue], f: fn(f64, f64) -> f64) -> CellValue {
    match complete(values) {
        Some(xs) => xs.into_iter().reduce(f).map_or(CellValue::Na, CellValue::Num),
        None => CellValue::Na,
    }
}

pub fn sum(values: &[CellValue]) -> CellValue {
    match complete(values) {
        Some(xs) => CellValue::Num(xs.iter().sum()),
        None => CellValue::Na,
    }
}

pub fn mean(values: &[CellValue]) -> CellValue {
    match complete(values) {
        Some(xs) if !xs.is_empty() => CellValue::Num(xs.iter().sum::<f64>() / xs.len() as f64),
        _ => CellValue::Na,
    }
}

/// Sample standard deviation (n - 1 denominator). Needs at least two values.
pub fn sd(values: &[CellValue]) -> CellValue {
    match complete(values) {
        Some(xs) if xs.len() >= 2 => {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
            CellValue::Num((ss / (n - 1.0)).sqrt())
        }
        _ => CellValue::Na,
    }
}

/// Linear-interpolation quantile at position `h = (n - 1) p + 1` of the
/// sorted sample (1-based). Caller validates `p` in `[0, 1]`.
pub fn quantile(values: &[CellValue], p: f64) -> CellValue {
    let Some(mut xs) = complete(values) else {
        return CellValue::Na;
    };
    if xs.is_empty() {
        return CellValue::Na;
    }
    xs.sort_by(f64::total_cmp);
    let pos = (xs.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let value = match xs.get(lo + 1) {
        Some(&hi) if frac > 0.0 => xs[lo] + frac * (hi - xs[lo]),
        _ => xs[lo],
    };
    CellValue::Num(value)
}
