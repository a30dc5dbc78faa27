//! Terminal rendering: cube glyphs coloured by column, or a plain table.

use thiserror::Error;

use crate::engine::partition;
use crate::frame::{shape_for, CellValue, CubeFrame, ShapeGlyph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    AsciiCubes,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub mode: RenderMode,
    pub color: bool,
    pub width: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            mode: RenderMode::AsciiCubes,
            color: true,
            width: 80,
        }
    }
}

pub const MIN_CUBE_WIDTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("cube rendering needs at least {MIN_CUBE_WIDTH} columns of width, got {0}")]
    TooNarrow(usize),
}

/// Summary results use their own cube colour, whatever the column.
const SUMMARY_COLOR: &str = "1;97;100";
const OTHER_COLORS: [&str; 4] = ["36", "38;5;137", "38;5;205", "38;5;109"];

pub fn column_color(name: &str) -> &'static str {
    match name {
        "red" => "31",
        "orange" => "38;5;208",
        "yellow" => "33",
        "green" => "32",
        "blue" => "34",
        "purple" => "35",
        other => {
            let h = other.bytes().fold(0usize, |h, b| h.wrapping_mul(31).wrapping_add(b as usize));
            OTHER_COLORS[h % OTHER_COLORS.len()]
        }
    }
}

pub fn glyph_symbol(glyph: &ShapeGlyph, color: bool) -> String {
    match (glyph, color) {
        (ShapeGlyph::Triangle, true) => "▲".into(),
        (ShapeGlyph::Square, true) => "■".into(),
        (ShapeGlyph::Pentagon, true) => "⬟".into(),
        (ShapeGlyph::Hexagon, true) => "⬢".into(),
        (ShapeGlyph::Triangle, false) => "T".into(),
        (ShapeGlyph::Square, false) => "S".into(),
        (ShapeGlyph::Pentagon, false) => "P".into(),
        (ShapeGlyph::Hexagon, false) => "H".into(),
        (ShapeGlyph::Numeral(text), _) => text.clone(),
    }
}

fn paint(text: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn truncate(text: &str, width: usize) -> String {
    text.chars().take(width).collect()
}

fn pad(text: &str, width: usize) -> String {
    let len = text.chars().count();
    format!("{text}{}", " ".repeat(width.saturating_sub(len)))
}

fn center(text: &str, width: usize) -> String {
    let len = text.chars().count();
    let left = width.saturating_sub(len) / 2;
    format!("{}{text}{}", " ".repeat(left), " ".repeat(width.saturating_sub(len + left)))
}

pub fn render_frame(frame: &CubeFrame, opts: &RenderOptions) -> Result<String, RenderError> {
    if opts.mode == RenderMode::AsciiCubes && opts.width < MIN_CUBE_WIDTH {
        return Err(RenderError::TooNarrow(opts.width));
    }
    let cubes = opts.mode == RenderMode::AsciiCubes;
    let label_w = frame.nrows().max(1).to_string().len() + 1;
    let cell_w: Vec<usize> = frame
        .columns()
        .iter()
        .map(|c| {
            let name = c.name.as_str().chars().count();
            if cubes {
                name.clamp(3, 10)
            } else {
                c.cells
                    .iter()
                    .map(|v| v.to_string().chars().count())
                    .max()
                    .unwrap_or(0)
                    .max(name)
            }
        })
        .collect();

    // Panels of columns that fit the width.
    let mut panels: Vec<Vec<usize>> = Vec::new();
    let mut used = label_w;
    for (j, &w) in cell_w.iter().enumerate() {
        match panels.last_mut() {
            Some(p) if !cubes || used + w + 1 <= opts.width => p.push(j),
            _ => {
                panels.push(vec![j]);
                used = label_w;
            }
        }
        used += w + 1;
    }

    let mut out = String::new();
    let (nrows, ncols) = frame.dimensions();
    let mut title = format!("{nrows} × {ncols}");
    if let Some(spec) = frame.groups() {
        let keys: Vec<&str> = spec.keys().iter().map(|k| k.as_str()).collect();
        title.push_str(&format!(", grouped by {}", keys.join(", ")));
    }
    if frame.is_summary() {
        title.push_str(", summary");
    }
    out.push_str(&title);
    out.push('\n');
    if ncols == 0 {
        return Ok(out);
    }

    let groups = partition(frame);
    for panel in &panels {
        let max_w = opts.width.saturating_sub(label_w + 1).max(1);
        let widths: Vec<usize> = panel
            .iter()
            .map(|&j| if cubes { cell_w[j].min(max_w) } else { cell_w[j] })
            .collect();
        let mut header = " ".repeat(label_w);
        for (&j, &w) in panel.iter().zip(&widths) {
            let name = truncate(frame.columns()[j].name.as_str(), w);
            header.push(' ');
            header.push_str(&if cubes { center(&name, w) } else { pad(&name, w) });
        }
        out.push_str(header.trim_end());
        out.push('\n');
        for (g, (key, rows)) in groups.iter().enumerate() {
            if frame.groups().is_some() {
                if g > 0 {
                    out.push('\n');
                }
                let spec = frame.groups().expect("grouped");
                let label: Vec<String> = spec
                    .keys()
                    .iter()
                    .zip(key)
                    .map(|(k, v)| format!("{k} = {v}"))
                    .collect();
                out.push_str(&format!("{} [{}]\n", " ".repeat(label_w), label.join(", ")));
            }
            for &r in rows {
                let mut line = format!("{:>w$}", r + 1, w = label_w);
                for (&j, &w) in panel.iter().zip(&widths) {
                    let col = &frame.columns()[j];
                    line.push(' ');
                    line.push_str(&cell_text(col.name.as_str(), col.cells[r], w, frame.is_summary(), cubes, opts.color));
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn cell_text(column: &str, value: CellValue, width: usize, summary: bool, cubes: bool, color: bool) -> String {
    if !cubes {
        return pad(&value.to_string(), width);
    }
    let glyph = shape_for(value);
    let symbol = truncate(&glyph_symbol(&glyph, color), width);
    let code = if summary { SUMMARY_COLOR } else { column_color(column) };
    let centered = center(&symbol, width);
    if value.is_na() {
        return centered;
    }
    // Colour only the symbol so padding stays plain.
    let left = centered.len() - centered.trim_start().len();
    let right = width.saturating_sub(left + symbol.chars().count());
    format!("{}{}{}", " ".repeat(left), paint(&symbol, code, color), " ".repeat(right))
}
