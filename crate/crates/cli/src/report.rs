use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::table::{Check, PlotRequest, ResultTable, RunMeta};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub meta: RunMeta,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Rows whose computation failed, with the error.
    pub row_errors: Vec<String>,
    pub tables: Vec<TableEntry>,
    pub plots: Vec<String>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(CliError::from_json)
    }
}

/// File name of a table: the first one is `<experiment>.csv`, the others
/// `<experiment>-<name>.csv`.
pub fn table_file(experiment: &str, index: usize, table: &ResultTable) -> String {
    if index == 0 {
        format!("{experiment}.csv")
    } else {
        format!("{experiment}-{}.csv", table.name)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes every table as CSV, one SVG per plot request and `summary.json`, and
/// returns the paths written. The summary's table and plot lists are filled in
/// from what was written.
pub fn emit_report(
    dir: &Path,
    experiment: &str,
    tables: &[ResultTable],
    plots: &[PlotRequest],
    summary: &mut Summary,
) -> Result<Vec<PathBuf>> {
    if tables.is_empty() {
        return Err(CliError::Empty("no result tables".into()));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    summary.tables.clear();
    for (i, t) in tables.iter().enumerate() {
        let file = table_file(experiment, i, t);
        let path = dir.join(&file);
        write(&path, t.to_csv_string().as_bytes())?;
        summary.tables.push(TableEntry {
            name: t.name.clone(),
            file,
            columns: t.columns.clone(),
            rows: t.rows.len(),
        });
        written.push(path);
    }
    summary.plots.clear();
    for p in plots {
        let file = format!("{}.svg", p.name);
        let path = dir.join(&file);
        write(&path, render_svg(p).as_bytes())?;
        summary.plots.push(file);
        written.push(path);
    }
    let path = dir.join("summary.json");
    write(&path, summary.to_json().as_bytes())?;
    written.push(path);
    Ok(written)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Scatter plot as SVG: a frame, one `<circle>` per finite point and one
/// `<line>` for the fitted line, if any.
pub fn render_svg(plot: &PlotRequest) -> String {
    let tr = |v: f64| if plot.log_log { v.ln() } else { v };
    let pts: Vec<[f64; 2]> = plot
        .points
        .iter()
        .map(|p| [tr(p[0]), tr(p[1])])
        .filter(|p| p[0].is_finite() && p[1].is_finite())
        .collect();
    let mut xr = [f64::INFINITY, f64::NEG_INFINITY];
    let mut yr = [f64::INFINITY, f64::NEG_INFINITY];
    for p in &pts {
        xr = [xr[0].min(p[0]), xr[1].max(p[0])];
        yr = [yr[0].min(p[1]), yr[1].max(p[1])];
    }
    if let Some([a, b]) = plot.line {
        for x in xr {
            if x.is_finite() {
                let y = a * x + b;
                yr = [yr[0].min(y), yr[1].max(y)];
            }
        }
    }
    if !xr[0].is_finite() {
        xr = [0.0, 1.0];
        yr = [0.0, 1.0];
    }
    let pad = |r: [f64; 2]| {
        let w = (r[1] - r[0]).max(1e-12 * r[1].abs().max(1.0));
        [r[0] - 0.05 * w, r[1] + 0.05 * w]
    };
    let (xr, yr) = (pad(xr), pad(yr));
    let sx = |x: f64| MARGIN + (x - xr[0]) / (xr[1] - xr[0]) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - yr[0]) / (yr[1] - yr[0]) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let axis = |v: &str| {
        if plot.log_log {
            format!("ln {v}")
        } else {
            v.to_string()
        }
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(&axis(&plot.x_label))
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&axis(&plot.y_label))
    );
    for (x, y, anchor, v) in [
        (MARGIN, HEIGHT - MARGIN + 18.0, "start", xr[0]),
        (WIDTH - MARGIN, HEIGHT - MARGIN + 18.0, "end", xr[1]),
        (MARGIN - 6.0, HEIGHT - MARGIN, "end", yr[0]),
        (MARGIN - 6.0, MARGIN + 10.0, "end", yr[1]),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{v:.3}</text>"#
        );
    }
    if let Some([a, b]) = plot.line {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
            sx(xr[0]),
            sy(a * xr[0] + b),
            sx(xr[1]),
            sy(a * xr[1] + b)
        );
    }
    for p in &pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#,
            sx(p[0]),
            sy(p[1])
        );
    }
    s.push_str("</svg>\n");
    s
}
