//! Human-readable artifacts: the summary table and SVG charts.
//!
//! All output is a pure function of its inputs; numbers are printed with
//! fixed precision so files diff cleanly across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::evaluation::ConfusionMatrix;
use crate::pipeline::{ExperimentResult, ModelResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Text,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected text or csv)")),
        }
    }
}

/// Results whose id is in `only`, or all of them when `only` is empty.
pub fn select<'a>(result: &'a ExperimentResult, only: &[String]) -> Vec<&'a ModelResult> {
    result
        .results
        .iter()
        .filter(|r| only.is_empty() || only.iter().any(|o| o.eq_ignore_ascii_case(&r.id)))
        .collect()
}

/// One row per classifier: Classifier, Accuracy, Precision, Recall, F1.
pub fn summary_table(rows: &[&ModelResult], format: TableFormat) -> String {
    let header = ["Classifier", "Accuracy", "Precision", "Recall", "F1"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            let m = &r.metrics;
            [
                r.name.clone(),
                format!("{:.3}", m.accuracy),
                format!("{:.3}", m.precision),
                format!("{:.3}", m.recall),
                format!("{:.3}", m.f1),
            ]
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(header).expect("in-memory write");
            for row in &cells {
                w.write_record(row).expect("in-memory write");
            }
            out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        }
        TableFormat::Text => {
            let name_w = cells.iter().map(|c| c[0].len()).chain([header[0].len()]).max().unwrap_or(0);
            let _ = write!(out, "{:<name_w$}", header[0]);
            for h in &header[1..] {
                let _ = write!(out, "  {h:>9}");
            }
            out.push('\n');
            for row in &cells {
                let _ = write!(out, "{:<name_w$}", row[0]);
                for v in &row[1..] {
                    let _ = write!(out, "  {v:>9}");
                }
                out.push('\n');
            }
        }
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// White-to-blue ramp, `t` in [0, 1].
fn shade(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 8.0), lerp(255.0, 69.0), lerp(255.0, 148.0))
}

const CELL: usize = 56;
const MARGIN_LEFT: usize = 120;
const MARGIN_TOP: usize = 90;

/// Heatmap with true classes as rows and predicted classes as columns,
/// plus an `Unknown` column when any prediction abstained.
pub fn render_confusion_svg(cm: &ConfusionMatrix, title: &str) -> String {
    let c = cm.classes.len();
    let show_unknown = cm.has_unknown();
    let cols = c + usize::from(show_unknown);
    let width = MARGIN_LEFT + cols * CELL + 20;
    let height = MARGIN_TOP + c * CELL + 20;
    let max = cm
        .counts
        .iter()
        .flatten()
        .chain(cm.unknown.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"##, width / 2, escape(title));
    let _ = writeln!(
        s,
        r##"<text x="{}" y="40" text-anchor="middle">Predicted</text>"##,
        MARGIN_LEFT + cols * CELL / 2
    );
    let _ = writeln!(
        s,
        r##"<text x="14" y="{y}" text-anchor="middle" transform="rotate(-90 14 {y})">True</text>"##,
        y = MARGIN_TOP + c * CELL / 2
    );
    let mut col_labels: Vec<String> = cm.classes.clone();
    if show_unknown {
        col_labels.push("Unknown".into());
    }
    for (j, label) in col_labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<text class="col-label" x="{}" y="{}" text-anchor="middle">{}</text>"##,
            MARGIN_LEFT + j * CELL + CELL / 2,
            MARGIN_TOP - 8,
            escape(label)
        );
    }
    for (i, label) in cm.classes.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<text class="row-label" x="{}" y="{}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT - 8,
            MARGIN_TOP + i * CELL + CELL / 2 + 4,
            escape(label)
        );
        for j in 0..cols {
            let v = if j < c { cm.counts[i][j] } else { cm.unknown[i] };
            let t = v as f64 / max;
            let x = MARGIN_LEFT + j * CELL;
            let y = MARGIN_TOP + i * CELL;
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#999999"/>"##,
                shade(t)
            );
            let ink = if t > 0.5 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                r##"<text class="count" x="{}" y="{}" text-anchor="middle" fill="{ink}">{v}</text>"##,
                x + CELL / 2,
                y + CELL / 2 + 4
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_confusion_svg(cm: &ConfusionMatrix, title: &str, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, render_confusion_svg(cm, title))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Grouped bars: one group per class, one bar per classifier, height =
/// per-class recall.
pub fn render_class_bars_svg(results: &[&ModelResult]) -> String {
    let classes: Vec<String> = results
        .first()
        .map(|r| r.metrics.per_class.iter().map(|m| m.class.clone()).collect())
        .unwrap_or_default();
    let bar_w = 14;
    let group_w = results.len() * bar_w + 24;
    let plot_h = 240;
    let left = 50;
    let top = 40;
    let legend_w = 230;
    let width = left + classes.len() * group_w + legend_w;
    let height = top + plot_h + 50;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<text x="{}" y="20" text-anchor="middle" font-size="14">Per-class recall</text>"##, width / 2);
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = top + plot_h - (v * plot_h as f64).round() as usize;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/>"##,
            left + classes.len() * group_w
        );
        let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="end">{v:.2}</text>"##, left - 4, y + 4);
    }
    for (g, class) in classes.iter().enumerate() {
        let gx = left + g * group_w + 12;
        for (k, r) in results.iter().enumerate() {
            let recall = r.metrics.per_class.get(g).map_or(0.0, |m| m.recall);
            let h = (recall * plot_h as f64).round() as usize;
            let _ = writeln!(
                s,
                r##"<rect class="bar" x="{}" y="{}" width="{bar_w}" height="{h}" fill="{}"><title>{} {}: {recall:.3}</title></rect>"##,
                gx + k * bar_w,
                top + plot_h - h,
                PALETTE[k % PALETTE.len()],
                escape(&r.id),
                escape(class)
            );
        }
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##,
            gx + results.len() * bar_w / 2,
            top + plot_h + 16,
            escape(class)
        );
    }
    let lx = left + classes.len() * group_w + 16;
    for (k, r) in results.iter().enumerate() {
        let y = top + k * 18;
        let _ = writeln!(s, r##"<rect x="{lx}" y="{y}" width="12" height="12" fill="{}"/>"##, PALETTE[k % PALETTE.len()]);
        let _ = writeln!(s, r##"<text x="{}" y="{}">{}</text>"##, lx + 18, y + 10, escape(&r.name));
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_class_bars_svg(results: &[&ModelResult], path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, render_class_bars_svg(results))
}
