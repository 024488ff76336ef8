//! Deterministic SVG line and bar charts from CSV tables.

use std::fmt::Write as _;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::CsvTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlotError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("plot spec: {0}")]
    Spec(String),
}

#[derive(JsonSchema, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    #[default]
    Line,
    Bar,
}

#[derive(JsonSchema, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    /// One series per distinct value of this column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default)]
    pub kind: PlotKind,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_label: Option<String>,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
}

fn default_width() -> u32 {
    640
}

fn default_height() -> u32 {
    400
}

impl PlotSpec {
    pub fn new(x: &str, y: &str, group: Option<&str>) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            group: group.map(String::from),
            kind: PlotKind::Line,
            title: String::new(),
            x_label: None,
            y_label: None,
            width: default_width(),
            height: default_height(),
        }
    }
}

pub fn parse_plot_spec(document: &str) -> Result<PlotSpec, PlotError> {
    serde_json::from_str(document).map_err(|e| PlotError::Spec(e.to_string()))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 140.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

struct Series {
    name: String,
    points: Vec<(String, f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn group_key(s: &str) -> (u8, f64, String) {
    match s.parse::<f64>() {
        Ok(v) => (0, v, String::new()),
        Err(_) => (1, 0.0, s.to_owned()),
    }
}

fn collect_series(table: &CsvTable, spec: &PlotSpec) -> Result<Vec<Series>, PlotError> {
    let col = |name: &str| table.column(name).ok_or_else(|| PlotError::UnknownColumn(name.into()));
    let xi = col(&spec.x)?;
    let yi = col(&spec.y)?;
    let gi = spec.group.as_deref().map(col).transpose()?;
    let mut series: Vec<Series> = Vec::new();
    for row in &table.rows {
        let xs = row.get(xi).cloned().unwrap_or_default();
        let Some(y) = row.get(yi).and_then(|c| c.parse::<f64>().ok()).filter(|v| v.is_finite()) else {
            continue;
        };
        let x = xs.parse::<f64>().unwrap_or(f64::NAN);
        let g = gi.and_then(|g| row.get(g).cloned()).unwrap_or_else(|| spec.y.clone());
        match series.iter_mut().find(|s| s.name == g) {
            Some(s) => s.points.push((xs, x, y)),
            None => series.push(Series { name: g, points: vec![(xs, x, y)] }),
        }
    }
    series.sort_by(|a, b| {
        let (ka, kb) = (group_key(&a.name), group_key(&b.name));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2))
    });
    Ok(series)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let pad = if hi == 0.0 { 1.0 } else { hi.abs() * 0.05 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Render `table` as an SVG 1.1 document.
pub fn emit_plot(table: &CsvTable, spec: &PlotSpec) -> Result<String, PlotError> {
    let series = collect_series(table, spec)?;
    let (w, h) = (spec.width.max(200) as f64, spec.height.max(150) as f64);
    let (pw, ph) = (w - MARGIN_L - MARGIN_R, h - MARGIN_T - MARGIN_B);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let bar = spec.kind == PlotKind::Bar;
    let (y0, y1) = {
        let (lo, hi) = range(all().map(|p| p.2));
        if bar { (lo.min(0.0), hi.max(0.0)) } else { (lo, hi) }
    };
    let categories: Vec<String> = {
        let mut c: Vec<String> = Vec::new();
        for p in all() {
            if !c.contains(&p.0) {
                c.push(p.0.clone());
            }
        }
        c
    };
    let (x0, x1) = range(all().map(|p| p.1));
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}"/></g>"#,
        l = MARGIN_L,
        r = MARGIN_L + pw,
        t = MARGIN_T,
        b = MARGIN_T + ph
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for i in 0..=5 {
        let v = y0 + (y1 - y0) * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 5.0,
            MARGIN_L,
            MARGIN_L - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    if bar {
        for (i, c) in categories.iter().enumerate() {
            let x = MARGIN_L + (i as f64 + 0.5) / categories.len() as f64 * pw;
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                MARGIN_T + ph + 16.0,
                escape(&tick_label_str(c))
            );
        }
    } else if !series.is_empty() {
        for i in 0..=5 {
            let v = x0 + (x1 - x0) * i as f64 / 5.0;
            let x = sx(v);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                MARGIN_T + ph,
                MARGIN_T + ph + 5.0,
                MARGIN_T + ph + 18.0,
                tick_label(v)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        MARGIN_L + pw / 2.0,
        h - 10.0,
        escape(spec.x_label.as_deref().unwrap_or(&spec.x))
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(spec.y_label.as_deref().unwrap_or(&spec.y))
    );
    let _ = writeln!(s, "</g>");

    let n = series.len().max(1) as f64;
    for (si, ser) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="series" data-name="{}">"#, escape(&ser.name));
        if bar {
            let slot = pw / categories.len().max(1) as f64;
            let bw = slot * 0.8 / n;
            for p in &ser.points {
                let ci = categories.iter().position(|c| *c == p.0).unwrap_or(0);
                let x = MARGIN_L + ci as f64 * slot + slot * 0.1 + si as f64 * bw;
                let (ya, yb) = (sy(p.2.max(0.0).max(y0)), sy(p.2.min(0.0).min(y1).max(y0)));
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{ya:.2}" width="{bw:.2}" height="{:.2}" fill="{color}"/>"#,
                    (yb - ya).abs()
                );
            }
        } else {
            let mut pts: Vec<(f64, f64)> = ser.points.iter().filter(|p| p.1.is_finite()).map(|p| (p.1, p.2)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                coords.join(" ")
            );
            for &(x, y) in &pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        let ly = MARGIN_T + 10.0 + si as f64 * 18.0;
        let lx = MARGIN_L + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{color}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            ly - 10.0,
            lx + 16.0,
            ly,
            escape(&tick_label_str(&ser.name))
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

/// Shorten numeric labels written at full precision.
fn tick_label_str(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(v) => tick_label(v),
        Err(_) => s.to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CsvTable {
        let mut t = CsvTable::new(vec!["g".into(), "x".into(), "y".into()]);
        for (g, x, y) in [("1", 0.1, 5.0), ("1", 0.2, 4.0), ("0.5", 0.1, 3.0), ("0.5", 0.2, 2.0)] {
            t.rows.push(vec![g.into(), x.to_string(), y.to_string()]);
        }
        t
    }

    #[test]
    fn one_polyline_per_group() {
        let svg = emit_plot(&table(), &PlotSpec::new("x", "y", Some("g"))).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.find("data-name=\"0.5\"").unwrap() < svg.find("data-name=\"1\"").unwrap());
    }

    #[test]
    fn empty_table_has_axes_only() {
        let t = CsvTable::new(vec!["x".into(), "y".into()]);
        let svg = emit_plot(&t, &PlotSpec::new("x", "y", None)).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<line"));
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn unknown_column() {
        assert_eq!(
            emit_plot(&table(), &PlotSpec::new("x", "nope", None)),
            Err(PlotError::UnknownColumn("nope".into()))
        );
    }

    #[test]
    fn bar_chart_and_determinism() {
        let spec = PlotSpec { kind: PlotKind::Bar, ..PlotSpec::new("x", "y", Some("g")) };
        let a = emit_plot(&table(), &spec).unwrap();
        assert_eq!(a, emit_plot(&table(), &spec).unwrap());
        assert_eq!(a.matches("<rect").count(), 1 + 4 + 2);
    }
}
