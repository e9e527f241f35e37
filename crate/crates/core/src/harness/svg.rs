//! Minimal SVG line plots drawn from a result CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::table::Table;
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// What to draw from a table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    /// Columns drawn as lines.
    pub lines: Vec<String>,
    /// Columns drawn as markers.
    pub markers: Vec<String>,
    /// Columns whose values name a curve.
    pub group_by: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
}

impl PlotSpec {
    /// Layout for an SER table.
    pub fn ser(title: &str, x: &str, log_x: bool) -> Self {
        Self {
            title: title.to_string(),
            x: x.to_string(),
            lines: vec!["ser_analytical".into()],
            markers: vec!["ser_mc_th".into(), "ser_mc_ml".into()],
            group_by: vec!["series".into()],
            log_x,
            log_y: true,
        }
    }

    /// Layout for a count-distribution table.
    pub fn pmf(title: &str) -> Self {
        Self {
            title: title.to_string(),
            x: "count".into(),
            lines: vec!["pmf_analytical".into()],
            markers: vec!["pmf_mc".into()],
            group_by: vec!["signal_rate_per_ns".into(), "symbol".into()],
            log_x: false,
            log_y: false,
        }
    }
}

type Curve = Vec<(f64, f64)>;

fn column(table: &Table, name: &str) -> Result<usize> {
    table
        .column(name)
        .ok_or_else(|| Error::Io(format!("plot: column `{name}` missing")))
}

pub fn render(table: &Table, spec: &PlotSpec) -> Result<String> {
    let xi = column(table, &spec.x)?;
    let groups: Vec<usize> = spec.group_by.iter().map(|g| column(table, g)).collect::<Result<_>>()?;
    let mut curves: BTreeMap<(String, String, bool), Curve> = BTreeMap::new();
    let mut order: Vec<(String, String, bool)> = Vec::new();
    for (cols, is_line) in [(&spec.lines, true), (&spec.markers, false)] {
        for name in cols.iter() {
            let Some(yi) = table.column(name) else { continue };
            for row in &table.rows {
                let (Ok(x), Ok(y)) = (row[xi].parse::<f64>(), row[yi].parse::<f64>()) else { continue };
                if (spec.log_x && x <= 0.0) || (spec.log_y && y <= 0.0) {
                    continue;
                }
                let label: Vec<&str> = groups.iter().map(|&g| row[g].as_str()).collect();
                let key = (label.join(" "), name.clone(), is_line);
                if !curves.contains_key(&key) {
                    order.push(key.clone());
                }
                curves.entry(key).or_default().push((x, y));
            }
        }
    }
    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };
    let all = curves.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (ty(y) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let xl = if spec.log_x { format!("1e{xv:.1}") } else { format!("{xv:.3}") };
        let yl = if spec.log_y { format!("1e{yv:.1}") } else { format!("{yv:.3}") };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xl}</text>"#,
            l + f * (r - l),
            b + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yl}</text>"#,
            l - 6.0,
            b - f * (b - t) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(&spec.x)
    );

    let labels: Vec<&String> = {
        let mut seen = Vec::new();
        for k in &order {
            if !seen.contains(&&k.0) {
                seen.push(&k.0);
            }
        }
        seen
    };
    for key in &order {
        let color = PALETTE[labels.iter().position(|l| *l == &key.0).unwrap_or(0) % PALETTE.len()];
        let pts = &curves[key];
        if key.2 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        } else {
            let dash = key.1.ends_with("ml");
            for &(x, y) in pts {
                if dash {
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="none" stroke="{color}"/>"#,
                        px(x) - 2.5,
                        py(y) - 2.5
                    );
                } else {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        px(x),
                        py(y)
                    );
                }
            }
        }
    }
    for (i, label) in labels.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = t + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{y:.1}" fill="{color}" text-anchor="end">{}</text>"#,
            r - 6.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `csv` and writes the plot next to it with an `.svg` extension.
pub fn render_file(csv: &Path, spec: &PlotSpec) -> Result<std::path::PathBuf> {
    let table = Table::read_file(csv)?;
    let svg = render(&table, spec)?;
    let out = csv.with_extension("svg");
    std::fs::write(&out, svg).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_one_polyline_per_series() {
        let mut t = Table::new(&["series", "sweep_value", "ser_analytical", "ser_mc_th", "ser_mc_ml"]);
        for (s, x, y) in [("a", 1.0, 1e-2), ("a", 2.0, 1e-3), ("b", 1.0, 2e-2), ("b", 2.0, 0.0)] {
            t.push(vec![s.into(), x.to_string(), y.to_string(), String::new(), String::new()]);
        }
        let svg = render(&t, &PlotSpec::ser("t", "sweep_value", false)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
        assert!(render(&t, &PlotSpec::pmf("p")).is_err());
    }
}
