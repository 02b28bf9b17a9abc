//! Static SVG line charts built from `metrics.csv`.
//!
//! Charts are produced from the CSV text alone, so re-plotting a saved file
//! gives the same bytes as the plots written alongside it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::CliError;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// One line: a legend label and `(step, value)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A chart ready to be written as `<metric>.svg`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub metric: String,
    pub svg: String,
}

/// Builds one chart per metric from a metrics CSV (with or without a `run`
/// column). Series appear in the order they first occur in the file.
pub fn charts_from_csv(text: &str) -> Result<Vec<Chart>, CliError> {
    let bad = |msg: String| CliError::Validation(format!("metrics csv: {msg}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (step, community, metric, mean) = match (col("step"), col("community"), col("metric"), col("mean")) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(bad("expected columns step, community, metric, mean".into())),
    };
    let run = col("run");

    let mut metrics: Vec<String> = Vec::new();
    // metric -> label -> series index
    let mut index: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut series: BTreeMap<String, Vec<Series>> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse = |i: usize| {
            field(i).parse::<f64>().map_err(|_| bad(format!("line {}: `{}` is not a number", line + 2, field(i))))
        };
        let (x, y) = (parse(step)?, parse(mean)?);
        let label = match run {
            Some(r) => format!("{} / {}", field(r), field(community)),
            None => field(community).to_string(),
        };
        let name = field(metric).to_string();
        if !series.contains_key(&name) {
            metrics.push(name.clone());
        }
        let lines = series.entry(name.clone()).or_default();
        let slot = index.entry(name).or_default();
        let k = *slot.entry(label.clone()).or_insert_with(|| {
            lines.push(Series { label, points: Vec::new() });
            lines.len() - 1
        });
        lines[k].points.push((x, y));
    }

    Ok(metrics
        .into_iter()
        .map(|m| {
            let svg = line_chart(&m, &series[&m]);
            Chart { metric: m, svg }
        })
        .collect())
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if lo >= 0.0 && hi <= 1.0 {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a standalone SVG line chart.
pub fn line_chart(title: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let (y_lo, y_hi) = nice_range(y_lo, y_hi);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // grid and ticks
    for k in 0..=5 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, LEFT - 6.0, y + 4.0);
    }
    for k in 0..=6 {
        let v = x_lo + (x_hi - x_lo) * k as f64 / 6.0;
        let x = sx(v);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            v.round()
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let dash = if k >= PALETTE.len() { r#" stroke-dasharray="6 3""# } else { "" };
        let mut d = String::new();
        for (j, &(x, y)) in s.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if j == 0 { "M" } else { " L" }, sx(x), sy(y));
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#);

        let ly = TOP + 8.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 22.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}
