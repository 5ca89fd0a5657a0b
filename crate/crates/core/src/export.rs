//! Plot-ready output: two-column CSV with a JSON comment header, JSON lines
//! for reports, and a dependency-free SVG line chart.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::report::SCHEMA_VERSION;
use crate::transition::{LevyDensity, TransitionDensity};

/// Metadata written as `# {json}` on the first line of a curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveHeader {
    pub schema_version: u32,
    pub what: String,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
}

impl CurveHeader {
    pub fn new(what: impl Into<String>, model: impl Into<String>) -> Self {
        CurveHeader {
            schema_version: SCHEMA_VERSION,
            what: what.into(),
            model: model.into(),
            k: None,
            t: None,
            atom_weight: None,
            convention: None,
            route: None,
        }
    }

    pub fn for_density(td: &TransitionDensity) -> Self {
        CurveHeader {
            k: Some(td.dim()),
            t: Some(td.time()),
            atom_weight: Some(td.atom_weight()),
            convention: Some(td.convention().to_string()),
            route: Some(td.route().to_string()),
            ..CurveHeader::new("density", td.model())
        }
    }

    pub fn for_levy(ld: &LevyDensity) -> Self {
        CurveHeader {
            k: Some(ld.dim()),
            convention: Some(ld.convention().to_string()),
            ..CurveHeader::new("levy", ld.model())
        }
    }
}

/// Writes `# {header}` followed by a CSV table with `columns`.
pub fn write_curve_csv<W: Write>(
    out: W,
    header: &impl Serialize,
    columns: [&str; 2],
    rows: &[(f64, f64)],
) -> Result<()> {
    let mut out = out;
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for &(x, y) in rows {
        w.write_record([fmt_f64(x), fmt_f64(y)])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_curve_csv`].
pub fn read_curve_csv(text: &str) -> Result<(Value, Vec<(f64, f64)>)> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let header = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Config("curve CSV must start with a `# {json}` line".into()))?;
    let header: Value = serde_json::from_str(header)?;
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let rows = reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Config(format!("bad CSV field in column {i}")))
            };
            Ok((parse(0)?, parse(1)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

/// Samples as CSV with columns `t, sample`.
pub fn write_samples_csv<W: Write>(out: W, t: f64, samples: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "sample"])?;
    let t = fmt_f64(t);
    for &s in samples {
        w.write_record([t.as_str(), fmt_f64(s).as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// One compact JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(mut out: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Shortest round-trip text for finite values; `inf`, `-inf`, `nan` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A single-series SVG line chart with labelled axis extremes.
pub fn svg_line_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if finite.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let path: Vec<String> = finite
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        esc(title)
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" points=\"{M},{top} {M},{bottom} {right},{bottom}\"/>\n",
        top = M,
        bottom = H - M,
        right = W - M
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        path.join(" ")
    ));
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            esc(&text)
        )
    };
    svg.push_str(&label(M, H - M + 16.0, "middle", format!("{x0:.4}")));
    svg.push_str(&label(W - M, H - M + 16.0, "middle", format!("{x1:.4}")));
    svg.push_str(&label(M - 4.0, H - M, "end", format!("{y0:.4}")));
    svg.push_str(&label(M - 4.0, M + 4.0, "end", format!("{y1:.4}")));
    svg.push_str(&label(W / 2.0, H - 12.0, "middle", x_label.to_string()));
    svg.push_str(&label(14.0, H / 2.0, "middle", y_label.to_string()));
    svg.push_str("</svg>\n");
    svg
}

/// The header as a JSON value, for sidecar files.
pub fn header_value(header: &CurveHeader) -> Value {
    serde_json::to_value(header).unwrap_or_else(|_| json!({}))
}
