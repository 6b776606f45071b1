//! File emission for the command-line driver: CSV tables, versioned JSON
//! documents, and small static SVG plots. Everything here is deterministic,
//! the same inputs produce the same bytes, so outputs can be diffed across
//! runs and platforms.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// 17 significant digits, enough to round-trip any f64 exactly.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column-oriented CSV builder. Numeric cells are written through
/// [`float17`] so tables are lossless.
pub struct Csv {
    buf: String,
    cols: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Csv {
            buf,
            cols: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[f64]) {
        assert_eq!(cells.len(), self.cols, "csv row width mismatch");
        for (j, c) in cells.iter().enumerate() {
            if j > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&float17(*c));
        }
        self.buf.push('\n');
    }

    /// Row with preformatted cells, for tables that mix text and numbers.
    pub fn raw_row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.cols, "csv row width mismatch");
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Serialize a payload with a leading `schema` field naming the document
/// format and version, so downstream readers can dispatch on it.
pub fn json_document<T: Serialize>(schema: &str, body: &T) -> Result<String> {
    let env = Envelope { schema, body };
    let mut text = serde_json::to_string_pretty(&env)
        .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 420.0;
const MARGIN_L: f64 = 58.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 42.0;

struct Series {
    points: Vec<[f64; 2]>,
    color: String,
    width: f64,
}

/// A single-panel line plot with autoscaled axes. Intentionally minimal:
/// polylines, point markers, one title. Output is a standalone SVG.
pub struct Plot {
    title: String,
    series: Vec<Series>,
    markers: Vec<([f64; 2], String)>,
}

impl Plot {
    pub fn new(title: &str) -> Self {
        Plot {
            title: title.to_string(),
            series: Vec::new(),
            markers: Vec::new(),
        }
    }

    pub fn line(&mut self, points: &[[f64; 2]], color: &str) -> &mut Self {
        self.line_width(points, color, 1.4)
    }

    pub fn line_width(&mut self, points: &[[f64; 2]], color: &str, width: f64) -> &mut Self {
        self.series.push(Series {
            points: points
                .iter()
                .filter(|p| p[0].is_finite() && p[1].is_finite())
                .copied()
                .collect(),
            color: color.to_string(),
            width,
        });
        self
    }

    pub fn mark(&mut self, x: f64, y: f64, color: &str) -> &mut Self {
        if x.is_finite() && y.is_finite() {
            self.markers.push(([x, y], color.to_string()));
        }
        self
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
        let mut feed = |p: &[f64; 2]| {
            xs.0 = xs.0.min(p[0]);
            xs.1 = xs.1.max(p[0]);
            ys.0 = ys.0.min(p[1]);
            ys.1 = ys.1.max(p[1]);
        };
        for s in &self.series {
            for p in &s.points {
                feed(p);
            }
        }
        for (p, _) in &self.markers {
            feed(p);
        }
        if !xs.0.is_finite() || !xs.1.is_finite() {
            xs = (0.0, 1.0);
        }
        if !ys.0.is_finite() || !ys.1.is_finite() {
            ys = (0.0, 1.0);
        }
        // degenerate spans still need a visible window
        if xs.1 - xs.0 < 1e-300 {
            let pad = xs.0.abs().max(1.0) * 0.5;
            xs = (xs.0 - pad, xs.1 + pad);
        }
        if ys.1 - ys.0 < 1e-300 {
            let pad = ys.0.abs().max(1.0) * 0.5;
            ys = (ys.0 - pad, ys.1 + pad);
        }
        let px = 0.05 * (xs.1 - xs.0);
        let py = 0.08 * (ys.1 - ys.0);
        ([xs.0 - px, xs.1 + px], [ys.0 - py, ys.1 + py])
    }

    pub fn render(&self) -> String {
        let ([x0, x1], [y0, y1]) = self.bounds();
        let inner_w = PLOT_W - MARGIN_L - MARGIN_R;
        let inner_h = PLOT_H - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * inner_w;
        let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * inner_h;

        let mut out = String::with_capacity(4096);
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\">"
        );
        let _ = writeln!(
            out,
            "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"#ffffff\"/>"
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
            PLOT_W / 2.0,
            xml_escape(&self.title)
        );

        // frame
        let _ = writeln!(
            out,
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{inner_w:.1}\" height=\"{inner_h:.1}\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>"
        );

        for t in ticks(x0, x1) {
            let px = sx(t);
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#444444\" stroke-width=\"1\"/>",
                MARGIN_T + inner_h,
                MARGIN_T + inner_h + 4.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                MARGIN_T + inner_h + 16.0,
                tick_label(t)
            );
        }
        for t in ticks(y0, y1) {
            let py = sy(t);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_L}\" y2=\"{py:.2}\" stroke=\"#444444\" stroke-width=\"1\"/>",
                MARGIN_L - 4.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                MARGIN_L - 7.0,
                py + 3.5,
                tick_label(t)
            );
        }

        // zero axes when they cross the window
        if x0 < 0.0 && x1 > 0.0 {
            let px = sx(0.0);
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{MARGIN_T}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#bbbbbb\" stroke-width=\"0.7\"/>",
                MARGIN_T + inner_h
            );
        }
        if y0 < 0.0 && y1 > 0.0 {
            let py = sy(0.0);
            let _ = writeln!(
                out,
                "<line x1=\"{MARGIN_L}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#bbbbbb\" stroke-width=\"0.7\"/>",
                MARGIN_L + inner_w
            );
        }

        for s in &self.series {
            if s.points.is_empty() {
                continue;
            }
            let mut pts = String::with_capacity(s.points.len() * 14);
            for p in &s.points {
                let _ = write!(pts, "{:.2},{:.2} ", sx(p[0]), sy(p[1]));
            }
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"{}\"/>",
                s.color,
                s.width,
                pts.trim_end()
            );
        }

        for (p, color) in &self.markers {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.2\" fill=\"{color}\" stroke=\"#222222\" stroke-width=\"0.6\"/>",
                sx(p[0]),
                sy(p[1])
            );
        }

        out.push_str("</svg>\n");
        out
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let range = hi - lo;
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let step = mag
        * if norm < 1.5 {
            1.0
        } else if norm < 3.5 {
            2.0
        } else if norm < 7.5 {
            5.0
        } else {
            10.0
        };
    let k0 = (lo / step).ceil() as i64;
    let k1 = (hi / step).floor() as i64;
    (k0..=k1).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
