//! CSV, JSON manifest and SVG writers.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip form; switches to exponent notation for tiny/huge values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Comma-separated, header row, LF endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

/// Rows of a long-format sweep table.
#[derive(Default)]
pub struct Long {
    pub rows: Vec<Vec<String>>,
}

impl Long {
    pub fn push(&mut self, param: f64, quantity: &str, value: f64) {
        self.rows.push(vec![num(param), quantity.to_string(), num(value)]);
    }

    pub fn push_opt(&mut self, param: f64, quantity: &str, value: Option<f64>) {
        if let Some(v) = value {
            self.push(param, quantity, v);
        }
    }
}

pub fn ensure_dir(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    // create_dir_all succeeds on read-only existing dirs; probe for writes
    let probe = dir.join(".nhbp-write-probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(probe)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(io::Error::other)?;
    s.push('\n');
    std::fs::write(path, s)
}

pub fn file_names(files: &[PathBuf]) -> Vec<String> {
    files
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Style {
    Dots,
    Line,
    Dashed,
}

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    /// NaN y breaks a line.
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: (f64, f64, f64, f64) = (60.0, 20.0, 40.0, 50.0); // left, right, top, bottom

fn extent(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(s: &mut String, title: &str, xl: &str, yl: &str, x: (f64, f64), y: (f64, f64)) {
    let (l, r, t, b) = M;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - l - r,
        H - t - b
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, t - 14.0, esc(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, esc(xl));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(yl)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = l + f * (W - l - r);
        let py = H - b - f * (H - t - b);
        let _ = writeln!(s, r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#, H - b + 16.0, tick(x.0 + f * (x.1 - x.0)));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, py + 4.0, tick(y.0 + f * (y.1 - y.0)));
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(plot: &Plot) -> String {
    let all = || plot.series.iter().flat_map(|s| s.points.iter());
    let x = extent(all().map(|p| p.0));
    let y = extent(all().map(|p| p.1));
    let y = (y.0.min(0.0), y.1 + 0.05 * (y.1 - y.0));
    let (l, r, t, b) = M;
    let px = |v: f64| l + (v - x.0) / (x.1 - x.0) * (W - l - r);
    let py = |v: f64| H - b - (v - y.0) / (y.1 - y.0) * (H - t - b);
    let mut s = String::new();
    frame(&mut s, &plot.title, &plot.x_label, &plot.y_label, x, y);
    for (k, se) in plot.series.iter().enumerate() {
        match se.style {
            Style::Dots => {
                let _ = writeln!(s, r#"<g fill="{}">"#, se.color);
                for &(a, c) in se.points.iter().filter(|p| p.1.is_finite()) {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.2"/>"#, px(a), py(c));
                }
                s.push_str("</g>\n");
            }
            Style::Line | Style::Dashed => {
                let dash = if se.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                for run in se.points.split(|p| !p.1.is_finite()).filter(|r| !r.is_empty()) {
                    let pts: Vec<String> = run.iter().map(|&(a, c)| format!("{:.2},{:.2}", px(a), py(c))).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                        se.color,
                        pts.join(" ")
                    );
                }
            }
        }
        let ly = t + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{}" text-anchor="end">{}</text>"#,
            W - r - 6.0,
            se.color,
            esc(&se.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Cell map; `labels[i][j]` at (y[i], x[j]).
pub fn heatmap(title: &str, x_label: &str, y_label: &str, x: &[f64], y: &[f64], labels: &[Vec<u8>]) -> String {
    const PALETTE: [&str; 7] = ["#ffffff", "#f4a259", "#8ecae6", "#f4a259", "#219ebc", "#bc4b51", "#023047"];
    let xe = extent(x.iter().copied());
    let ye = extent(y.iter().copied());
    let (l, r, t, b) = M;
    let cw = (W - l - r) / x.len().max(1) as f64;
    let ch = (H - t - b) / y.len().max(1) as f64;
    let mut s = String::new();
    frame(&mut s, title, x_label, y_label, xe, ye);
    for (i, row) in labels.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{v}</title></rect>"#,
                l + j as f64 * cw,
                H - b - (i + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                PALETTE[(v as usize).min(PALETTE.len() - 1)]
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
