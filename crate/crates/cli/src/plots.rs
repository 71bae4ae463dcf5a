//! Static SVG renderings of the correlation matrix, the PCA scree and the
//! residuals-versus-fitted scatter.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::CliError;
use crate::report::{read_column, read_corr_csv, read_pca_ratios};

pub const HEATMAP_FILE: &str = "corr_heatmap.svg";
pub const SCREE_FILE: &str = "pca_scree.svg";
pub const SCATTER_FILE: &str = "residuals_fitted.svg";

const MAX_POINTS: usize = 5000;
/// Drawable height of the scree plot, in pixels.
pub const SCREE_HEIGHT: f64 = 300.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Blue for negative, red for positive, white at zero.
pub fn diverging_color(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0).abs();
    let (r, g, b) = if v >= 0.0 { (178.0, 24.0, 43.0) } else { (33.0, 102.0, 172.0) };
    let mix = |c: f64| (255.0 + t * (c - 255.0)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(r), mix(g), mix(b))
}

pub fn render_heatmap(names: &[String], corr: &Array2<f64>) -> String {
    let k = names.len();
    let cell = 56.0;
    let (left, top) = (140.0, 140.0);
    let size = cell * k as f64;
    let (w, h) = (left + size + 20.0, top + size + 20.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for i in 0..k {
        for j in 0..k {
            let v = corr[[i, j]];
            let (x, y) = (left + j as f64 * cell, top + i as f64 * cell);
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{}" stroke="#ffffff"><title>{} / {}: {v:.4}</title></rect>"##,
                diverging_color(v),
                escape(&names[i]),
                escape(&names[j])
            );
            let ink = if v.abs() > 0.6 { "white" } else { "black" };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{v:.2}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            left - 6.0,
            top + (i as f64 + 0.5) * cell,
            escape(&names[i])
        );
        let (cx, cy) = (left + (i as f64 + 0.5) * cell, top - 6.0);
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{cy}" transform="rotate(-45 {cx} {cy})">{}</text>"#,
            escape(&names[i])
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_scree(ratios: &[(String, f64)]) -> String {
    let bar = 40.0;
    let gap = 12.0;
    let (left, top, bottom) = (60.0, 30.0, 40.0);
    let w = left + ratios.len() as f64 * (bar + gap) + 20.0;
    let h = top + SCREE_HEIGHT + bottom;
    let base = top + SCREE_HEIGHT;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{base}" stroke="#333"/>"##);
    let _ = writeln!(s, r##"<line x1="{left}" y1="{base}" x2="{}" y2="{base}" stroke="#333"/>"##, w - 10.0);
    for (label, frac) in [("1.0", 1.0), ("0.5", 0.5), ("0.0", 0.0)] {
        let y = base - frac * SCREE_HEIGHT;
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{label}</text>"#, left - 6.0);
    }
    for (i, (name, ratio)) in ratios.iter().enumerate() {
        let height = ratio.max(0.0) * SCREE_HEIGHT;
        let x = left + gap / 2.0 + i as f64 * (bar + gap);
        let _ = writeln!(
            s,
            r##"<rect class="bar" x="{x}" y="{}" width="{bar}" height="{height}" fill="#4a7ab5"><title>{}: {ratio:.4}</title></rect>"##,
            base - height,
            escape(name)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, x + bar / 2.0, base + 16.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

pub fn render_scatter(fitted: &[f64], residuals: &[f64]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 20.0, 20.0, 40.0);
    let stride = fitted.len().div_ceil(MAX_POINTS).max(1);
    let (x0, x1) = padded_range(fitted.iter().copied());
    let (r0, r1) = padded_range(residuals.iter().copied());
    // keep zero inside the vertical range
    let (y0, y1) = (r0.min(-1e-9), r1.max(1e-9));
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        w - left - right,
        h - top - bottom
    );
    let zero = sy(0.0);
    let _ = writeln!(s, r##"<line class="zero" x1="{left}" y1="{zero:.2}" x2="{}" y2="{zero:.2}" stroke="#c0392b" stroke-dasharray="4 3"/>"##, w - right);
    for i in (0..fitted.len()).step_by(stride) {
        let _ = writeln!(
            s,
            r##"<circle class="pt" cx="{:.2}" cy="{:.2}" r="2" fill="#1f4e79" fill-opacity="0.5"/>"##,
            sx(fitted[i]),
            sy(residuals[i])
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">fitted</text>"#, (left + w - right) / 2.0, h - 10.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">residual</text>"#, h / 2.0, h / 2.0);
    s.push_str("</svg>\n");
    s
}

fn read_input(dir: &Path, name: &str) -> Result<String, CliError> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|_| CliError::Data(format!("missing input: {}", path.display())))
}

/// Renders the three SVG files from the CSVs of a finished run.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let bad = |e: String| CliError::Data(e);
    let (names, corr) = read_corr_csv(&read_input(dir, "corr.csv")?).map_err(bad)?;
    let ratios = read_pca_ratios(&read_input(dir, "pca.csv")?).map_err(bad)?;
    let resid = read_column(&read_input(dir, "residuals.csv")?, "u").map_err(bad)?;
    let fitted = read_column(&read_input(dir, "fitted.csv")?, "g_hat").map_err(bad)?;
    if resid.len() != fitted.len() {
        return Err(CliError::Data("residuals.csv and fitted.csv differ in length".into()));
    }
    let outputs = [
        (HEATMAP_FILE, render_heatmap(&names, &corr)),
        (SCREE_FILE, render_scree(&ratios)),
        (SCATTER_FILE, render_scatter(&fitted, &resid)),
    ];
    let mut written = Vec::new();
    for (name, svg) in outputs {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(CliError::io(&path))?;
        written.push(path);
    }
    Ok(written)
}
