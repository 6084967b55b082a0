use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::rate::{fit_slope, RateReport, RateStatus};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Svg,
}

/// Writes the report to `path` and returns the files written.
///
/// CSV columns are `epsilon, sup_error, scheme_error, pass`, one row per rung by decreasing eps.
/// The SVG is a log-log scatter with one marker per row, the fitted line and a slope-one
/// reference line; a report without rows yields no SVG.
pub fn emit_report<T: Real>(report: &RateReport<T>, format: ReportFormat, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    match format {
        ReportFormat::Csv => {
            write_csv(report, path)?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Svg if report.rows.is_empty() => Ok(Vec::new()),
        ReportFormat::Svg => {
            std::fs::write(path, svg(report)).map_err(|e| Error::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

fn write_csv<T: Real>(report: &RateReport<T>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["epsilon", "sup_error", "scheme_error", "pass"])?;
    let mut rows: Vec<_> = report.rows.iter().collect();
    rows.sort_by_key(|r| r.eps_recip);
    for r in rows {
        w.write_record([
            r.eps.to_f64_lossy().to_string(),
            r.sup_error.to_f64_lossy().to_string(),
            r.scheme_error.to_f64_lossy().to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

fn svg<T: Real>(report: &RateReport<T>) -> String {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.eps > T::zero() && r.sup_error > T::zero())
        .map(|r| (r.eps.to_f64_lossy().log10(), r.sup_error.to_f64_lossy().log10()))
        .collect();
    let (slope, intercept) = match report.status {
        RateStatus::Fitted { slope, intercept, .. } => (slope.to_f64_lossy(), intercept.to_f64_lossy() / std::f64::consts::LN_10),
        RateStatus::Inconclusive { .. } => {
            let raw: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (10f64.powf(x), 10f64.powf(y))).collect();
            match fit_slope(&raw) {
                Ok((s, i, _)) => (s, i / std::f64::consts::LN_10),
                Err(_) => (0.0, pts.iter().map(|p| p.1).sum::<f64>() / pts.len().max(1) as f64),
            }
        }
    };
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let anchor = pts.first().copied().unwrap_or((0.0, 0.0));
    let fit = [(x0, intercept + slope * x0), (x1, intercept + slope * x1)];
    let reference = [(x0, anchor.1 + (x0 - anchor.0)), (x1, anchor.1 + (x1 - anchor.0))];
    let (y0, y1) = bounds(pts.iter().map(|p| p.1).chain(fit.iter().map(|p| p.1)).chain(reference.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let line = |p: &[(f64, f64)]| p.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect::<Vec<_>>().join(" ");

    let mut s = String::new();
    let _ = writeln!(s, r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##);
    let _ = writeln!(s, r##"<title>{}: log10 sup error against log10 eps</title>"##, escape(&report.model_id));
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(s, r##"<polyline class="fit" points="{}" fill="none" stroke="#c03020" stroke-width="1.5"/>"##, line(&fit));
    let _ = writeln!(
        s,
        r##"<polyline class="reference" points="{}" fill="none" stroke="#555" stroke-dasharray="4 3"/>"##,
        line(&reference)
    );
    for &(x, y) in &pts {
        let _ = writeln!(s, r##"<circle class="marker" cx="{:.3}" cy="{:.3}" r="3.5" fill="#2050b0"/>"##, sx(x), sy(y));
    }
    let _ = writeln!(
        s,
        r##"<text x="{MARGIN}" y="{:.1}" font-size="12" font-family="sans-serif">slope {slope:.3}; dashed: slope 1</text>"##,
        MARGIN - 12.0
    );
    s.push_str("</svg>\n");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
