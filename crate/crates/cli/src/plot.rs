//! Minimal SVG line plots for series CSVs.

use std::fmt::Write;

use anyhow::{bail, Context, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

/// Reads the first two numeric columns of a CSV, skipping comments, the
/// header and rows with an empty field.
pub fn read_series(text: &str) -> Result<(String, String, Vec<(f64, f64)>)> {
    let mut labels = None;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            bail!("line {}: need at least two columns", i + 1);
        }
        if labels.is_none() {
            labels = Some((fields[0].to_string(), fields[1].to_string()));
            continue;
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            continue;
        }
        let x: f64 = fields[0].parse().with_context(|| format!("line {}: bad x", i + 1))?;
        let y: f64 = fields[1].parse().with_context(|| format!("line {}: bad y", i + 1))?;
        pts.push((x, y));
    }
    let (xl, yl) = labels.context("empty series")?;
    Ok((xl, yl, pts))
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders `pts` as a polyline with axes. With `loglog` both axes are
/// logarithmic and non-positive points are dropped.
pub fn line_svg(pts: &[(f64, f64)], x_label: &str, y_label: &str, loglog: bool) -> Result<String> {
    let tf = |v: f64| if loglog { v.log10() } else { v };
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| !loglog || (p.0 > 0.0 && p.1 > 0.0))
        .map(|&(x, y)| (tf(x), tf(y)))
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    if pts.is_empty() {
        bail!("no plottable points");
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let label = |v: f64| if loglog { fmt_tick(10f64.powf(v)) } else { fmt_tick(v) };
    for t in nice_ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">{}</text>"#,
            label(t),
            b = H - MARGIN,
            b2 = H - MARGIN + 5.0,
            ty = H - MARGIN + 18.0
        );
    }
    for t in nice_ticks(y0, y1) {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{l2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{}</text>"#,
            label(t),
            l = MARGIN,
            l2 = MARGIN - 5.0,
            tx = MARGIN - 8.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        path.join(" ")
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 2000.0);
        assert_eq!(t.first(), Some(&0.0));
        assert_eq!(t.last(), Some(&2000.0));
        assert!(t.len() <= 7);
    }

    #[test]
    fn svg_has_one_polyline() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, (k * k) as f64)).collect();
        let svg = line_svg(&pts, "t", "count", true).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(line_svg(&[(0.0, 1.0)], "t", "n", true).is_err());
    }

    #[test]
    fn series_skips_comments_and_gaps() {
        let (x, y, pts) = read_series("# manifest\nt,h\n1,2\n2,\n3,4\n").unwrap();
        assert_eq!((x.as_str(), y.as_str()), ("t", "h"));
        assert_eq!(pts, vec![(1.0, 2.0), (3.0, 4.0)]);
    }
}
