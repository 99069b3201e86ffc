//! Self-contained SVG line plots and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#7d3c98"];

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, xl: &str, yl: &str, xr: (f64, f64), yr: (f64, f64)) {
    let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN / 2.0, MARGIN / 1.5);
    writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 14.0, escape(xl)).unwrap();
    writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0, escape(yl)).unwrap();
    for (v, x) in [(xr.0, x0), (xr.1, x1)] {
        writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{v:.3e}</text>"#, y0 + 16.0).unwrap();
    }
    for (v, y) in [(yr.0, y0), (yr.1, y1)] {
        writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3e}</text>"#, x0 - 4.0).unwrap();
    }
}

/// Line plot of named series of (x, y) points.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let xr = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let yr = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (W - 1.5 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (H - MARGIN - MARGIN / 1.5);
    let mut s = header(title);
    axes(&mut s, xlabel, ylabel, xr, yr);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, (x, y)) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).enumerate() {
            write!(d, "{}{:.2} {:.2} ", if j == 0 { "M" } else { "L" }, sx(*x), sy(*y)).unwrap();
        }
        writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end()).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - 160.0, 44.0 + 16.0 * i as f64, escape(name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of a square grid over [lo, hi]²; `None` cells are left blank.
pub fn heatmap(title: &str, grid: &[Vec<Option<f64>>], lo: f64, hi: f64, marker: Option<(f64, f64)>) -> String {
    let n = grid.len();
    // log scale: φ spans orders of magnitude near the diagonal
    let logs: Vec<Vec<Option<f64>>> = grid.iter().map(|r| r.iter().map(|v| v.filter(|x| *x > 0.0).map(f64::ln)).collect()).collect();
    let (vmin, vmax) = bounds(logs.iter().flatten().flatten().copied());
    let side = H - MARGIN - MARGIN / 1.5;
    let cell = side / n as f64;
    let mut s = header(title);
    axes(&mut s, "first center", "second center", (lo, hi), (lo, hi));
    for (i, row) in logs.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                let t = (v - vmin) / (vmax - vmin);
                let (r, g, b) = ((255.0 * t) as u8, (80.0 + 100.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8, (255.0 * (1.0 - t)) as u8);
                writeln!(
                    s,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                    MARGIN + i as f64 * cell,
                    H - MARGIN - (j + 1) as f64 * cell,
                    cell + 0.05,
                    cell + 0.05
                )
                .unwrap();
            }
        }
    }
    if let Some((a, b)) = marker {
        let cx = MARGIN + (a - lo) / (hi - lo) * side;
        let cy = H - MARGIN - (b - lo) / (hi - lo) * side;
        writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="none" stroke="black" stroke-width="2"/>"#).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
