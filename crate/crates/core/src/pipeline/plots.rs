//! Minimal static SVG charts for the report stage.

use std::fmt::Write as _;

use super::HASH_PREFIX;

/// One named polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 160.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(out: &mut String, width: f64, height: f64, title: &str, hash: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(out, "<!-- {HASH_PREFIX}{hash} -->");
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        width / 2.0,
        escape(title)
    );
}

/// One panel per series, stacked vertically, each with its own y range so
/// losses of different magnitude stay readable.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series], hash: &str) -> String {
    let width = PANEL_W + 2.0 * MARGIN;
    let panel_total = PANEL_H + MARGIN;
    let height = 32.0 + panel_total * series.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, width, height, title, hash);
    for (i, s) in series.iter().enumerate() {
        let top = 32.0 + i as f64 * panel_total;
        let (x0, x1) = range(s.points.iter().map(|p| p.0));
        let (y0, y1) = range(s.points.iter().map(|p| p.1));
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * PANEL_W;
        let sy = |y: f64| top + PANEL_H - (y - y0) / (y1 - y0) * PANEL_H;
        let _ = writeln!(
            out,
            "<rect x=\"{MARGIN:.1}\" y=\"{top:.1}\" width=\"{PANEL_W:.1}\" height=\"{PANEL_H:.1}\" \
             fill=\"none\" stroke=\"#888\"/>"
        );
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", MARGIN + 4.0, top + 14.0, escape(&s.name));
        let _ = writeln!(
            out,
            "<text x=\"4\" y=\"{:.1}\">{y1:.3}</text><text x=\"4\" y=\"{:.1}\">{y0:.3}</text>",
            top + 10.0,
            top + PANEL_H
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{} ({x0:.0} to {x1:.0}); {}</text>",
            MARGIN + PANEL_W / 2.0,
            top + PANEL_H + 16.0,
            escape(x_label),
            escape(y_label)
        );
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            COLORS[i % COLORS.len()],
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bars on a fixed `[-1, 1]` axis, which covers every kappa value.
pub fn bar_chart_svg(title: &str, bars: &[(String, f64)], hash: &str) -> String {
    let width = PANEL_W + 2.0 * MARGIN;
    let height = 32.0 + PANEL_H * 2.0 + MARGIN;
    let mut out = String::new();
    header(&mut out, width, height, title, hash);
    let (top, plot_h) = (32.0, PANEL_H * 2.0);
    let zero = top + plot_h / 2.0;
    let _ = writeln!(
        out,
        "<line x1=\"{MARGIN:.1}\" y1=\"{zero:.1}\" x2=\"{:.1}\" y2=\"{zero:.1}\" stroke=\"#888\"/>",
        MARGIN + PANEL_W
    );
    let slot = PANEL_W / bars.len().max(1) as f64;
    for (i, (name, v)) in bars.iter().enumerate() {
        let v = v.clamp(-1.0, 1.0);
        let h = v.abs() * plot_h / 2.0;
        let x = MARGIN + i as f64 * slot + slot * 0.15;
        let y = if v >= 0.0 { zero - h } else { zero };
        let _ = writeln!(
            out,
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{h:.1}\" fill=\"{}\"/>",
            slot * 0.7,
            COLORS[i % COLORS.len()]
        );
        let cx = x + slot * 0.35;
        let _ = writeln!(
            out,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{v:.3}</text>",
            if v >= 0.0 { y - 4.0 } else { y + h + 12.0 }
        );
        let _ = writeln!(
            out,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            top + plot_h + 16.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
