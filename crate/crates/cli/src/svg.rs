//! Plain SVG line charts for decay curves.

use std::fmt::Write;

use semrich::rational::to_f64;

use crate::decay::DecayReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per base source and a dashed line at the weighted average.
pub fn decay_svg(report: &DecayReport) -> String {
    let max_x = report
        .curves
        .iter()
        .flat_map(|c| c.steps.iter().map(|s| s.added))
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let max_y = report
        .curves
        .iter()
        .flat_map(|c| c.steps.iter().map(|s| to_f64(&s.g)))
        .chain([to_f64(&report.weighted_average)])
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.05;
    let x = |v: f64| MARGIN + v / max_x * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v / max_y * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (x(0.0), y(0.0), x(max_x), y(max_y));
    let _ = writeln!(out, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}" stroke="black"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">entities added</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.1}" font-size="12" transform="rotate(-90 15 {:.1})" text-anchor="middle">G</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(out, r#"<text x="{x0:.1}" y="{:.1}" font-size="10" text-anchor="middle">0</text>"#, y0 + 14.0);
    let _ = writeln!(out, r#"<text x="{x1:.1}" y="{:.1}" font-size="10" text-anchor="middle">{max_x}</text>"#, y0 + 14.0);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{y1:.1}" font-size="10" text-anchor="end">{:.2}</text>"#, x0 - 4.0, max_y);

    let avg = y(to_f64(&report.weighted_average));
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.1}" y1="{avg:.1}" x2="{x1:.1}" y2="{avg:.1}" stroke="gray" stroke-dasharray="6 4"/>"#
    );
    for (i, curve) in report.curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = curve
            .steps
            .iter()
            .map(|s| format!("{:.1},{:.1}", x(s.added as f64), y(to_f64(&s.g))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&curve.base)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 12.0 * i as f64,
            escape(&curve.base)
        );
    }
    out.push_str("</svg>\n");
    out
}
