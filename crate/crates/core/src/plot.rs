//! Minimal SVG line plot for the averaged learning curve.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

/// Renders `(t, value)` points with values on a fixed `[0, 1]` axis.
pub fn render_curve_svg(curve: &[(usize, f64)], title: &str) -> String {
    let t_max = curve.last().map(|&(t, _)| t.max(1)).unwrap_or(1) as f64;
    let px = |t: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * t as f64 / t_max;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v.clamp(0.0, 1.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" stroke="black" fill="none"/>"#,
        x0 = MARGIN,
        x1 = WIDTH - MARGIN,
        y0 = HEIGHT - MARGIN,
        y1 = MARGIN
    );
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{tick:.1}</text>"#,
            MARGIN - 6.0,
            py(tick) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">t = {}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 18.0,
        t_max as usize
    );
    let points = curve
        .iter()
        .map(|&(t, v)| format!("{:.2},{:.2}", px(t), py(v)))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(
        svg,
        r##"<polyline points="{points}" stroke="#1f77b4" stroke-width="1.5" fill="none"/>"##
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline() {
        let svg = render_curve_svg(&[(0, 0.5), (1, 0.75), (2, 1.0)], "a < b");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("a &lt; b"));
    }
}
