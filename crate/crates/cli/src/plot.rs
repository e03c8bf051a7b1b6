//! Standalone log-log line charts in SVG.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 84.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 64.0;

fn decades(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (mut lo, mut hi) = (lo.log10().floor(), hi.log10().ceil());
    if hi <= lo {
        lo -= 1.0;
        hi += 1.0;
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Chart of `points` on log axes. `None` with fewer than two positive points.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> Option<String> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
    if pts.len() < 2 {
        return None;
    }
    let (x0, x1) = decades(pts.iter().map(|p| p.0));
    let (y0, y1) = decades(pts.iter().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y.log10() - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    for d in (x0 as i32)..=(x1 as i32) {
        let x = LEFT + (d as f64 - x0) / (x1 - x0) * pw;
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, TOP + ph + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = TOP + (1.0 - (d as f64 - y0) / (y1 - y0)) * ph;
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="2"/>"##, line.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f5fa8"/>"##, sx(x), sy(y));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_has_no_chart() {
        assert!(loglog_svg("t", "x", "y", &[(1.0, 2.0)]).is_none());
        assert!(loglog_svg("t", "x", "y", &[(1.0, 2.0), (0.0, 1.0)]).is_none());
    }

    #[test]
    fn chart_is_deterministic() {
        let pts = [(1e-3, 1.0), (1e-2, 10.0), (1e-1, 100.0)];
        let a = loglog_svg("L <sweep>", "length (m)", "rate (1/s)", &pts).unwrap();
        assert_eq!(a, loglog_svg("L <sweep>", "length (m)", "rate (1/s)", &pts).unwrap());
        assert!(a.starts_with("<svg") && a.contains("&lt;sweep&gt;"));
        assert_eq!(a.matches("<circle").count(), 3);
    }
}
