//! Static SVG overlay of the empirical and theoretical rate curves.
//!
//! Each series carries its raw `(t, rate)` pairs in a `data-points`
//! attribute, formatted exactly as in the CSV.

use std::fmt::Write as _;

use mdp_core::RateRow;

use crate::config::fmt_num;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

pub fn rate_curve_svg(rows: &[RateRow], title: &str) -> String {
    let empirical: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.empirical_rate.is_finite())
        .map(|r| (r.t, r.empirical_rate))
        .collect();
    let theoretical: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.theoretical_rate)).collect();

    let t_max = rows.iter().map(|r| r.t).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let y_max = empirical
        .iter()
        .chain(&theoretical)
        .map(|p| p.1)
        .filter(|y| y.is_finite())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
        * 1.05;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |t: f64| MARGIN_LEFT + t / t_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - y / y_max * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // axes
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black"><line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN_TOP}"/></g>"#,
        x0 + plot_w
    );
    for i in 0..=5 {
        let t = t_max * i as f64 / 5.0;
        let y = y_max * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(t),
            y0 + 18.0,
            tick(t)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            sy(y) + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">rate</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (name, color, pts) in [("empirical", "blue", &empirical), ("theoretical", "red", &theoretical)] {
        let screen = pts
            .iter()
            .map(|&(t, y)| format!("{:.2},{:.2}", sx(t), sy(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let data = pts
            .iter()
            .map(|&(t, y)| format!("{},{}", fmt_num(t), fmt_num(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-series="{name}" data-points="{data}" points="{screen}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
    }

    // legend
    let lx = MARGIN_LEFT + 15.0;
    let ly = MARGIN_TOP + 10.0;
    let _ = writeln!(
        out,
        r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="blue" stroke-width="1.5"/><text x="{}" y="{}">empirical rate</text><line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-width="1.5"/><text x="{}" y="{}">theoretical rate</text></g>"#,
        lx + 25.0,
        lx + 30.0,
        ly + 4.0,
        ly + 18.0,
        lx + 25.0,
        ly + 18.0,
        lx + 30.0,
        ly + 22.0
    );
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
