//! Deterministic SVG rendering: per-trace channel panels and the
//! per-table grouped bar chart. Pure string building, no rendering
//! dependencies, so identical inputs yield byte-identical files.

use std::fmt::Write as _;

use slipdet_core::eval::PerformanceTable;
use slipdet_core::nnets::NetworkKind;

const CHANNEL_COLORS: [&str; 3] = ["#d62728", "#2ca02c", "#1f77b4"];
const NET_COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
const FRAME_COLOR: &str = "#444";
const GRID_COLOR: &str = "#ddd";

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        if lo == hi {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.05 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, px_lo: f64, px_hi: f64) -> f64 {
        px_lo + (v - self.lo) / (self.hi - self.lo) * (px_hi - px_lo)
    }
}

fn line(out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, color: &str) {
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}"/>"##,
        fmt2(x1),
        fmt2(y1),
        fmt2(x2),
        fmt2(y2)
    );
}

fn rect(out: &mut String, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
    let style = match stroke {
        Some(s) => format!(r##"fill="{fill}" stroke="{s}""##),
        None => format!(r##"fill="{fill}""##),
    };
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" {style}/>"##,
        fmt2(x),
        fmt2(y),
        fmt2(w),
        fmt2(h)
    );
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str) {
    let _ = write!(
        out,
        r##"<polyline fill="none" stroke="{color}" stroke-width="1.2" points=""##
    );
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{},{}", fmt2(*x), fmt2(*y));
    }
    out.push_str("\"/>\n");
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, size: u32, body: &str) {
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="{anchor}" font-family="monospace" font-size="{size}">{body}</text>"##,
        fmt2(x),
        fmt2(y)
    );
}

fn text_rotated(out: &mut String, x: f64, y: f64, body: &str) {
    let _ = writeln!(
        out,
        r##"<text x="{x}" y="{y}" text-anchor="middle" font-family="monospace" font-size="11" transform="rotate(-90 {x} {y})">{body}</text>"##,
        x = fmt2(x),
        y = fmt2(y)
    );
}

/// One panel: frame, 5 ticks per axis, three channel polylines with a
/// small legend above the frame.
#[allow(clippy::too_many_arguments)]
fn channel_panel(
    out: &mut String,
    t: &[f64],
    channels: [&[f64]; 3],
    labels: [&str; 3],
    y_label: &str,
    top: f64,
    bottom: f64,
    left: f64,
    right: f64,
) {
    let x_axis = Axis::fit(t.iter().copied());
    let y_axis = Axis::fit(channels.iter().flat_map(|c| c.iter().copied()));
    rect(out, left, top, right - left, bottom - top, "none", Some(FRAME_COLOR));
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_axis.lo + f * (x_axis.hi - x_axis.lo);
        let xp = x_axis.map(xv, left, right);
        line(out, xp, bottom, xp, bottom + 4.0, FRAME_COLOR);
        text(out, xp, bottom + 16.0, "middle", 10, &fmt2(xv));
        let yv = y_axis.lo + f * (y_axis.hi - y_axis.lo);
        let yp = y_axis.map(yv, bottom, top);
        line(out, left - 4.0, yp, left, yp, FRAME_COLOR);
        text(out, left - 8.0, yp + 3.0, "end", 10, &fmt2(yv));
    }
    text(out, (left + right) / 2.0, bottom + 32.0, "middle", 11, "time (s)");
    text_rotated(out, left - 46.0, (top + bottom) / 2.0, y_label);
    for (c, series) in channels.iter().enumerate() {
        let pts: Vec<(f64, f64)> = t
            .iter()
            .zip(series.iter())
            .map(|(&tv, &v)| (x_axis.map(tv, left, right), y_axis.map(v, bottom, top)))
            .collect();
        polyline(out, &pts, CHANNEL_COLORS[c]);
        let lx = left + 10.0 + 110.0 * c as f64;
        line(out, lx, top - 8.0, lx + 18.0, top - 8.0, CHANNEL_COLORS[c]);
        text(out, lx + 24.0, top - 4.0, "start", 10, labels[c]);
    }
}

/// Two stacked panels: acceleration channels on top, orientation below.
pub fn trace_svg(title: &str, t: &[f64], accel: &[[f64; 3]], orient: &[[f64; 3]]) -> String {
    let (w, h) = (860.0, 620.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="white"/>"##);
    text(&mut out, w / 2.0, 24.0, "middle", 14, title);
    let split = |src: &[[f64; 3]]| -> [Vec<f64>; 3] {
        [
            src.iter().map(|v| v[0]).collect(),
            src.iter().map(|v| v[1]).collect(),
            src.iter().map(|v| v[2]).collect(),
        ]
    };
    let a = split(accel);
    let o = split(orient);
    channel_panel(
        &mut out,
        t,
        [&a[0], &a[1], &a[2]],
        ["ax", "ay", "az"],
        "acceleration (m/s^2)",
        60.0,
        280.0,
        70.0,
        830.0,
    );
    channel_panel(
        &mut out,
        t,
        [&o[0], &o[1], &o[2]],
        ["azimuth", "pitch", "roll"],
        "orientation (degrees)",
        360.0,
        580.0,
        70.0,
        830.0,
    );
    out.push_str("</svg>\n");
    out
}

/// Grouped bar chart of the 15 x 4 accuracy table.
pub fn table_svg(table: &PerformanceTable) -> slipdet_core::Result<String> {
    if table.entries.is_empty() {
        return Err(slipdet_core::Error::InvalidArgument("empty table".into()));
    }
    let (w, h) = (900.0, 520.0);
    let (left, right, top, bottom) = (60.0, 880.0, 50.0, 440.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="white"/>"##);
    text(&mut out, w / 2.0, 24.0, "middle", 14, "pairwise accuracy (%)");
    for k in 0..=5 {
        let yv = 20.0 * k as f64;
        let yp = bottom - yv / 100.0 * (bottom - top);
        line(&mut out, left, yp, right, yp, GRID_COLOR);
        text(&mut out, left - 8.0, yp + 3.0, "end", 10, &fmt2(yv));
    }
    let group_w = (right - left) / table.entries.len() as f64;
    let bar_w = group_w / 5.0;
    for (i, row) in table.entries.iter().enumerate() {
        let gx = left + i as f64 * group_w;
        for (k, &v) in row.iter().enumerate() {
            let bh = v / 100.0 * (bottom - top);
            rect(&mut out, gx + bar_w * (0.5 + k as f64), bottom - bh, bar_w, bh, NET_COLORS[k], None);
        }
        text(&mut out, gx + group_w / 2.0, bottom + 16.0, "middle", 10, &table.pair_name(i));
    }
    line(&mut out, left, bottom, right, bottom, FRAME_COLOR);
    for (k, kind) in NetworkKind::ALL.into_iter().enumerate() {
        let lx = left + 30.0 + 180.0 * k as f64;
        rect(&mut out, lx, top - 22.0, 14.0, 10.0, NET_COLORS[k], None);
        text(&mut out, lx + 20.0, top - 13.0, "start", 11, &kind.to_string());
    }
    text(&mut out, (left + right) / 2.0, bottom + 34.0, "middle", 11, "case pair");
    out.push_str("</svg>\n");
    Ok(out)
}
