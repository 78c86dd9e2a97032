//! Self-contained SVG figures. Output depends only on the input data, so
//! the same record always renders to the same bytes.

use std::fmt::Write as _;

use crate::experiment::{SeparationRecord, TimeSeriesRecord};
use crate::summary::BoxSummary;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const NULL_COLOR: &str = "#4c72b0";
const ALT_COLOR: &str = "#dd8452";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YScale {
    Linear,
    /// `sign(y) · log10(1 + |y|)`: logarithmic away from zero, defined for
    /// negative values too.
    SymLog,
}

impl YScale {
    fn forward(self, y: f64) -> f64 {
        match self {
            YScale::Linear => y,
            YScale::SymLog => y.signum() * (1.0 + y.abs()).log10(),
        }
    }
}

struct Canvas {
    out: String,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        Canvas {
            out,
            left: 70.0,
            right: WIDTH - 20.0,
            top: 40.0,
            bottom: HEIGHT - 50.0,
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (self.bottom - self.top)
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, style: &str) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {style}/>"#,
            c(x0),
            c(y0),
            c(x1),
            c(y1)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, extra: &str, s: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{}" y="{}" text-anchor="{anchor}"{extra}>{}</text>"#,
            c(x),
            c(y),
            escape(s)
        );
    }

    /// Frame, ticks (positions in data space of the transformed axis) and labels.
    fn axes(&mut self, xticks: &[(f64, String)], yticks: &[(f64, String)], labels: [&str; 3]) {
        let [title, xlabel, ylabel] = labels;
        let (l, r, t, b) = (self.left, self.right, self.top, self.bottom);
        let _ = writeln!(
            self.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            c(l),
            c(t),
            c(r - l),
            c(b - t)
        );
        for (x, s) in xticks {
            let px = self.px(*x);
            self.line(px, b, px, b + 5.0, r#"stroke="black""#);
            self.text(px, b + 18.0, "middle", "", s);
        }
        for (y, s) in yticks {
            let py = self.py(*y);
            self.line(l - 5.0, py, l, py, r#"stroke="black""#);
            self.line(l, py, r, py, r##"stroke="#dddddd""##);
            self.text(l - 8.0, py + 4.0, "end", "", s);
        }
        self.text((l + r) / 2.0, 24.0, "middle", r#" font-size="15""#, title);
        self.text((l + r) / 2.0, HEIGHT - 12.0, "middle", "", xlabel);
        let _ = writeln!(
            self.out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            c((t + b) / 2.0),
            c((t + b) / 2.0),
            escape(ylabel)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn c(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Roughly `count` evenly spaced round values covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / count.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|i| i as f64 * step).collect()
}

fn symlog_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = vec![0.0];
    let mut v = 1.0;
    while v <= 1e12 {
        for s in [-v, v] {
            if s >= lo && s <= hi {
                ticks.push(s);
            }
        }
        v *= 10.0;
    }
    ticks.sort_by(f64::total_cmp);
    ticks
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// `D_n` against `n`, with a vertical marker at every step that created a
/// cross-community edge.
pub fn timeseries_svg(rec: &TimeSeriesRecord) -> String {
    let xr = range(rec.rows.iter().map(|r| r.n as f64));
    let yr = range(rec.rows.iter().map(|r| r.d_n));
    let (xr, yr) = if rec.rows.is_empty() {
        ((0.0, 1.0), (0.0, 1.0))
    } else {
        (xr, (yr.0.min(0.0), yr.1))
    };
    let mut cv = Canvas::new(xr, yr);
    let xt: Vec<_> = nice_ticks(cv.x.0, cv.x.1, 8)
        .into_iter()
        .map(|v| (v, tick_label(v)))
        .collect();
    let yt: Vec<_> = nice_ticks(cv.y.0, cv.y.1, 6)
        .into_iter()
        .map(|v| (v, tick_label(v)))
        .collect();
    cv.axes(&xt, &yt, ["Distance between consecutive snapshots", "n", "D_n"]);

    for r in rec.rows.iter().filter(|r| r.cross_edge_event) {
        let x = cv.px(r.n as f64);
        let (t, b) = (cv.top, cv.bottom);
        cv.line(x, t, x, b, r##"stroke="#1f77b4" stroke-width="1" opacity="0.7""##);
    }
    if !rec.rows.is_empty() {
        let pts: Vec<String> = rec
            .rows
            .iter()
            .map(|r| format!("{},{}", c(cv.px(r.n as f64)), c(cv.py(r.d_n))))
            .collect();
        let _ = writeln!(
            cv.out,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            pts.join(" ")
        );
    }
    cv.finish()
}

fn draw_box(cv: &mut Canvas, center: f64, half: f64, s: &BoxSummary, scale: YScale, color: &str) {
    let f = |v: f64| scale.forward(v);
    let (x0, x1) = (cv.px(center - half), cv.px(center + half));
    let xm = cv.px(center);
    let (ymin, yq1, ymed, yq3, ymax) = (
        cv.py(f(s.min)),
        cv.py(f(s.q1)),
        cv.py(f(s.median)),
        cv.py(f(s.q3)),
        cv.py(f(s.max)),
    );
    let stroke = format!(r#"stroke="{color}" stroke-width="1.5""#);
    cv.line(xm, ymax, xm, yq3, &stroke);
    cv.line(xm, yq1, xm, ymin, &stroke);
    let cap = (x1 - x0) / 4.0;
    cv.line(xm - cap, ymax, xm + cap, ymax, &stroke);
    cv.line(xm - cap, ymin, xm + cap, ymin, &stroke);
    let _ = writeln!(
        cv.out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}" fill-opacity="0.35" {stroke}/>"#,
        c(x0),
        c(yq3),
        c(x1 - x0),
        c((yq1 - yq3).max(0.0))
    );
    cv.line(x0, ymed, x1, ymed, r#"stroke="black" stroke-width="2""#);
}

/// Two box plots (null, alternative) per size. Boxes span the quartiles,
/// whiskers the full range.
pub fn separation_svg(records: &[SeparationRecord], scale: YScale) -> String {
    let summaries: Vec<(Option<BoxSummary>, Option<BoxSummary>)> = records
        .iter()
        .map(|r| (r.null.summary, r.alt.summary))
        .collect();
    let yr = range(
        summaries
            .iter()
            .flat_map(|(a, b)| [a, b])
            .flatten()
            .flat_map(|s| [s.min, s.max])
            .map(|v| scale.forward(v)),
    );
    let yr = if yr.0 > yr.1 { (0.0, 1.0) } else { yr };
    let k = records.len().max(1) as f64;
    let mut cv = Canvas::new((0.0, k), yr);
    cv.x = (0.0, k);
    let xt: Vec<_> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (i as f64 + 0.5, format!("n = {}", r.n)))
        .collect();
    let yt: Vec<_> = match scale {
        YScale::Linear => nice_ticks(cv.y.0, cv.y.1, 6)
            .into_iter()
            .map(|v| (v, tick_label(v)))
            .collect(),
        YScale::SymLog => {
            // Tick positions are chosen in data space, placed in axis space.
            let lo = inverse_symlog(cv.y.0);
            let hi = inverse_symlog(cv.y.1);
            symlog_ticks(lo, hi)
                .into_iter()
                .map(|v| (scale.forward(v), tick_label(v)))
                .collect()
        }
    };
    let ylabel = match scale {
        YScale::Linear => "normalized Z_n",
        YScale::SymLog => "normalized Z_n (symmetric log)",
    };
    cv.axes(&xt, &yt, ["Null vs. alternative distribution of Z_n", "", ylabel]);
    for (i, (s0, s1)) in summaries.iter().enumerate() {
        let mid = i as f64 + 0.5;
        if let Some(s) = s0 {
            draw_box(&mut cv, mid - 0.18, 0.14, s, scale, NULL_COLOR);
        }
        if let Some(s) = s1 {
            draw_box(&mut cv, mid + 0.18, 0.14, s, scale, ALT_COLOR);
        }
    }
    legend(&mut cv, &[("H0: no new cross edge", NULL_COLOR), ("H1: new cross edge", ALT_COLOR)]);
    cv.finish()
}

fn inverse_symlog(t: f64) -> f64 {
    t.signum() * (10f64.powf(t.abs()) - 1.0)
}

fn legend(cv: &mut Canvas, entries: &[(&str, &str)]) {
    let x = cv.left + 12.0;
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = cv.top + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            cv.out,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}" fill-opacity="0.6"/>"#,
            c(x),
            c(y - 10.0)
        );
        cv.text(x + 18.0, y, "start", "", label);
    }
}

/// Power and empirical level against `n`, with the nominal level dashed.
pub fn power_svg(records: &[SeparationRecord]) -> String {
    let xr = if records.is_empty() {
        (0.0, 1.0)
    } else {
        range(records.iter().map(|r| r.n as f64))
    };
    let mut cv = Canvas::new(xr, (0.0, 1.0));
    let xt: Vec<_> = records
        .iter()
        .map(|r| (r.n as f64, r.n.to_string()))
        .collect();
    let yt: Vec<_> = (0..=5)
        .map(|i| i as f64 / 5.0)
        .map(|v| (v, tick_label(v)))
        .collect();
    cv.axes(&xt, &yt, ["Rejection rate at the calibrated threshold", "n", "P(Z_n >= z_eps)"]);
    if let Some(first) = records.first() {
        let y = cv.py(first.level);
        let (l, r) = (cv.left, cv.right);
        cv.line(l, y, r, y, r#"stroke="gray" stroke-dasharray="6 4""#);
    }
    for (series, color) in [(true, ALT_COLOR), (false, NULL_COLOR)] {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .map(|r| {
                let v = if series { r.power } else { r.level_empirical };
                (cv.px(r.n as f64), cv.py(v))
            })
            .collect();
        if pts.len() > 1 {
            let joined: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", c(*x), c(*y))).collect();
            let _ = writeln!(
                cv.out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                joined.join(" ")
            );
        }
        for (x, y) in pts {
            let _ = writeln!(
                cv.out,
                r#"<circle cx="{}" cy="{}" r="4" fill="{color}"/>"#,
                c(x),
                c(y)
            );
        }
    }
    legend(&mut cv, &[("power (H1)", ALT_COLOR), ("empirical level (H0)", NULL_COLOR)]);
    cv.finish()
}

/// Square heat map of values in `[0, 1]`, e.g. renormalized resistances.
pub fn heatmap_svg(size: usize, value: impl Fn(usize, usize) -> f64, title: &str) -> String {
    let side = 400.0;
    let cell = if size == 0 { side } else { side / size as f64 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="460" height="460" viewBox="0 0 460 460" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="230" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        escape(title)
    );
    for u in 0..size {
        for v in 0..size {
            let t = value(u, v).clamp(0.0, 1.0);
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                c(30.0 + v as f64 * cell),
                c(40.0 + u as f64 * cell),
                c(cell + 0.05),
                c(cell + 0.05),
                ramp(t)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="30" y="40" width="{side}" height="{side}" fill="none" stroke="black"/>"#
    );
    out.push_str("</svg>\n");
    out
}

/// Dark blue at 0 through teal to pale yellow at 1.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 3] = [(13.0, 8.0, 135.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let (a, b, s) = if t < 0.5 {
        (STOPS[0], STOPS[1], t * 2.0)
    } else {
        (STOPS[1], STOPS[2], (t - 0.5) * 2.0)
    };
    let mix = |x: f64, y: f64| (x + (y - x) * s).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}
