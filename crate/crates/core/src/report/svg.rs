use std::fmt::Write;

use super::{ReportError, Result};
use crate::domain::{Codec, Metric, Resolution};
use crate::fit::{horner, PolyModel};
use crate::hull::{HullCurve, HullPointSet, QrCurve};

/// Points at which a fitted curve is sampled for plotting.
pub const FIT_SAMPLES: usize = 240;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

fn hue(codec: Codec) -> &'static str {
    match codec {
        Codec::H264 => "#1f77b4",
        Codec::H265 => "#d62728",
        Codec::Vp9 => "#2ca02c",
    }
}

fn dash(res: Resolution) -> &'static str {
    match (res.width, res.height) {
        (3840, 2160) => "none",
        (1920, 1080) => "8 4",
        (960, 544) => "2 4",
        _ => "10 3 2 3",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round step (1, 2 or 5 × 10^k) giving roughly `target` intervals.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = (span / target).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let m = raw / mag;
    mag * if m <= 1.0 {
        1.0
    } else if m <= 2.0 {
        2.0
    } else if m <= 5.0 {
        5.0
    } else {
        10.0
    }
}

fn rate_label(kbps: f64) -> String {
    if kbps >= 1e6 {
        format!("{}M", kbps / 1e6)
    } else if kbps >= 1e3 {
        format!("{}k", kbps / 1e3)
    } else {
        format!("{kbps}")
    }
}

/// Plot area mapping log10(kb/s) × quality onto pixels.
struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    y_step: f64,
}

impl Axes {
    fn new(log_rates: impl Iterator<Item = f64> + Clone, qualities: impl Iterator<Item = f64> + Clone) -> Self {
        let (mut x0, mut x1) = log_rates.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let (mut y0, mut y1) = qualities.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        if x1 - x0 < 1e-6 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let pad = 0.04 * (x1 - x0);
        x0 -= pad;
        x1 += pad;
        if y1 - y0 < 1e-9 {
            y0 -= 1.0;
            y1 += 1.0;
        }
        let y_step = nice_step(y1 - y0, 6.0);
        y0 = (y0 / y_step).floor() * y_step;
        y1 = (y1 / y_step).ceil() * y_step;
        Self { x0, x1, y0, y1, y_step }
    }

    fn px(&self, log10_rate: f64) -> f64 {
        LEFT + (log10_rate - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, q: f64) -> f64 {
        HEIGHT - BOTTOM - (q - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }

    fn draw(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            out,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            r - l,
            b - t
        );
        let mut k = self.x0.floor() as i32;
        while f64::from(k) <= self.x1 {
            for m in [1.0, 2.0, 5.0] {
                let v = m * 10f64.powi(k);
                let lx = v.log10();
                if lx < self.x0 || lx > self.x1 {
                    continue;
                }
                let x = self.px(lx);
                let _ = writeln!(
                    out,
                    r##"<line class="grid" x1="{x:.2}" y1="{t:.2}" x2="{x:.2}" y2="{b:.2}" stroke="#ddd"/>"##
                );
                let _ = writeln!(
                    out,
                    r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
                    b + 18.0,
                    rate_label(v)
                );
            }
            k += 1;
        }
        let steps = ((self.y1 - self.y0) / self.y_step).round() as i64;
        for i in 0..=steps {
            let q = self.y0 + i as f64 * self.y_step;
            let y = self.py(q);
            let _ = writeln!(
                out,
                r##"<line class="grid" x1="{l:.2}" y1="{y:.2}" x2="{r:.2}" y2="{y:.2}" stroke="#ddd"/>"##
            );
            let decimals = if self.y_step >= 1.0 { 0 } else { (-self.y_step.log10()).ceil() as usize };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{q:.decimals$}</text>"#,
                l - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            HEIGHT - 20.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (t + b) / 2.0,
            (t + b) / 2.0,
            escape(y_label)
        );
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn points_attr(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

fn legend_entry(out: &mut String, row: usize, stroke: &str, width: f64, dash: &str, label: &str) {
    let x = WIDTH - RIGHT + 20.0;
    let y = TOP + 10.0 + row as f64 * 20.0;
    let _ = writeln!(
        out,
        r#"<g class="legend"><line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{stroke}" stroke-width="{width}" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text></g>"#,
        x + 36.0,
        x + 44.0,
        y + 4.0,
        escape(label)
    );
}

/// Quality–rate curves on a log bitrate axis, one polyline per curve
/// (codec → hue, resolution → dash), with hulls drawn on top.
pub fn emit_qr_plot(curves: &[QrCurve], hulls: &[HullCurve], metric: Metric, title: &str) -> Result<String> {
    if curves.is_empty() {
        return Err(ReportError::Validation("no curves to plot".into()));
    }
    if let Some(c) = curves.iter().find(|c| c.metric != metric) {
        return Err(ReportError::Validation(format!("curve metric {} does not match {metric}", c.metric)));
    }
    if let Some(h) = hulls.iter().find(|h| h.metric != metric) {
        return Err(ReportError::Validation(format!("hull metric {} does not match {metric}", h.metric)));
    }
    let mut rates: Vec<f64> = Vec::new();
    let mut quals: Vec<f64> = Vec::new();
    for c in curves {
        for p in &c.points {
            if !(p.bitrate_kbps > 0.0) {
                return Err(ReportError::Validation(format!("non-positive bitrate {}", p.bitrate_kbps)));
            }
            rates.push(p.bitrate_kbps.log10());
            quals.push(p.quality);
        }
    }
    let hull_xy: Vec<Vec<(f64, f64)>> = hulls
        .iter()
        .map(|h| {
            h.vertices
                .iter()
                .map(|v| (h.log_base.invert(v.log_bitrate).log10(), v.quality))
                .collect()
        })
        .collect();
    for (x, y) in hull_xy.iter().flatten() {
        rates.push(*x);
        quals.push(*y);
    }
    if rates.is_empty() {
        return Err(ReportError::Validation("curves contain no points".into()));
    }
    let axes = Axes::new(rates.iter().copied(), quals.iter().copied());

    let mut out = String::new();
    header(&mut out, title);
    axes.draw(&mut out, "Bitrate (kb/s, log scale)", metric.axis_label());
    for c in curves {
        let px: Vec<(f64, f64)> = c
            .points
            .iter()
            .map(|p| (axes.px(p.bitrate_kbps.log10()), axes.py(p.quality)))
            .collect();
        let attrs = format!(
            r#"data-clip="{}" data-codec="{}" data-resolution="{}""#,
            escape(&c.clip),
            c.codec.as_str(),
            c.resolution
        );
        match px.as_slice() {
            [] => {}
            [(x, y)] => {
                let _ = writeln!(
                    out,
                    r#"<circle class="marker" {attrs} cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"/>"#,
                    hue(c.codec)
                );
            }
            many => {
                let _ = writeln!(
                    out,
                    r#"<polyline class="curve" {attrs} points="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="{}"/>"#,
                    points_attr(many),
                    hue(c.codec),
                    dash(c.resolution)
                );
            }
        }
    }
    for (h, xy) in hulls.iter().zip(&hull_xy) {
        let px: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (axes.px(x), axes.py(y))).collect();
        if px.len() > 1 {
            let _ = writeln!(
                out,
                r##"<polyline class="hull" data-clip="{}" data-codec="{}" points="{}" fill="none" stroke="#000" stroke-width="3" stroke-opacity="0.75"/>"##,
                escape(&h.clip),
                h.codec.as_str(),
                points_attr(&px)
            );
        }
        for (x, y) in &px {
            let _ = writeln!(out, r##"<circle class="hull-vertex" cx="{x:.2}" cy="{y:.2}" r="3" fill="#000"/>"##);
        }
    }

    let mut keys: Vec<(Codec, Resolution)> = curves.iter().map(|c| (c.codec, c.resolution)).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    keys.dedup();
    for (row, (codec, res)) in keys.iter().enumerate() {
        legend_entry(&mut out, row, hue(*codec), 1.5, dash(*res), &format!("{} {}", codec.label(), res));
    }
    if !hulls.is_empty() {
        legend_entry(&mut out, keys.len(), "#000", 3.0, "none", "convex hull");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Hull points with the fitted polynomial sampled across their span.
pub fn emit_fit_plot(points: &HullPointSet, model: &PolyModel, title: &str) -> Result<String> {
    if !points.is_empty() && points.metric != model.metric {
        return Err(ReportError::Validation(format!(
            "points are {} but the model is {}",
            points.metric, model.metric
        )));
    }
    if !points.is_empty() && points.codec != model.codec {
        return Err(ReportError::Validation(format!(
            "points are {} but the model is {}",
            points.codec, model.codec
        )));
    }
    let base = model.log_base;
    let (xs, ys) = points.xy();
    let (lo, hi) = if xs.is_empty() {
        let [a, b] = model
            .bitrate_range_kbps
            .ok_or_else(|| ReportError::Validation("no points and no fitted range to plot".into()))?;
        (base.apply(a), base.apply(b))
    } else {
        xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    };
    let curve: Vec<(f64, f64)> = (0..FIT_SAMPLES)
        .map(|i| {
            let x = if FIT_SAMPLES == 1 { lo } else { lo + (hi - lo) * i as f64 / (FIT_SAMPLES - 1) as f64 };
            (base.invert(x).log10(), horner(&model.coefficients, model.z(x)))
        })
        .collect();
    let scatter: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(&x, &y)| (base.invert(x).log10(), y)).collect();
    let axes = Axes::new(
        curve.iter().chain(&scatter).map(|p| p.0),
        curve.iter().chain(&scatter).map(|p| p.1),
    );

    let mut out = String::new();
    header(&mut out, title);
    axes.draw(&mut out, "Bitrate (kb/s, log scale)", model.metric.axis_label());
    for (x, y) in &scatter {
        let _ = writeln!(
            out,
            r#"<circle class="hull-point" cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.6"/>"#,
            axes.px(*x),
            axes.py(*y),
            hue(model.codec)
        );
    }
    let px: Vec<(f64, f64)> = curve.iter().map(|&(x, y)| (axes.px(x), axes.py(y))).collect();
    let _ = writeln!(
        out,
        r##"<polyline class="fit" points="{}" fill="none" stroke="#000" stroke-width="2"/>"##,
        points_attr(&px)
    );
    let mut notes = vec![format!("{} degree {}", model.codec.label(), model.degree)];
    if let Some(r) = model.rmse {
        notes.push(format!("RMSE = {r:.4}"));
    }
    if let Some(r2) = model.r_squared {
        notes.push(format!("R² = {r2:.4}"));
    }
    for (i, n) in notes.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text class="annotation" x="{:.2}" y="{:.2}" font-size="13">{}</text>"#,
            WIDTH - RIGHT + 20.0,
            TOP + 14.0 + i as f64 * 20.0,
            escape(n)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
