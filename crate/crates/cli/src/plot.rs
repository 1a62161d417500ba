//! Minimal static SVG charts: log-log spectra and linear strips.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

pub const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#d4a017", "#2ca02c", "#9467bd", "#d62728", "#17becf", "#7f7f7f"];

pub enum Style {
    Dots,
    Line,
}

pub struct Series<'a> {
    pub label: String,
    pub color: &'a str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
enum Scale {
    Linear,
    Log,
}

struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, scale: Scale) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (matches!(scale, Scale::Linear) || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (1.0, 10.0);
        }
        match scale {
            Scale::Log => Axis { lo: 10f64.powf(lo.log10().floor()), hi: 10f64.powf(hi.log10().ceil().max(lo.log10().floor() + 1.0)), scale },
            Scale::Linear => {
                let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
                Axis { lo: lo - pad, hi: hi + pad, scale }
            }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log => (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10()),
        }
    }

    fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => {
                let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
                let stride = ((b - a) / 8).max(1);
                (a..=b).step_by(stride as usize).map(|e| 10f64.powi(e)).collect()
            }
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 6.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
                let mut t = (self.lo / step).ceil() * step;
                let mut out = vec![];
                while t <= self.hi {
                    out.push(t);
                    t += step;
                }
                out
            }
        }
    }
}

fn label(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Log => format!("1e{}", v.log10().round() as i32),
        Scale::Linear => {
            if v == 0.0 {
                "0".into()
            } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
                format!("{v:.1e}")
            } else {
                format!("{}", (v * 1000.0).round() / 1000.0)
            }
        }
    }
}

fn render(title: &str, x_label: &str, y_label: &str, series: &[Series], xs: Scale, ys: Scale) -> String {
    let xa = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), xs);
    let ya = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), ys);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |v: f64| LEFT + xa.frac(v) * pw;
    let py = |v: f64| TOP + (1.0 - ya.frac(v)) * ph;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, esc(title));
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}" stroke="#e6e6e6"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, label(t, xs));
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e6e6e6"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, label(t, ys));
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 14.0, esc(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(y_label)
    );
    let inside = |x: f64, y: f64| x.is_finite() && y.is_finite() && (matches!(xs, Scale::Linear) || x > 0.0) && (matches!(ys, Scale::Linear) || y > 0.0);
    for (i, ser) in series.iter().enumerate() {
        match ser.style {
            Style::Dots => {
                for &(x, y) in ser.points.iter().filter(|p| inside(p.0, p.1)) {
                    let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="2.2" fill="{}"/>"#, px(x), py(y), ser.color);
                }
            }
            Style::Line => {
                let pts: Vec<String> = ser.points.iter().filter(|p| inside(p.0, p.1)).map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
                if !pts.is_empty() {
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, ser.color, pts.join(" "));
                }
            }
        }
        if !ser.label.is_empty() {
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="12" height="4" fill="{}"/>"#, LEFT + pw + 10.0, ly - 6.0, ser.color);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, LEFT + pw + 28.0, esc(&ser.label));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn loglog(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    render(title, x_label, y_label, series, Scale::Log, Scale::Log)
}

pub fn linear(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    render(title, x_label, y_label, series, Scale::Linear, Scale::Linear)
}

pub fn semilog_x(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    render(title, x_label, y_label, series, Scale::Log, Scale::Linear)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_valid_looking_svg() {
        let pts: Vec<(f64, f64)> = (1..50).map(|k| (k as f64 * 1e-5, 1.0 / k as f64)).collect();
        let svg = loglog("t", "f (Hz)", "S", &[Series { label: "a<b".into(), color: PALETTE[0], style: Style::Dots, points: pts }]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<circle").count(), 49);
    }

    #[test]
    fn empty_and_constant_series_do_not_panic() {
        linear("t", "x", "y", &[]);
        linear("t", "x", "y", &[Series { label: String::new(), color: "black", style: Style::Line, points: vec![(0.0, 1.0), (1.0, 1.0)] }]);
    }
}
