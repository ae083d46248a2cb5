//! SVG plots on a fixed 800x600 canvas. Coordinates are printed with two
//! decimals so identical specs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use geoscale_core::fractal::{loglog_fit, LogLogFit};
use geoscale_core::terrain::SlopeHistogram;
use geoscale_core::Point;
use thiserror::Error;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 70.0;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    NoPoints,
    #[error("point ({0}, {1}) cannot be drawn on a log axis")]
    NonPositive(f64, f64),
    #[error("point ({0}, {1}) is not finite")]
    NonFinite(f64, f64),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlotKind {
    /// Measured length against yardstick, log-log.
    Richardson,
    /// Size against rank, log-log.
    RankSize,
    /// Area per slope class as bars of `bin_width`, linear axes.
    SlopeHistogram { bin_width: f64 },
}

impl PlotKind {
    pub fn log_axes(&self) -> bool {
        !matches!(self, PlotKind::SlopeHistogram { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// Drawn as a straight line across the data range (log-log kinds only).
    pub fit: Option<LogLogFit>,
    pub annotations: Vec<String>,
}

impl PlotSpec {
    /// Richardson plot of `(yardstick, length)` pairs, annotated with D.
    pub fn richardson(points: Vec<(f64, f64)>, fit: Option<LogLogFit>) -> Self {
        let annotations = fit
            .iter()
            .flat_map(|f| [format!("D = {:.4}", f.dimension), format!("r² = {:.4}", f.r_squared)])
            .collect();
        PlotSpec {
            kind: PlotKind::Richardson,
            title: "Richardson plot".into(),
            x_label: "yardstick".into(),
            y_label: "measured length".into(),
            points,
            fit,
            annotations,
        }
    }

    /// Rank-size plot of `(rank, value)` rows with their log-log fit.
    pub fn rank_size(table: &[(usize, f64)]) -> Self {
        let points: Vec<(f64, f64)> = table.iter().map(|&(r, v)| (r as f64, v)).collect();
        let fit = loglog_fit(&points).ok();
        let annotations = fit.iter().map(|f| format!("slope = {:.4}", f.slope)).collect();
        PlotSpec {
            kind: PlotKind::RankSize,
            title: "Rank-size plot".into(),
            x_label: "rank".into(),
            y_label: "size".into(),
            points,
            fit,
            annotations,
        }
    }

    pub fn slope_histogram(h: &SlopeHistogram) -> Self {
        PlotSpec {
            kind: PlotKind::SlopeHistogram { bin_width: h.bin_width },
            title: "Slope histogram".into(),
            x_label: "slope (degrees)".into(),
            y_label: "area".into(),
            points: h.bins.clone(),
            fit: None,
            annotations: Vec::new(),
        }
    }
}

/// Maps data values to one screen axis.
#[derive(Debug, Clone, Copy)]
struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    screen_lo: f64,
    screen_hi: f64,
}

impl Axis {
    fn value(&self, v: f64) -> f64 {
        if self.log {
            v.log10()
        } else {
            v
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (self.value(v) - self.lo) / (self.hi - self.lo);
        self.screen_lo + t * (self.screen_hi - self.screen_lo)
    }

    /// Tick positions in axis units and their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i64;
            let (lo, hi) = (self.lo as i64, self.hi as i64);
            (lo..=hi).step_by(step as usize).map(|k| (k as f64, format!("1e{k}"))).collect()
        } else {
            let step = nice_step((self.hi - self.lo) / 5.0);
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            let n = ((self.hi - self.lo) / step + 1e-9).floor() as i64;
            (0..=n)
                .map(|i| {
                    let t = self.lo + i as f64 * step;
                    (t, format!("{t:.decimals$}"))
                })
                .collect()
        }
    }
}

/// 1, 2 or 5 times a power of ten, at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let p = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * p).find(|s| *s >= raw * (1.0 - 1e-12)).unwrap_or(10.0 * p)
}

fn log_range(lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = (lo.floor(), hi.ceil());
    if a == b {
        (a - 1.0, b + 1.0)
    } else {
        (a, b)
    }
}

fn linear_range(lo: f64, hi: f64) -> (f64, f64) {
    let lo = lo.min(0.0);
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let step = nice_step((hi - lo) / 5.0);
    ((lo / step).floor() * step, (hi / step).ceil() * step)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="32.00" text-anchor="middle" font-family="sans-serif" font-size="18">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn check(spec: &PlotSpec) -> Result<(), PlotError> {
    if spec.points.is_empty() {
        return Err(PlotError::NoPoints);
    }
    for &(x, y) in &spec.points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(PlotError::NonFinite(x, y));
        }
        if spec.kind.log_axes() && !(x > 0.0 && y > 0.0) {
            return Err(PlotError::NonPositive(x, y));
        }
    }
    Ok(())
}

pub fn render(spec: &PlotSpec) -> Result<String, PlotError> {
    check(spec)?;
    let log = spec.kind.log_axes();
    let f = |v: f64| if log { v.log10() } else { v };
    let xs: Vec<f64> = spec.points.iter().map(|p| f(p.0)).collect();
    let mut ys: Vec<f64> = spec.points.iter().map(|p| f(p.1)).collect();
    let (xmin, xmax) = spec.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let fit_ends = spec.fit.filter(|_| log).map(|fit| [(xmin, fit.predict(xmin)), (xmax, fit.predict(xmax))]);
    if let Some(ends) = fit_ends {
        ys.extend(ends.iter().map(|p| f(p.1)));
    }
    let ext = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &x| (a.0.min(x), a.1.max(x)));
    let (mut x_lo, mut x_hi) = ext(&xs);
    if let PlotKind::SlopeHistogram { bin_width } = spec.kind {
        x_hi += bin_width;
    }
    let (y_lo, y_hi) = ext(&ys);
    let ((x_lo, x_hi), (y_lo, y_hi)) = if log {
        (log_range(x_lo, x_hi), log_range(y_lo, y_hi))
    } else {
        x_lo = x_lo.min(0.0);
        (linear_range(x_lo, x_hi), linear_range(0.0, y_hi))
    };
    let xa = Axis { log, lo: x_lo, hi: x_hi, screen_lo: LEFT, screen_hi: WIDTH - RIGHT };
    let ya = Axis { log, lo: y_lo, hi: y_hi, screen_lo: HEIGHT - BOTTOM, screen_hi: TOP };

    let mut s = String::new();
    header(&mut s, &spec.title);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<rect id="frame" x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(s, r#"<g id="ticks" font-family="sans-serif" font-size="12">"#);
    for (t, label) in xa.ticks() {
        let x = xa.screen_lo + (t - xa.lo) / (xa.hi - xa.lo) * (xa.screen_hi - xa.screen_lo);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 6.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, y0 + 22.0);
    }
    for (t, label) in ya.ticks() {
        let y = ya.screen_lo + (t - ya.lo) / (ya.hi - ya.lo) * (ya.screen_hi - ya.screen_lo);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 6.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 10.0, y + 4.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20.00" y="{0:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20.00 {0:.2})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(&spec.y_label)
    );

    match spec.kind {
        PlotKind::SlopeHistogram { bin_width } => {
            let _ = writeln!(s, r#"<g id="bars" fill="steelblue" stroke="white">"#);
            for &(lower, area) in &spec.points {
                let (bx0, bx1) = (xa.map(lower), xa.map(lower + bin_width));
                let top = ya.map(area);
                let _ = writeln!(
                    s,
                    r#"<rect x="{bx0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}"/>"#,
                    bx1 - bx0,
                    y0 - top
                );
            }
            let _ = writeln!(s, "</g>");
        }
        _ => {
            let _ = writeln!(s, r#"<g id="points" fill="steelblue">"#);
            for &(x, y) in &spec.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4"/>"#, xa.map(x), ya.map(y));
            }
            let _ = writeln!(s, "</g>");
        }
    }
    if let Some([a, b]) = fit_ends {
        let _ = writeln!(
            s,
            r#"<line id="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="2"/>"#,
            xa.map(a.0),
            ya.map(a.1),
            xa.map(b.0),
            ya.map(b.1)
        );
    }
    for (i, text) in spec.annotations.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text id="annotation-{i}" x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="14">{}</text>"#,
            x1 - 10.0,
            y1 + 22.0 + 20.0 * i as f64,
            escape(text)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Draws a curve with equal scaling on both axes.
pub fn render_curve(title: &str, pts: &[Point]) -> Result<String, PlotError> {
    if pts.is_empty() {
        return Err(PlotError::NoPoints);
    }
    if let Some(p) = pts.iter().find(|p| !p.is_finite()) {
        return Err(PlotError::NonFinite(p.x, p.y));
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let span = ((hi.x - lo.x) / w).max((hi.y - lo.y) / h);
    let scale = if span > 0.0 { 1.0 / span } else { 1.0 };
    let cx = LEFT + (w - (hi.x - lo.x) * scale) / 2.0;
    let cy = HEIGHT - BOTTOM - (h - (hi.y - lo.y) * scale) / 2.0;
    let mut s = String::new();
    header(&mut s, title);
    s.push_str(r#"<polyline id="curve" fill="none" stroke="black" stroke-width="1" points=""#);
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", cx + (p.x - lo.x) * scale, cy - (p.y - lo.y) * scale);
    }
    s.push_str("\"/>\n</svg>\n");
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), PlotError> {
    std::fs::write(path, text).map_err(|source| PlotError::Io { path: path.display().to_string(), source })
}

pub fn emit_plot(spec: &PlotSpec, path: &Path) -> Result<(), PlotError> {
    write_file(path, &render(spec)?)
}

pub fn emit_curve(title: &str, pts: &[Point], path: &Path) -> Result<(), PlotError> {
    write_file(path, &render_curve(title, pts)?)
}
