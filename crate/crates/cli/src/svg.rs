//! Static SVG rendering of analysis reports.
//!
//! Two chart styles: a line chart of importance fractions over the objective
//! weighting, and a stacked chart of per-hyperparameter performance
//! contributions along the greedy paths. Output is a pure function of the
//! report (no timestamps, no generated ids), so re-rendering is
//! byte-identical.

use std::fmt::Write;

use mohpi_core::report::{AblationReport, AnalysisReport, FanovaReport};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 230.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn render_report(report: &AnalysisReport) -> String {
    match report {
        AnalysisReport::Fanova(r) => render_fanova_svg(r),
        AnalysisReport::Ablation(r) => render_ablation_svg(r),
    }
}

fn color(idx: usize) -> &'static str {
    PALETTE[idx % PALETTE.len()]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

struct Plot {
    svg: String,
    x_min: f64,
    x_span: f64,
    y_min: f64,
    y_span: f64,
}

impl Plot {
    fn new(title: &str, x_label: &str, y_label: &str, y_min: f64, y_max: f64) -> Self {
        let mut svg = String::new();
        let _ = write!(
            svg,
            r#"<svg version="1.1" width="{WIDTH}" height="{HEIGHT}" xmlns="http://www.w3.org/2000/svg">"#
        );
        svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = write!(
            svg,
            r#"<text x="{x}" y="22" font-family="sans-serif" font-size="16" font-weight="bold">{title}</text>"#,
            x = MARGIN_LEFT,
            title = escape(title)
        );
        let mut plot = Self {
            svg,
            x_min: 0.0,
            x_span: 1.0,
            y_min,
            y_span: y_max - y_min,
        };
        plot.axes(x_label, y_label);
        plot
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / self.x_span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y_min) / self.y_span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let x0 = self.px(self.x_min);
        let x1 = WIDTH - MARGIN_RIGHT;
        let y0 = self.py(self.y_min);
        let y1 = MARGIN_TOP;
        let _ = write!(
            self.svg,
            r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none" stroke-width="1"/>"#
        );
        for k in 0..=4 {
            let x = self.x_min + self.x_span * k as f64 / 4.0;
            let px = self.px(x);
            let _ = write!(
                self.svg,
                r##"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="#dddddd"/>"##,
                y1
            );
            let _ = write!(
                self.svg,
                r#"<text x="{px}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 16.0,
                fmt(x)
            );
        }
        for k in 0..=4 {
            let y = self.y_min + self.y_span * k as f64 / 4.0;
            let py = self.py(y);
            let _ = write!(
                self.svg,
                r##"<line x1="{x0}" y1="{py}" x2="{x1}" y2="{py}" stroke="#dddddd"/>"##
            );
            let _ = write!(
                self.svg,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                py + 4.0,
                fmt(y)
            );
        }
        let _ = write!(
            self.svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 16.0,
            escape(x_label)
        );
        let _ = write!(
            self.svg,
            r#"<text x="18" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }

    fn legend_entry(&mut self, slot: usize, color: &str, label: &str) {
        let x = WIDTH - MARGIN_RIGHT + 18.0;
        let y = MARGIN_TOP + 10.0 + 18.0 * slot as f64;
        let _ = write!(
            self.svg,
            r#"<rect x="{x}" y="{}" width="14" height="6" fill="{color}" class="legend"/>"#,
            y - 5.0
        );
        let _ = write!(
            self.svg,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="12">{}</text>"#,
            x + 20.0,
            escape(label)
        );
    }

    fn note(&mut self, slot: usize, text: &str) {
        let x = WIDTH - MARGIN_RIGHT + 18.0;
        let y = MARGIN_TOP + 10.0 + 18.0 * slot as f64;
        let _ = write!(
            self.svg,
            r##"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" fill="#555555">{}</text>"##,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>");
        self.svg
    }
}

/// Line chart: one polyline of importance over w1 per hyperparameter.
pub fn render_fanova_svg(report: &FanovaReport) -> String {
    let mut plot = Plot::new(
        "Hyperparameter importance across objective weightings",
        "weight of objective 1 (w1)",
        "importance (variance fraction)",
        0.0,
        1.0,
    );
    for (idx, curve) in report.curves.iter().enumerate() {
        let col = color(idx);
        let mut points = String::new();
        for (w, imp) in report.weights.iter().zip(&curve.importance) {
            let _ = write!(points, "{},{} ", fmt_px(plot.px(w.w1)), fmt_px(plot.py(*imp)));
        }
        if report.weights.len() == 1 {
            // A single weighting degenerates to a marker.
            let _ = write!(
                plot.svg,
                r#"<circle cx="{}" cy="{}" r="4" fill="{col}"/>"#,
                fmt_px(plot.px(report.weights[0].w1)),
                fmt_px(plot.py(curve.importance[0]))
            );
        } else {
            let _ = write!(
                plot.svg,
                r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="2"/>"#,
                points.trim_end()
            );
        }
        plot.legend_entry(idx, col, &curve.hyperparameter);
    }
    plot.finish()
}

/// Stacked chart: the base band is the default configuration's performance
/// (1 - weighted cost, so stacks grow upward); each hyperparameter band adds
/// its positive delta. Negative deltas are not stacked; they are listed to
/// the right instead.
pub fn render_ablation_svg(report: &AblationReport) -> String {
    // Union of stepped hyperparameters in canonical (first-seen) order.
    let mut hp_names: Vec<String> = Vec::new();
    for path in &report.paths {
        for step in &path.steps {
            if !hp_names.contains(&step.hyperparameter) {
                hp_names.push(step.hyperparameter.clone());
            }
        }
    }

    let k = report.paths.len();
    let base: Vec<f64> = report.paths.iter().map(|p| 1.0 - p.default_performance).collect();
    let mut levels: Vec<Vec<f64>> = vec![base.clone()];
    let mut banded_hps: Vec<&str> = Vec::new();
    let mut negatives: Vec<String> = Vec::new();
    for name in &hp_names {
        let mut any_positive = false;
        let next: Vec<f64> = report
            .paths
            .iter()
            .zip(levels.last().unwrap())
            .map(|(path, prev)| {
                let delta = path
                    .steps
                    .iter()
                    .find(|s| &s.hyperparameter == name)
                    .map_or(0.0, |s| s.delta);
                if delta > 0.0 {
                    any_positive = true;
                    prev + delta
                } else {
                    if delta < 0.0 {
                        negatives.push(format!("{name} @ w1={}: {delta:.4}", fmt(path.w1)));
                    }
                    *prev
                }
            })
            .collect();
        if any_positive {
            levels.push(next);
            banded_hps.push(name);
        }
    }

    let y_lo = base.iter().copied().fold(f64::INFINITY, f64::min);
    let y_hi = levels
        .last()
        .unwrap()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    // Pad to multiples of 0.05 so the baseline reads cleanly.
    let y_min = ((y_lo / 0.05).floor() * 0.05 - 0.05).max(0.0_f64.min(y_lo));
    let y_max = (y_hi / 0.05).ceil() * 0.05 + 0.05;

    let mut plot = Plot::new(
        "Tuning contribution per hyperparameter across objective weightings",
        "weight of objective 1 (w1)",
        "total performance (1 - weighted cost)",
        y_min,
        y_max,
    );

    let xs: Vec<f64> = report.paths.iter().map(|p| p.w1).collect();
    for band in 0..levels.len() {
        let lower: Vec<f64> = if band == 0 {
            vec![y_min; k]
        } else {
            levels[band - 1].clone()
        };
        let upper = &levels[band];
        let col = if band == 0 { "#4c72b0" } else { color(band - 1) };
        if k == 1 {
            let x = plot.px(xs[0]);
            let _ = write!(
                plot.svg,
                r#"<rect x="{}" y="{}" width="24" height="{}" fill="{col}" fill-opacity="0.85"/>"#,
                fmt_px(x - 12.0),
                fmt_px(plot.py(upper[0])),
                fmt_px((plot.py(lower[0]) - plot.py(upper[0])).max(0.0))
            );
        } else {
            let mut d = String::new();
            for (i, &x) in xs.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{} {} ", fmt_px(plot.px(x)), fmt_px(plot.py(upper[i])));
            }
            for (i, &x) in xs.iter().enumerate().rev() {
                let _ = write!(d, "L{} {} ", fmt_px(plot.px(x)), fmt_px(plot.py(lower[i])));
            }
            d.push('Z');
            let _ = write!(
                plot.svg,
                r#"<path d="{}" fill="{col}" fill-opacity="0.85" stroke="none"/>"#,
                d.trim_end()
            );
        }
        let label = if band == 0 { "default" } else { banded_hps[band - 1] };
        plot.legend_entry(band, col, label);
    }

    if !negatives.is_empty() {
        let mut slot = levels.len() + 1;
        plot.note(slot, "negative deltas (not stacked):");
        for line in negatives.iter().take(12) {
            slot += 1;
            plot.note(slot, line);
        }
        if negatives.len() > 12 {
            plot.note(slot + 1, &format!("... {} more", negatives.len() - 12));
        }
    }
    plot.finish()
}

fn fmt_px(v: f64) -> String {
    format!("{v:.2}")
}
