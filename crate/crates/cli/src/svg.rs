//! Hand-emitted SVG line and bar charts. Output is plain text built from
//! fixed-precision numbers, so identical inputs render byte-identical files.

use std::fmt::Write;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 210.0;
const MARGIN_TOP: f64 = 56.0;
const MARGIN_BOTTOM: f64 = 64.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// One polyline.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw a circle at every point (for sparse series).
    pub markers: bool,
    pub dashed: bool,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// One cluster of bars sharing an x position.
pub struct BarGroup {
    pub label: String,
    /// One value per entry of `BarChart::series_labels`.
    pub values: Vec<f64>,
}

pub struct BarChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series_labels: Vec<String>,
    pub groups: Vec<BarGroup>,
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Largest "nice" step (1, 2, or 5 times a power of ten) not above `raw`.
fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac >= 5.0 {
        5.0
    } else if frac >= 2.0 {
        2.0
    } else {
        1.0
    };
    nice * mag
}

/// Tick positions covering `[lo, hi]` at a nice step, endpoints included
/// when they land on the grid.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let step = nice_step((hi - lo) / target.max(1) as f64);
    let first = (lo / step).ceil();
    let last = (hi / step).floor();
    (first as i64..=last as i64).map(|i| i as f64 * step).collect()
}

/// Tick label with just enough digits for the step size.
fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    format!("{v:.decimals$}")
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"Helvetica, Arial, sans-serif\" font-size=\"14\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n\
         <text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">{}</text>\n",
        px(WIDTH / 2.0),
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_step: f64, y_step: f64) {
    let plot_left = MARGIN_LEFT;
    let plot_right = WIDTH - MARGIN_RIGHT;
    let plot_top = MARGIN_TOP;
    let plot_bottom = HEIGHT - MARGIN_BOTTOM;

    for t in nice_ticks(frame.y_lo, frame.y_hi, 6) {
        let y = px(frame.y(t));
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{}\" y=\"{y}\" text-anchor=\"end\" dy=\"4\">{}</text>\n",
            px(plot_left),
            px(plot_right),
            px(plot_left - 8.0),
            tick_label(t, y_step)
        );
    }
    for t in nice_ticks(frame.x_lo, frame.x_hi, 7) {
        let x = px(frame.x(t));
        let _ = write!(
            out,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(plot_top),
            px(plot_bottom),
            px(plot_bottom + 22.0),
            tick_label(t, x_step)
        );
    }
    let _ = write!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        px(plot_left),
        px(plot_top),
        px(plot_right - plot_left),
        px(plot_bottom - plot_top),
        px((plot_left + plot_right) / 2.0),
        px(HEIGHT - 16.0),
        escape(x_label),
        px((plot_top + plot_bottom) / 2.0),
        px((plot_top + plot_bottom) / 2.0),
        escape(y_label),
    );
}

fn legend(out: &mut String, labels: &[(String, &str, bool)]) {
    let x = WIDTH - MARGIN_RIGHT + 16.0;
    for (i, (label, color, dashed)) in labels.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 24.0 * i as f64;
        let dash = if *dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2.5\"{dash}/>\n\
             <text x=\"{}\" y=\"{}\" dy=\"4\">{}</text>\n",
            px(x),
            px(y),
            px(x + 28.0),
            px(y),
            px(x + 36.0),
            px(y),
            escape(label)
        );
    }
}

impl LineChart {
    pub fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                xs.push(x);
                ys.push(y);
            }
        }
        let (x_lo, x_hi) = span(&xs);
        let (y_lo, y_hi) = span(&ys);
        // Regret-style data starts the y axis at zero.
        let y_lo = if y_lo >= 0.0 { 0.0 } else { y_lo };
        let frame = Frame {
            x_lo,
            x_hi,
            y_lo,
            y_hi: pad_hi(y_lo, y_hi),
        };
        let x_step = nice_step((frame.x_hi - frame.x_lo) / 7.0);
        let y_step = nice_step((frame.y_hi - frame.y_lo) / 6.0);

        let mut out = String::new();
        open_svg(&mut out, &self.title);
        axes(&mut out, &frame, &self.x_label, &self.y_label, x_step, y_step);
        let mut legend_rows = Vec::new();
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            legend_rows.push((s.label.clone(), color, s.dashed));
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{},{}", px(frame.x(x)), px(frame.y(y))))
                .collect();
            let dash = if s.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>",
                coords.join(" ")
            );
            if s.markers {
                for &(x, y) in &s.points {
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>",
                        px(frame.x(x)),
                        px(frame.y(y))
                    );
                }
            }
        }
        legend(&mut out, &legend_rows);
        out.push_str("</svg>\n");
        out
    }
}

impl BarChart {
    pub fn render(&self) -> String {
        let max = self
            .groups
            .iter()
            .flat_map(|g| g.values.iter().copied())
            .fold(0.0f64, f64::max);
        let frame = Frame {
            x_lo: 0.0,
            x_hi: self.groups.len() as f64,
            y_lo: 0.0,
            y_hi: pad_hi(0.0, max),
        };
        let y_step = nice_step((frame.y_hi - frame.y_lo) / 6.0);

        let mut out = String::new();
        open_svg(&mut out, &self.title);

        let plot_left = MARGIN_LEFT;
        let plot_right = WIDTH - MARGIN_RIGHT;
        let plot_top = MARGIN_TOP;
        let plot_bottom = HEIGHT - MARGIN_BOTTOM;
        for t in nice_ticks(frame.y_lo, frame.y_hi, 6) {
            let y = px(frame.y(t));
            let _ = write!(
                out,
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#dddddd\"/>\n\
                 <text x=\"{}\" y=\"{y}\" text-anchor=\"end\" dy=\"4\">{}</text>\n",
                px(plot_left),
                px(plot_right),
                px(plot_left - 8.0),
                tick_label(t, y_step)
            );
        }

        let n_series = self.series_labels.len().max(1);
        let group_width = (plot_right - plot_left) / self.groups.len().max(1) as f64;
        let bar_width = group_width * 0.72 / n_series as f64;
        for (gi, group) in self.groups.iter().enumerate() {
            let center = plot_left + group_width * (gi as f64 + 0.5);
            let start = center - bar_width * n_series as f64 / 2.0;
            for (si, &v) in group.values.iter().enumerate() {
                let color = PALETTE[si % PALETTE.len()];
                let x = start + bar_width * si as f64;
                let y = frame.y(v);
                let _ = writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>",
                    px(x),
                    px(y),
                    px(bar_width),
                    px(plot_bottom - y)
                );
            }
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                px(center),
                px(plot_bottom + 22.0),
                escape(&group.label)
            );
        }
        let _ = write!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
            px(plot_left),
            px(plot_top),
            px(plot_right - plot_left),
            px(plot_bottom - plot_top),
            px((plot_left + plot_right) / 2.0),
            px(HEIGHT - 16.0),
            escape(&self.x_label),
            px((plot_top + plot_bottom) / 2.0),
            px((plot_top + plot_bottom) / 2.0),
            escape(&self.y_label),
        );
        let rows: Vec<(String, &str, bool)> = self
            .series_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), PALETTE[i % PALETTE.len()], false))
            .collect();
        legend(&mut out, &rows);
        out.push_str("</svg>\n");
        out
    }
}

fn span(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo, lo + 1.0)
    } else {
        (0.0, 1.0)
    }
}

/// Upper bound padded 5% above the data so nothing touches the frame.
fn pad_hi(lo: f64, hi: f64) -> f64 {
    if hi > lo {
        hi + 0.05 * (hi - lo)
    } else {
        lo + 1.0
    }
}

/// Keeps at most `cap` points, always retaining the last one, so chart
/// files stay small at long horizons.
pub fn thin_points(points: Vec<(f64, f64)>, cap: usize) -> Vec<(f64, f64)> {
    let n = points.len();
    if n <= cap.max(2) {
        return points;
    }
    let stride = n.div_ceil(cap);
    points
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == n - 1)
        .map(|(_, p)| p)
        .collect()
}
