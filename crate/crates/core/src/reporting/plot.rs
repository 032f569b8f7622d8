use std::fmt::Write as _;

use super::{ReportError, DEFAULT_SWEET_SPOT_USD};
use crate::selection::{Frontier, ParetoPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub width: u32,
    pub height: u32,
    /// Logarithmic cost axis.
    pub log_x: bool,
    /// Shade costs below this value; `None` disables the band.
    pub sweet_spot_usd: Option<f64>,
    pub title: String,
    /// Radius in pixels of the bubble with the largest parameter count.
    pub max_radius: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            width: 800,
            height: 560,
            log_x: false,
            sweet_spot_usd: Some(DEFAULT_SWEET_SPOT_USD),
            title: "Model Quality vs. Inference Cost".to_string(),
            max_radius: 26.0,
        }
    }
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PADDING: f64 = 0.05;
const TICKS: usize = 5;

const FRONTIER_FILL: &str = "#d95f02";
const DOMINATED_FILL: &str = "#7570b3";

/// Linear map from a padded data interval onto a pixel interval.
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(min: f64, max: f64, px_lo: f64, px_hi: f64) -> Self {
        let span = max - min;
        let pad = if span > 0.0 {
            span * PADDING
        } else if min != 0.0 {
            min.abs() * PADDING
        } else {
            1.0
        };
        Self {
            lo: min - pad,
            hi: max + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=TICKS).map(move |i| self.lo + (self.hi - self.lo) * i as f64 / TICKS as f64)
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders the frontier as a standalone SVG bubble chart: x is cost, y is
/// quality, bubble area is proportional to parameter count. Frontier points
/// are drawn in a distinct colour and joined by the attainable-quality
/// staircase.
pub fn render_frontier_plot(frontier: &Frontier, options: &PlotOptions) -> Result<String, ReportError> {
    if frontier.is_empty() {
        return Err(ReportError::EmptyPlot);
    }
    if options.width < 200 || options.height < 200 {
        return Err(ReportError::InvalidOption("width and height must be >= 200".into()));
    }
    if !(options.max_radius.is_finite() && options.max_radius > 0.0) {
        return Err(ReportError::InvalidOption("max_radius must be > 0".into()));
    }

    let to_x = |cost: f64| if options.log_x { cost.log10() } else { cost };
    let points: Vec<(&ParetoPoint, bool)> = frontier
        .points
        .iter()
        .map(|p| (p, true))
        .chain(frontier.dominated.iter().map(|d| (&d.point, false)))
        .collect();

    let (w, h) = (f64::from(options.width), f64::from(options.height));
    let xs = points.iter().map(|(p, _)| to_x(p.cost_usd));
    let ys = points.iter().map(|(p, _)| p.quality);
    let x_axis = Axis::new(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
        MARGIN_LEFT,
        w - MARGIN_RIGHT,
    );
    let y_axis = Axis::new(
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
        h - MARGIN_BOTTOM,
        MARGIN_TOP,
    );
    let max_params = points
        .iter()
        .map(|(p, _)| p.params_billion)
        .fold(0.0_f64, f64::max);
    let radius = |params: f64| {
        if max_params > 0.0 {
            options.max_radius * (params / max_params).sqrt()
        } else {
            options.max_radius
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
    let _ = writeln!(
        svg,
        r##"<text class="title" x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"##,
        w / 2.0,
        escape(&options.title)
    );

    let (plot_left, plot_right) = (MARGIN_LEFT, w - MARGIN_RIGHT);
    let (plot_top, plot_bottom) = (MARGIN_TOP, h - MARGIN_BOTTOM);

    if let Some(limit) = options.sweet_spot_usd.filter(|v| v.is_finite() && *v > 0.0) {
        let edge = x_axis.map(to_x(limit)).clamp(plot_left, plot_right);
        if edge > plot_left {
            let _ = writeln!(
                svg,
                r##"<rect class="sweet-spot" x="{plot_left:.2}" y="{plot_top:.2}" width="{:.2}" height="{:.2}" fill="#1b9e77" fill-opacity="0.08"/>"##,
                edge - plot_left,
                plot_bottom - plot_top
            );
            let _ = writeln!(
                svg,
                r##"<text class="sweet-spot-label" x="{:.2}" y="{:.2}" fill="#1b9e77">sweet spot &lt; ${limit:.2}</text>"##,
                plot_left + 6.0,
                plot_top + 16.0
            );
        }
    }

    // Axes and ticks.
    let _ = writeln!(
        svg,
        r##"<g class="axes" stroke="#333333" stroke-width="1"><line x1="{plot_left:.2}" y1="{plot_bottom:.2}" x2="{plot_right:.2}" y2="{plot_bottom:.2}"/><line x1="{plot_left:.2}" y1="{plot_top:.2}" x2="{plot_left:.2}" y2="{plot_bottom:.2}"/></g>"##
    );
    for t in x_axis.ticks() {
        let px = x_axis.map(t);
        let label = if options.log_x { 10f64.powf(t) } else { t };
        let _ = writeln!(
            svg,
            r##"<text class="x-tick" x="{px:.2}" y="{:.2}" text-anchor="middle">{label:.2}</text>"##,
            plot_bottom + 18.0
        );
    }
    for t in y_axis.ticks() {
        let py = y_axis.map(t);
        let _ = writeln!(
            svg,
            r##"<text class="y-tick" x="{:.2}" y="{:.2}" text-anchor="end">{t:.1}</text>"##,
            plot_left - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">Inference cost (USD{})</text>"##,
        (plot_left + plot_right) / 2.0,
        h - 16.0,
        if options.log_x { ", log scale" } else { "" }
    );
    let _ = writeln!(
        svg,
        r##"<text class="y-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">Quality score</text>"##,
        (plot_top + plot_bottom) / 2.0,
        (plot_top + plot_bottom) / 2.0
    );

    // Staircase through frontier points: hold quality until the next cost.
    let mut vertices = Vec::new();
    for (i, p) in frontier.points.iter().enumerate() {
        let (px, py) = (x_axis.map(to_x(p.cost_usd)), y_axis.map(p.quality));
        if i > 0 {
            let prev_y = y_axis.map(frontier.points[i - 1].quality);
            vertices.push(format!("{px:.2},{prev_y:.2}"));
        }
        vertices.push(format!("{px:.2},{py:.2}"));
    }
    if !vertices.is_empty() {
        let _ = writeln!(
            svg,
            r##"<polyline class="frontier-line" points="{}" fill="none" stroke="{FRONTIER_FILL}" stroke-width="2"/>"##,
            vertices.join(" ")
        );
    }

    let _ = writeln!(svg, r##"<g class="bubbles">"##);
    // Large bubbles first so small ones stay visible on top.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .0
            .params_billion
            .total_cmp(&points[a].0.params_billion)
            .then(a.cmp(&b))
    });
    for i in order {
        let (p, on_frontier) = points[i];
        let (cx, cy) = (x_axis.map(to_x(p.cost_usd)), y_axis.map(p.quality));
        let (class, fill) = if on_frontier {
            ("bubble frontier", FRONTIER_FILL)
        } else {
            ("bubble dominated", DOMINATED_FILL)
        };
        let id = escape(&p.model_id);
        let _ = writeln!(
            svg,
            r##"<circle class="{class}" data-model="{id}" cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="{fill}" fill-opacity="0.55" stroke="{fill}"><title>{id}: ${:.2}, score {:.1}, {}B params</title></circle>"##,
            radius(p.params_billion),
            p.cost_usd,
            p.quality,
            p.params_billion
        );
        let _ = writeln!(
            svg,
            r##"<text class="label" x="{:.2}" y="{:.2}">{id}</text>"##,
            cx + 6.0,
            cy - 6.0
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}
