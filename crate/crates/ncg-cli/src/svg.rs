//! Minimal hand-rolled SVG charts: histograms, per-bin accuracy bars, and
//! accuracy-vs-level line plots. Rendering is a pure function of already-
//! reported data — nothing is computed here beyond pixel placement — so a
//! plot can always be regenerated from its report.

use ncg_core::eval::{BinRow, Histogram};

const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const PLOT_W: f64 = 560.0;
const PLOT_H: f64 = 200.0;
const TITLE_H: f64 = 28.0;
const AXIS_H: f64 = 40.0;
const PANEL_H: f64 = TITLE_H + PLOT_H + AXIS_H;
const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

/// One polyline of an accuracy-vs-level chart.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// One stacked chart of an SVG document.
pub enum Panel {
    Histogram { title: String, histogram: Histogram },
    Bars { title: String, rows: Vec<BinRow> },
    Lines { title: String, series: Vec<Series> },
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, label: &str) {
    out.push_str(&format!(
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"monospace\" font-size=\"11\" \
         text-anchor=\"{anchor}\" fill=\"#333333\">{}</text>\n",
        esc(label)
    ));
}

fn frame(out: &mut String, top: f64) {
    out.push_str(&format!(
        "<rect x=\"{MARGIN_L:.2}\" y=\"{:.2}\" width=\"{PLOT_W:.2}\" height=\"{PLOT_H:.2}\" \
         fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n",
        top + TITLE_H
    ));
}

fn render_histogram(out: &mut String, top: f64, title: &str, h: &Histogram) {
    text(out, MARGIN_L, top + 16.0, "start", title);
    frame(out, top);
    let plot_top = top + TITLE_H;
    let max_count = h.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let bins = h.counts.len().max(1) as f64;
    let bar_w = PLOT_W / bins;
    for (i, &count) in h.counts.iter().enumerate() {
        let height = PLOT_H * count as f64 / max_count;
        let x = MARGIN_L + i as f64 * bar_w;
        let y = plot_top + PLOT_H - height;
        out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{height:.2}\" \
             fill=\"#1f77b4\" stroke=\"none\"/>\n",
            bar_w.max(1.0) - 1.0
        ));
    }
    let axis = if h.log10 { "log10 value" } else { "value" };
    text(out, MARGIN_L, plot_top + PLOT_H + 16.0, "start", &format!("{:.3}", h.lo));
    text(
        out,
        MARGIN_L + PLOT_W,
        plot_top + PLOT_H + 16.0,
        "end",
        &format!("{:.3}", h.hi),
    );
    text(out, MARGIN_L + PLOT_W / 2.0, plot_top + PLOT_H + 30.0, "middle", axis);
    text(out, MARGIN_L - 6.0, plot_top + 10.0, "end", &format!("{}", max_count as u64));
    text(out, MARGIN_L - 6.0, plot_top + PLOT_H, "end", "0");
}

fn render_bars(out: &mut String, top: f64, title: &str, rows: &[BinRow]) {
    text(out, MARGIN_L, top + 16.0, "start", title);
    frame(out, top);
    let plot_top = top + TITLE_H;
    let n = rows.len().max(1) as f64;
    let slot = PLOT_W / n;
    for row in rows {
        let acc = row.ncg_accuracy.unwrap_or(0.0);
        let height = PLOT_H * acc;
        let x = MARGIN_L + row.bin as f64 * slot + slot * 0.15;
        let y = plot_top + PLOT_H - height;
        out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{height:.2}\" \
             fill=\"#2ca02c\" stroke=\"none\"/>\n",
            slot * 0.7
        ));
        let label = match row.ncg_accuracy {
            Some(a) => format!("{a:.2}"),
            None => "n/a".to_string(),
        };
        text(out, x + slot * 0.35, (y - 4.0).max(plot_top + 10.0), "middle", &label);
        text(
            out,
            MARGIN_L + row.bin as f64 * slot + slot / 2.0,
            plot_top + PLOT_H + 16.0,
            "middle",
            &format!("bin {} (n={})", row.bin, row.count),
        );
    }
    text(out, MARGIN_L - 6.0, plot_top + 10.0, "end", "1.0");
    text(out, MARGIN_L - 6.0, plot_top + PLOT_H, "end", "0.0");
}

fn render_lines(out: &mut String, top: f64, title: &str, series: &[Series]) {
    text(out, MARGIN_L, top + 16.0, "start", title);
    frame(out, top);
    let plot_top = top + TITLE_H;
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let x_lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let to_x = |v: f64| MARGIN_L + PLOT_W * (v - x_lo) / span;
    let to_y = |v: f64| plot_top + PLOT_H * (1.0 - v.clamp(0.0, 1.0));
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        if let Some(&(x, y)) = s.points.last() {
            let mut anchor_y = to_y(y) - 4.0;
            anchor_y -= 12.0 * (idx % 2) as f64;
            text(out, to_x(x).min(MARGIN_L + PLOT_W), anchor_y, "end", &s.name);
        }
    }
    text(out, MARGIN_L, plot_top + PLOT_H + 16.0, "start", &format!("{x_lo:.0}"));
    text(out, MARGIN_L + PLOT_W, plot_top + PLOT_H + 16.0, "end", &format!("{x_hi:.0}"));
    text(out, MARGIN_L + PLOT_W / 2.0, plot_top + PLOT_H + 30.0, "middle", "level");
    text(out, MARGIN_L - 6.0, plot_top + 10.0, "end", "1.0");
    text(out, MARGIN_L - 6.0, plot_top + PLOT_H, "end", "0.0");
}

/// Renders panels stacked vertically into one standalone SVG document.
pub fn render(panels: &[Panel]) -> String {
    let width = MARGIN_L + PLOT_W + MARGIN_R;
    let height = PANEL_H * panels.len().max(1) as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    );
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    ));
    for (idx, panel) in panels.iter().enumerate() {
        let top = idx as f64 * PANEL_H;
        match panel {
            Panel::Histogram { title, histogram } => render_histogram(&mut out, top, title, histogram),
            Panel::Bars { title, rows } => render_bars(&mut out, top, title, rows),
            Panel::Lines { title, series } => render_lines(&mut out, top, title, series),
        }
    }
    out.push_str("</svg>\n");
    out
}
