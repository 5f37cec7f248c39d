//! Self-contained SVG rendering for histograms: bars, axes, and vertical
//! reference marks, no plotting dependency.

use std::fmt::Write as _;

use crate::mc::Histogram;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 200.0;
const GAP: f64 = 18.0;
const MARGIN_LEFT: f64 = 52.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 26.0;
const MARGIN_BOTTOM: f64 = 32.0;

pub struct Panel<'a> {
    pub title: String,
    pub histogram: &'a Histogram,
    /// vertical reference lines in data coordinates (target atoms)
    pub marks: Vec<f64>,
}

/// Renders one SVG document with the panels stacked vertically.
pub fn histogram_svg(panels: &[Panel]) -> String {
    let total_h = panels.len() as f64 * (PANEL_HEIGHT + GAP) + GAP;
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {total_h}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let _ = write!(s, "<rect width=\"{WIDTH}\" height=\"{total_h}\" fill=\"white\"/>\n");
    for (pi, panel) in panels.iter().enumerate() {
        let top = GAP + pi as f64 * (PANEL_HEIGHT + GAP);
        render_panel(&mut s, panel, top);
    }
    s.push_str("</svg>\n");
    s
}

fn render_panel(s: &mut String, panel: &Panel, top: f64) {
    let h = panel.histogram;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x0 = MARGIN_LEFT;
    let y0 = top + MARGIN_TOP;
    let y_base = y0 + plot_h;
    let max_mass = h.masses.iter().cloned().fold(0.0_f64, f64::max).max(1e-12);
    let x_of = |v: f64| x0 + (v - h.lo) / (h.hi - h.lo) * plot_w;

    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
        x0,
        y0 - 8.0,
        escape(&panel.title)
    );
    let _ = write!(
        s,
        "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" \
         fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n"
    );

    let bar_w = plot_w / h.bins() as f64;
    for (i, &m) in h.masses.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        let bh = m / max_mass * plot_h;
        let _ = write!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#5b8bd0\" stroke=\"none\"/>\n",
            x0 + i as f64 * bar_w,
            y_base - bh,
            bar_w,
            bh
        );
    }

    for &mark in &panel.marks {
        if mark < h.lo || mark > h.hi {
            continue;
        }
        let x = x_of(mark);
        let _ = write!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{y_base:.2}\" \
             stroke=\"#c0392b\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n"
        );
    }

    for t in 0..=5 {
        let v = h.lo + (h.hi - h.lo) * t as f64 / 5.0;
        let x = x_of(v);
        let _ = write!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{y_base:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#444\" stroke-width=\"1\"/>\n",
            y_base + 4.0
        );
        let _ = write!(
            s,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{v:.1}</text>\n",
            y_base + 16.0
        );
    }
    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{max_mass:.3}</text>\n",
        x0 - 4.0,
        y0 + 10.0
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spike_histogram() -> Histogram {
        let mut values = vec![0.2; 30];
        values.extend(vec![0.8; 20]);
        Histogram::from_values(0.0, 1.0, 0.02, &values)
    }

    #[test]
    fn svg_is_well_formed_and_complete() {
        let h = spike_histogram();
        let svg = histogram_svg(&[Panel {
            title: "hurst estimates <test & check>".into(),
            histogram: &h,
            marks: vec![0.2, 0.5, 0.8],
        }]);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("stroke-dasharray").count(), 3);
        // two populated bins, one frame, one background
        assert_eq!(svg.matches("<rect ").count(), 4);
        assert!(svg.contains("&lt;test &amp; check&gt;"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn panels_stack_and_marks_outside_range_are_dropped() {
        let h = spike_histogram();
        let svg = histogram_svg(&[
            Panel { title: "a".into(), histogram: &h, marks: vec![0.5] },
            Panel { title: "b".into(), histogram: &h, marks: vec![1.4, 2.0] },
        ]);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        assert_eq!(svg.matches("fill=\"none\"").count(), 2);
    }

    #[test]
    fn empty_histogram_renders_frame_only() {
        let h = Histogram::from_values(0.0, 1.0, 0.02, &[]);
        let svg = histogram_svg(&[Panel { title: "empty".into(), histogram: &h, marks: vec![] }]);
        assert_eq!(svg.matches("fill=\"#5b8bd0\"").count(), 0);
        assert!(!svg.contains("NaN"));
    }
}
