//! Minimal SVG line plots: stacked panels, multiple curves per panel,
//! optional shaded error bands, linear or log10 x axes. No dependencies;
//! the output is a single self-contained `<svg>` element.

const WIDTH: f64 = 760.0;
const PANEL_H: f64 = 300.0;
const GAP: f64 = 18.0;
const MARGIN_L: f64 = 68.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 46.0;

const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One curve: points, an optional (lower, upper) band, optional markers.
#[derive(Debug, Clone, Default)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub band: Option<(Vec<f64>, Vec<f64>)>,
    pub markers: bool,
}

impl Series {
    pub fn line(label: &str, xs: Vec<f64>, ys: Vec<f64>) -> Series {
        Series { label: label.to_string(), xs, ys, ..Series::default() }
    }

    pub fn with_band(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Series {
        self.band = Some((lower, upper));
        self
    }

    pub fn with_markers(mut self) -> Series {
        self.markers = true;
        self
    }
}

/// One set of axes with its curves.
#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed horizontal reference line, e.g. the no-squeezing level.
    pub y_ref: Option<f64>,
    /// Plot against log10(x); every x must be positive.
    pub log_x: bool,
}

impl Panel {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Panel {
        Panel {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            ..Panel::default()
        }
    }
}

/// Render panels stacked vertically into one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let height = panels.len() as f64 * (PANEL_H + GAP) + GAP;
    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {height}\" \
         width=\"{WIDTH}\" height=\"{height}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    for (i, panel) in panels.iter().enumerate() {
        let top = GAP + i as f64 * (PANEL_H + GAP);
        render_panel(&mut svg, panel, top);
    }
    svg.push_str("</svg>\n");
    svg
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    fn sy(&self, y: f64) -> f64 {
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &panel.series {
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            let x = if panel.log_x { x.log10() } else { x };
            if x.is_finite() && y.is_finite() {
                xs.push(x);
                ys.push(y);
            }
        }
        if let Some((lo, hi)) = &s.band {
            for &v in lo.iter().chain(hi) {
                if v.is_finite() {
                    ys.push(v);
                }
            }
        }
    }
    if let Some(r) = panel.y_ref {
        ys.push(r);
    }
    let (x0, x1) = padded_range(&xs, false);
    let (y0, y1) = padded_range(&ys, true);
    let frame = Frame {
        x0,
        x1,
        y0,
        y1,
        left: MARGIN_L,
        right: WIDTH - MARGIN_R,
        top: top + MARGIN_T,
        bottom: top + PANEL_H - MARGIN_B,
    };

    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (frame.left + frame.right) / 2.0,
        top + 18.0,
        escape(&panel.title)
    ));

    let x_ticks = if panel.log_x { decade_ticks(x0, x1) } else { ticks(x0, x1) };
    let y_ticks = ticks(y0, y1);
    for (v, label) in &x_ticks {
        let x = frame.sx(*v);
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
            frame.top, frame.bottom
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            frame.bottom + 16.0,
            escape(label)
        ));
    }
    for (v, label) in &y_ticks {
        let y = frame.sy(*v);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n",
            frame.left, frame.right
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            frame.left - 6.0,
            y + 4.0,
            escape(label)
        ));
    }

    if let Some(r) = panel.y_ref {
        let y = frame.sy(r);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#888888\" stroke-dasharray=\"5,4\"/>\n",
            frame.left, frame.right
        ));
    }

    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let to_x = |x: f64| if panel.log_x { x.log10() } else { x };
        if let Some((lo, hi)) = &s.band {
            let mut pts = String::new();
            for (&x, &v) in s.xs.iter().zip(lo) {
                if to_x(x).is_finite() && v.is_finite() {
                    pts.push_str(&format!("{:.1},{:.1} ", frame.sx(to_x(x)), frame.sy(v)));
                }
            }
            for (&x, &v) in s.xs.iter().zip(hi).rev() {
                if to_x(x).is_finite() && v.is_finite() {
                    pts.push_str(&format!("{:.1},{:.1} ", frame.sx(to_x(x)), frame.sy(v)));
                }
            }
            svg.push_str(&format!(
                "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
                pts.trim_end()
            ));
        }
        let mut pts = String::new();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            let x = to_x(x);
            if x.is_finite() && y.is_finite() {
                pts.push_str(&format!("{:.1},{:.1} ", frame.sx(x), frame.sy(y)));
            }
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            pts.trim_end()
        ));
        if s.markers {
            for (&x, &y) in s.xs.iter().zip(&s.ys) {
                let x = to_x(x);
                if x.is_finite() && y.is_finite() {
                    svg.push_str(&format!(
                        "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.6\" fill=\"{color}\"/>\n",
                        frame.sx(x),
                        frame.sy(y)
                    ));
                }
            }
        }
    }

    svg.push_str(&format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>\n",
        frame.left,
        frame.top,
        frame.right - frame.left,
        frame.bottom - frame.top
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
        (frame.left + frame.right) / 2.0,
        top + PANEL_H - 10.0,
        escape(&panel.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (frame.top + frame.bottom) / 2.0,
        (frame.top + frame.bottom) / 2.0,
        escape(&panel.y_label)
    ));

    let labeled = panel.series.iter().filter(|s| !s.label.is_empty()).count();
    if labeled > 1 || (labeled == 1 && panel.series.len() > 1) {
        let mut row = 0;
        for (i, s) in panel.series.iter().enumerate() {
            if s.label.is_empty() {
                continue;
            }
            let color = PALETTE[i % PALETTE.len()];
            let y = frame.top + 14.0 + row as f64 * 16.0;
            let x = frame.right - 150.0;
            svg.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>\n",
                y - 4.0,
                x + 22.0,
                y - 4.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"11\">{}</text>\n",
                x + 28.0,
                escape(&s.label)
            ));
            row += 1;
        }
    }
}

/// Data range padded a little, with a fallback for degenerate spans.
fn padded_range(values: &[f64], pad_flat: bool) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if pad_flat { lo.abs().max(1.0) * 0.1 } else { 0.5 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Tick positions on a nice decimal step, five to eight per axis.
fn ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| span / s <= 8.0)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let mut out = Vec::new();
    let mut k = (lo / step).ceil() as i64;
    while (k as f64) * step <= hi {
        let v = k as f64 * step;
        out.push((v, format!("{:.*}", decimals, v)));
        k += 1;
    }
    out
}

/// Decade ticks for a log10-transformed axis; positions are exponents.
fn decade_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    let mut e = lo.ceil() as i64;
    let stride = (((hi - lo) / 7.0).ceil() as i64).max(1);
    while (e as f64) <= hi {
        out.push((e as f64, format!("1e{e}")));
        e += stride;
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_two_panels_with_band_and_legend() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x / 4.0).sin()).collect();
        let lo: Vec<f64> = ys.iter().map(|y| y - 0.1).collect();
        let hi: Vec<f64> = ys.iter().map(|y| y + 0.1).collect();
        let mut p1 = Panel::new("waves", "z", "amplitude");
        p1.series.push(Series::line("a", xs.clone(), ys.clone()).with_band(lo, hi));
        p1.series.push(Series::line("b", xs.clone(), ys.iter().map(|y| y * 0.5).collect()));
        p1.y_ref = Some(0.0);
        let mut p2 = Panel::new("points", "value", "score");
        p2.series.push(Series::line("", xs, ys).with_markers());
        let svg = render(&[p1, p2]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert!(svg.matches("<polyline").count() >= 3);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(">a</text>"));
        assert!(svg.matches("<circle").count() == 21);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn log_axis_uses_decade_labels() {
        let xs = vec![0.5, 10.0, 1e4, 4e7];
        let ys = vec![1.0, 0.8, 0.6, 0.4];
        let mut p = Panel::new("", "beta", "S");
        p.log_x = true;
        p.series.push(Series::line("", xs, ys).with_markers());
        let svg = render(&[p]);
        assert!(svg.contains("1e0") || svg.contains("1e1"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn flat_series_still_gets_a_finite_window() {
        let xs = vec![0.0, 1.0, 2.0];
        let ys = vec![1.0, 1.0, 1.0];
        let mut p = Panel::new("flat", "z", "S");
        p.series.push(Series::line("", xs, ys));
        let svg = render(&[p]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn non_finite_points_are_dropped_not_rendered() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![1.0, f64::NAN, 2.0, f64::INFINITY];
        let mut p = Panel::new("holes", "x", "y");
        p.series.push(Series::line("", xs, ys));
        let svg = render(&[p]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
