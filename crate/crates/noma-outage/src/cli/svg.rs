//! Minimal static SVG line plots with a log y axis.
//!
//! Good enough for eyeballing outage curves; not a charting library.  Output
//! is plain text assembled in a fixed order so identical inputs give
//! identical bytes.

use std::fmt::Write as _;

pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Index into the palette.
    pub color: usize,
    /// Index into the dash table (0 = solid).
    pub dash: usize,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];
const DASHES: [&str; 5] = ["", "7 3", "2 3", "9 3 2 3", "4 2"];

const W: f64 = 880.0;
const H: f64 = 560.0;
const ML: f64 = 72.0;
const MR: f64 = 250.0;
const MT: f64 = 44.0;
const MB: f64 = 52.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn si(v: f64) -> String {
    // Fixed short form for tick labels.
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v}");
        if s.len() <= 6 {
            s
        } else {
            format!("{v:.3}")
        }
    } else {
        format!("{v:e}")
    }
}

/// Render a log-y line plot.  Points with y <= 0 are dropped (splitting the
/// polyline); series with no positive points still appear in the legend.
pub fn render_log_plot(title: &str, x_label: &str, y_label: &str, series: &[PlotSeries]) -> String {
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
            }
            if y.is_finite() && y > 0.0 {
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if !x_min.is_finite() || x_min == x_max {
        x_min -= 1.0;
        x_max = x_min + 2.0;
    }
    if !y_min.is_finite() {
        y_min = 1e-6;
        y_max = 1.0;
    }
    // Snap the y range to decades, keep it at least one decade tall, and
    // never plot below 1e-12.
    let mut lo = y_min.log10().floor();
    let mut hi = y_max.log10().ceil();
    if lo < -12.0 {
        lo = -12.0;
    }
    if hi <= lo {
        hi = lo + 1.0;
    }

    let px = |x: f64| ML + (x - x_min) / (x_max - x_min) * (W - ML - MR);
    let py = |y: f64| {
        let t = (y.log10() - lo) / (hi - lo);
        H - MB - t * (H - MT - MB)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        ML + (W - ML - MR) / 2.0,
        esc(title)
    );

    // Decade gridlines and y tick labels.
    let mut d = lo as i64;
    while d <= hi as i64 {
        let y = py(10f64.powi(d as i32));
        let _ = writeln!(
            svg,
            "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>",
            W - MR
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">1e{d}</text>",
            ML - 6.0,
            y + 4.0
        );
        d += 1;
    }
    // X ticks: at most 9 evenly spaced over the data range.
    let ticks = 8usize;
    for i in 0..=ticks {
        let x = x_min + (x_max - x_min) * i as f64 / ticks as f64;
        let xp = px(x);
        let _ = writeln!(
            svg,
            "<line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>",
            MT,
            H - MB
        );
        let _ = writeln!(
            svg,
            "<text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
            H - MB + 16.0,
            si(x)
        );
    }
    // Frame and axis labels.
    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>",
        W - ML - MR,
        H - MT - MB
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        ML + (W - ML - MR) / 2.0,
        H - 12.0,
        esc(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
transform=\"rotate(-90 18 {:.1})\">{}</text>",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        esc(y_label)
    );

    // Series: split polylines at nonpositive y.
    for s in series {
        let color = PALETTE[s.color % PALETTE.len()];
        let dash = DASHES[s.dash % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, svg: &mut String| {
            if seg.len() >= 2 {
                let _ = writeln!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
stroke-width=\"1.6\"{dash_attr}/>",
                    seg.join(" ")
                );
            } else if seg.len() == 1 {
                let xy: Vec<&str> = seg[0].split(',').collect();
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>",
                    xy[0], xy[1]
                );
            }
            seg.clear();
        };
        for &(x, y) in &s.points {
            if y.is_finite() && y > 0.0 && x.is_finite() {
                segment.push(format!("{:.2},{:.2}", px(x), py(y.max(1e-12))));
            } else {
                flush(&mut segment, &mut svg);
            }
        }
        flush(&mut segment, &mut svg);
    }

    // Legend in the right margin.
    let lx = W - MR + 14.0;
    for (i, s) in series.iter().enumerate() {
        let y = MT + 10.0 + 18.0 * i as f64;
        let color = PALETTE[s.color % PALETTE.len()];
        let dash = DASHES[s.dash % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let _ = writeln!(
            svg,
            "<line x1=\"{lx}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{color}\" \
stroke-width=\"1.6\"{dash_attr}/>",
            lx + 26.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>",
            lx + 32.0,
            y + 4.0,
            esc(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Vec<PlotSeries> {
        vec![
            PlotSeries {
                label: "a".into(),
                points: vec![(0.0, 1e-1), (10.0, 1e-3), (20.0, 1e-5)],
                color: 0,
                dash: 0,
            },
            PlotSeries {
                label: "b & c".into(),
                points: vec![(0.0, 0.0), (10.0, 1e-2), (20.0, 1e-4)],
                color: 1,
                dash: 1,
            },
        ]
    }

    #[test]
    fn render_is_deterministic_and_well_formed() {
        let a = render_log_plot("t", "x", "y", &demo());
        let b = render_log_plot("t", "x", "y", &demo());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains("b &amp; c"));
    }

    #[test]
    fn nonpositive_points_are_dropped() {
        let s = vec![PlotSeries {
            label: "z".into(),
            points: vec![(0.0, 1e-2), (5.0, 0.0), (10.0, 1e-3), (15.0, 1e-4)],
            color: 0,
            dash: 0,
        }];
        let svg = render_log_plot("t", "x", "y", &s);
        // The zero splits the line: one lone point becomes a circle, the
        // remaining two form a polyline.
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn all_zero_series_still_renders_frame() {
        let s = vec![PlotSeries {
            label: "flat".into(),
            points: vec![(0.0, 0.0), (1.0, 0.0)],
            color: 0,
            dash: 0,
        }];
        let svg = render_log_plot("t", "x", "y", &s);
        assert!(svg.contains("<rect"));
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("flat"));
    }
}
