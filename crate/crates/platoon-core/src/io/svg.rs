//! Deterministic SVG rendering: line charts for time series and cell grids
//! for stability maps.
//!
//! Layout is fixed (no measurement-dependent or randomized placement) and
//! coordinates are formatted with a fixed precision, so the same input
//! always produces the same bytes.

use std::fmt::Write as _;

use crate::stability::{CellState, StabilityMap};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 48.0;

/// Line colors, cycled across series.
const PALETTE: [&str; 8] = [
    "#1c7ed6", "#e8590c", "#2f9e44", "#c2255c", "#7048e8", "#0b7285", "#9c36b5", "#5c7cfa",
];

/// One polyline on a chart.
#[derive(Debug, Clone)]
pub struct Series {
    /// Legend text, e.g. `Vehicle 0` or `Cars 0-1`.
    pub label: String,
    /// (x, y) samples in data units; rendered in order.
    pub points: Vec<(f64, f64)>,
}

/// A complete chart request.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Nothing to draw: a chart needs at least one nonempty series.
#[derive(Debug)]
pub struct EmptyPlot;

impl std::fmt::Display for EmptyPlot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "nothing to plot: every series is empty")
    }
}

impl std::error::Error for EmptyPlot {}

// Fixed-precision coordinate text keeps the output byte-stable.
fn coord(v: f64) -> String {
    format!("{v:.2}")
}

// Tick labels: trimmed fixed-precision decimal.
fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // Degenerate span: pad so a constant series sits mid-plot.
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders a line chart to SVG text.
///
/// One polyline per series, palette colors in series order, legend on the
/// right with the series labels verbatim.
pub fn line_chart_svg(chart: &LineChart) -> Result<String, EmptyPlot> {
    if chart.series.iter().all(|s| s.points.is_empty()) {
        return Err(EmptyPlot);
    }
    let (x0, x1) = data_range(chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = data_range(chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>",
        coord(MARGIN_L + pw / 2.0),
        xml_escape(&chart.title)
    );

    // Frame and ticks: 6 divisions per axis.
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#495057\"/>",
        coord(MARGIN_L),
        coord(MARGIN_T),
        coord(pw),
        coord(ph)
    );
    for k in 0..=6 {
        let fx = x0 + (x1 - x0) * (k as f64) / 6.0;
        let px = sx(fx);
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ced4da\" \
             stroke-width=\"0.5\"/>",
            coord(px),
            coord(MARGIN_T),
            coord(MARGIN_T + ph)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>",
            coord(px),
            coord(HEIGHT - MARGIN_B + 16.0),
            tick_label(fx)
        );
        let fy = y0 + (y1 - y0) * (k as f64) / 6.0;
        let py = sy(fy);
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#ced4da\" \
             stroke-width=\"0.5\"/>",
            coord(MARGIN_L),
            coord(MARGIN_L + pw),
            coord(py)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>",
            coord(MARGIN_L - 6.0),
            coord(py + 4.0),
            tick_label(fy)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>",
        coord(MARGIN_L + pw / 2.0),
        coord(HEIGHT - 8.0),
        xml_escape(&chart.x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
        coord(MARGIN_T + ph / 2.0),
        coord(MARGIN_T + ph / 2.0),
        xml_escape(&chart.y_label)
    );

    for (si, series) in chart.series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if !series.points.is_empty() {
            let mut path = String::new();
            for &(x, y) in &series.points {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                if !path.is_empty() {
                    path.push(' ');
                }
                let _ = write!(path, "{},{}", coord(sx(x)), coord(sy(y)));
            }
            let _ = writeln!(
                out,
                "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.2\"/>"
            );
        }
        // Legend entry: swatch line plus label.
        let ly = MARGIN_T + 14.0 + 20.0 * si as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>",
            coord(WIDTH - MARGIN_R + 10.0),
            coord(ly),
            coord(WIDTH - MARGIN_R + 34.0),
            coord(ly),
            color
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            coord(WIDTH - MARGIN_R + 40.0),
            coord(ly + 4.0),
            xml_escape(&series.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn cell_color(state: CellState) -> &'static str {
    match state {
        CellState::Stable => "#2f9e44",
        CellState::Unstable => "#e03131",
        CellState::Undefined => "#adb5bd",
    }
}

/// Renders a stability map as a colored cell grid.
///
/// Two-axis maps render whole; maps with a third axis render the slice at
/// that axis' middle index, noted in the subtitle.
pub fn map_svg(map: &StabilityMap<f64>) -> Result<String, EmptyPlot> {
    if map.values.is_empty() || map.axes.len() < 2 {
        return Err(EmptyPlot);
    }
    let ax = &map.axes[0];
    let ay = &map.axes[1];
    let slice = if map.axes.len() > 2 { Some(map.axes[2].resolution / 2) } else { None };

    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let cw = pw / ax.resolution as f64;
    let ch = ph / ay.resolution as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let title = match slice {
        Some(k) => format!(
            "{} map ({} = {})",
            map.condition,
            map.axes[2].name,
            tick_label(map.axes[2].value(k))
        ),
        None => format!("{} map", map.condition),
    };
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>",
        coord(MARGIN_L + pw / 2.0),
        xml_escape(&title)
    );

    // First axis runs along x, second along y (low values at the bottom).
    for i in 0..ax.resolution {
        for j in 0..ay.resolution {
            let mut coords = vec![i, j];
            if let Some(k) = slice {
                coords.push(k);
            }
            let state = map.mask[map.index(&coords)];
            let x = MARGIN_L + i as f64 * cw;
            let y = HEIGHT - MARGIN_B - (j + 1) as f64 * ch;
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                coord(x),
                coord(y),
                coord(cw + 0.5),
                coord(ch + 0.5),
                cell_color(state)
            );
        }
    }

    // Axis tick labels.
    for t in 0..=6 {
        let fx = ax.min + (ax.max - ax.min) * (t as f64) / 6.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>",
            coord(MARGIN_L + pw * (t as f64) / 6.0),
            coord(HEIGHT - MARGIN_B + 16.0),
            tick_label(fx)
        );
        let fy = ay.min + (ay.max - ay.min) * (t as f64) / 6.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>",
            coord(MARGIN_L - 6.0),
            coord(HEIGHT - MARGIN_B - ph * (t as f64) / 6.0 + 4.0),
            tick_label(fy)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>",
        coord(MARGIN_L + pw / 2.0),
        coord(HEIGHT - 8.0),
        xml_escape(&ax.name)
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
        coord(MARGIN_T + ph / 2.0),
        coord(MARGIN_T + ph / 2.0),
        xml_escape(&ay.name)
    );

    // Legend.
    for (si, (state, label)) in [
        (CellState::Stable, "stable"),
        (CellState::Unstable, "unstable"),
        (CellState::Undefined, "undefined"),
    ]
    .into_iter()
    .enumerate()
    {
        let ly = MARGIN_T + 14.0 + 20.0 * si as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"14\" fill=\"{}\"/>",
            coord(WIDTH - MARGIN_R + 10.0),
            coord(ly - 10.0),
            cell_color(state)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            coord(WIDTH - MARGIN_R + 30.0),
            coord(ly + 2.0),
            label
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{build_stability_map, MapCondition, MapRequest};

    fn chart(points: Vec<Vec<(f64, f64)>>) -> LineChart {
        LineChart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: points
                .into_iter()
                .enumerate()
                .map(|(i, p)| Series { label: format!("Vehicle {i}"), points: p })
                .collect(),
        }
    }

    #[test]
    fn constant_series_is_one_horizontal_polyline() {
        let svg = line_chart_svg(&chart(vec![vec![(0.0, 5.0), (1.0, 5.0), (2.0, 5.0)]])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        // All y coordinates on the polyline identical.
        let seg = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let ys: Vec<&str> = seg.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]), "ys: {ys:?}");
    }

    #[test]
    fn two_series_get_two_polylines_and_legend_entries() {
        let svg = line_chart_svg(&chart(vec![
            vec![(0.0, 1.0), (1.0, 2.0)],
            vec![(0.0, 2.0), (1.0, 1.0)],
        ]))
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">Vehicle 0<"));
        assert!(svg.contains(">Vehicle 1<"));
    }

    #[test]
    fn byte_identical_across_invocations() {
        let c = chart(vec![vec![(0.0, 1.0), (0.5, -2.5), (1.0, 0.25)]]);
        assert_eq!(line_chart_svg(&c).unwrap(), line_chart_svg(&c).unwrap());
    }

    #[test]
    fn empty_chart_is_an_error() {
        assert!(line_chart_svg(&chart(vec![])).is_err());
        assert!(line_chart_svg(&chart(vec![vec![]])).is_err());
    }

    #[test]
    fn map_renders_every_cell_once() {
        let req = MapRequest::with_defaults(MapCondition::OvmMetric, 5);
        let map = build_stability_map(&req).unwrap();
        let svg = map_svg(&map).unwrap();
        // 25 cell rects, plus background and 3 legend swatches.
        assert_eq!(svg.matches("<rect").count(), 25 + 1 + 3);
        assert_eq!(map_svg(&map).unwrap(), svg);
    }

    #[test]
    fn three_axis_map_renders_middle_slice() {
        let req = MapRequest::with_defaults(MapCondition::CaccDelayMargin, 4);
        let map = build_stability_map(&req).unwrap();
        let svg = map_svg(&map).unwrap();
        assert_eq!(svg.matches("<rect").count(), 16 + 1 + 3);
        assert!(svg.contains("map ("), "subtitle should note the slice: {svg}");
    }
}
