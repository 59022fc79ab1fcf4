//! Minimal, dependency-free scatter plots of base-versus-variant
//! percentile rankings, emitted as JSON point lists and as SVG with
//! threshold gridlines at 20/40/60/80.

use serde::Serialize;

use crate::sensitivity::{Direction, VariantRun};

const THRESHOLDS: [f64; 4] = [20.0, 40.0, 60.0, 80.0];

/// One plotted unit.
#[derive(Debug, Clone, Serialize)]
pub struct ScatterPoint {
    pub unit_id: String,
    pub x: f64,
    pub y: f64,
    pub class: Direction,
}

/// The JSON plot-data document for one run.
#[derive(Debug, Clone, Serialize)]
pub struct PlotData {
    pub x_label: String,
    pub y_label: String,
    pub thresholds: Vec<f64>,
    pub points: Vec<ScatterPoint>,
}

/// Pull plottable points out of a run: x = base percentile, y = variant
/// percentile, class = quintile transition direction.
pub fn plot_data(run: &VariantRun) -> PlotData {
    let points = run
        .pairing
        .iter()
        .map(|p| ScatterPoint {
            unit_id: p.unit_id.clone(),
            x: p.base_percentile,
            y: p.variant_percentile,
            class: Direction::of(p.base_quintile, p.variant_quintile),
        })
        .collect();
    PlotData {
        x_label: run.base_label.clone(),
        y_label: run.variant_label.clone(),
        thresholds: THRESHOLDS.to_vec(),
        points,
    }
}

fn class_color(direction: Direction) -> &'static str {
    match direction {
        Direction::Increase => "#2e8540",
        Direction::Decrease => "#d9a514",
        Direction::NoChange => "#9b9b9b",
    }
}

/// Render a plot-data document as a self-contained SVG scatter. Both axes
/// run 0..100 with gridlines at the quintile thresholds. Output is
/// byte-deterministic for identical input.
pub fn scatter_svg(data: &PlotData) -> String {
    const SIZE: f64 = 440.0;
    const MARGIN: f64 = 50.0;
    let span = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + span * v / 100.0;
    let sy = |v: f64| SIZE - MARGIN - span * v / 100.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for t in THRESHOLDS {
        let x = sx(t);
        let y = sy(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{top:.2}\" x2=\"{x:.2}\" y2=\"{bottom:.2}\" \
             stroke=\"#d0d0d0\" stroke-width=\"1\"/>\n",
            top = sy(100.0),
            bottom = sy(0.0),
        ));
        svg.push_str(&format!(
            "<line x1=\"{left:.2}\" y1=\"{y:.2}\" x2=\"{right:.2}\" y2=\"{y:.2}\" \
             stroke=\"#d0d0d0\" stroke-width=\"1\"/>\n",
            left = sx(0.0),
            right = sx(100.0),
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{base:.2}\" font-size=\"10\" text-anchor=\"middle\" \
             fill=\"#555\">{t:.0}</text>\n",
            base = sy(0.0) + 14.0,
        ));
        svg.push_str(&format!(
            "<text x=\"{left:.2}\" y=\"{y:.2}\" font-size=\"10\" text-anchor=\"end\" \
             fill=\"#555\">{t:.0}</text>\n",
            left = sx(0.0) - 6.0,
        ));
    }

    // axes
    svg.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"#333\" \
         stroke-width=\"1\"/>\n<line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" \
         stroke=\"#333\" stroke-width=\"1\"/>\n",
        l = sx(0.0),
        r = sx(100.0),
        t = sy(100.0),
        b = sy(0.0),
    ));

    for point in &data.points {
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\" \
             fill-opacity=\"0.75\"><title>{id}</title></circle>\n",
            x = sx(point.x.clamp(0.0, 100.0)),
            y = sy(point.y.clamp(0.0, 100.0)),
            color = class_color(point.class),
            id = xml_escape(&point.unit_id),
        ));
    }

    svg.push_str(&format!(
        "<text x=\"{cx:.2}\" y=\"{by:.2}\" font-size=\"12\" text-anchor=\"middle\" \
         fill=\"#222\">{x_label}</text>\n",
        cx = sx(50.0),
        by = SIZE - 10.0,
        x_label = xml_escape(&data.x_label),
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{cy:.2}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\" \
         transform=\"rotate(-90 14 {cy:.2})\">{y_label}</text>\n",
        cy = sy(50.0),
        y_label = xml_escape(&data.y_label),
    ));
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensitivity::PairedScore;

    fn toy_run() -> VariantRun {
        VariantRun {
            base_label: "base".to_string(),
            variant_label: "alt".to_string(),
            scale: "nta".to_string(),
            pairing: vec![
                PairedScore {
                    unit_id: "A".to_string(),
                    base_percentile: 10.0,
                    variant_percentile: 90.0,
                    base_quintile: 1,
                    variant_quintile: 5,
                },
                PairedScore {
                    unit_id: "B".to_string(),
                    base_percentile: 50.0,
                    variant_percentile: 50.0,
                    base_quintile: 3,
                    variant_quintile: 3,
                },
            ],
            excluded: Vec::new(),
        }
    }

    #[test]
    fn plot_data_classifies_points() {
        let data = plot_data(&toy_run());
        assert_eq!(data.points.len(), 2);
        assert_eq!(data.points[0].class, Direction::Increase);
        assert_eq!(data.points[1].class, Direction::NoChange);
        assert_eq!(data.thresholds, vec![20.0, 40.0, 60.0, 80.0]);
    }

    #[test]
    fn svg_is_deterministic_and_has_gridlines() {
        let data = plot_data(&toy_run());
        let a = scatter_svg(&data);
        let b = scatter_svg(&data);
        assert_eq!(a, b);
        assert!(a.contains("<svg"));
        // 4 vertical + 4 horizontal gridlines plus 2 axes
        assert_eq!(a.matches("<line").count(), 10);
        assert_eq!(a.matches("<circle").count(), 2);
    }
}
