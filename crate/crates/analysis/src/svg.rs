//! Self-contained SVG scatter rendering; no plotting dependency. CSV is the
//! canonical data product, these figures are the convenience view.

use crate::logits::LogitPair;
use crate::saturation::SaturationRow;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Draw the x = -y guide line through the origin.
    pub antidiagonal_guide: bool,
}

const PANEL: f64 = 300.0;
const MARGIN: f64 = 55.0;
const HEADER: f64 = 34.0;

/// Renders panels side by side into one standalone SVG document.
pub fn render_panels(title: &str, panels: &[Panel]) -> String {
    let width = panels.len() as f64 * (PANEL + 2.0 * MARGIN);
    let height = PANEL + 2.0 * MARGIN + HEADER;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.0} {height:.0}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        width / 2.0,
        escape(title)
    ));
    for (i, panel) in panels.iter().enumerate() {
        let ox = i as f64 * (PANEL + 2.0 * MARGIN) + MARGIN;
        let oy = HEADER + MARGIN;
        render_panel(&mut out, panel, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}

fn render_panel(out: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let points: Vec<(f64, f64)> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    let (x_min, x_max) = padded_range(points.iter().map(|p| p.0));
    let (y_min, y_max) = padded_range(points.iter().map(|p| p.1));
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            ox + (x - x_min) / (x_max - x_min) * PANEL,
            oy + PANEL - (y - y_min) / (y_max - y_min) * PANEL,
        )
    };

    out.push_str(&format!(
        "<rect x=\"{ox:.1}\" y=\"{oy:.1}\" width=\"{PANEL:.0}\" height=\"{PANEL:.0}\" \
         fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        ox + PANEL / 2.0,
        oy - 10.0,
        escape(&panel.title)
    ));

    // Ticks: five per axis, labels outside the frame.
    for k in 0..5 {
        let f = k as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        let (tx, _) = to_px(xv, y_min);
        let (_, ty) = to_px(x_min, yv);
        out.push_str(&format!(
            "<line x1=\"{tx:.1}\" y1=\"{:.1}\" x2=\"{tx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            oy + PANEL,
            oy + PANEL + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{tx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            oy + PANEL + 18.0,
            tick(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ty:.1}\" x2=\"{ox:.1}\" y2=\"{ty:.1}\" stroke=\"black\"/>\n",
            ox - 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ox - 8.0,
            ty + 4.0,
            tick(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        ox + PANEL / 2.0,
        oy + PANEL + 36.0,
        escape(&panel.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 {:.1} {:.1})\">{}</text>\n",
        ox - 38.0,
        oy + PANEL / 2.0,
        ox - 38.0,
        oy + PANEL / 2.0,
        escape(&panel.y_label)
    ));

    if panel.antidiagonal_guide {
        // Clip x = -y to the visible range.
        let lo = x_min.max(-y_max);
        let hi = x_max.min(-y_min);
        if lo < hi {
            let (x1, y1) = to_px(lo, -lo);
            let (x2, y2) = to_px(hi, -hi);
            out.push_str(&format!(
                "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" \
                 stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n"
            ));
        }
    }

    for series in &panel.series {
        for &(x, y) in &series.points {
            let (px, py) = to_px(x, y);
            out.push_str(&format!(
                "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"2.2\" fill=\"{}\" fill-opacity=\"0.6\"/>\n",
                series.color
            ));
        }
    }

    // Legend, top-left inside the frame.
    for (k, series) in panel.series.iter().enumerate() {
        let ly = oy + 16.0 + 16.0 * k as f64;
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{}\"/>\n",
            ox + 12.0,
            ly - 4.0,
            series.color
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            ox + 20.0,
            ly,
            escape(&series.label)
        ));
    }
}

/// The three-panel logit figure: clean scatter, perturbed scatter, and the
/// per-sample shift, points split by predicted class.
pub fn logit_figure(pairs: &[LogitPair], shifts: &[(f64, f64)], attack_name: &str) -> String {
    let by_prediction = |records: Vec<(&crate::logits::LogitRecord,)>| -> Vec<Series> {
        let mut class0 = Vec::new();
        let mut class1 = Vec::new();
        for (r,) in records {
            if r.predicted_label == 0 {
                class0.push(r.z);
            } else {
                class1.push(r.z);
            }
        }
        vec![
            Series {
                label: "predicted 0".to_string(),
                color: "#d62728",
                points: class0,
            },
            Series {
                label: "predicted 1".to_string(),
                color: "#1f77b4",
                points: class1,
            },
        ]
    };

    let mut panels = vec![Panel {
        title: "(a) clean logits".to_string(),
        x_label: "z0".to_string(),
        y_label: "z1".to_string(),
        series: by_prediction(pairs.iter().map(|p| (&p.clean,)).collect()),
        antidiagonal_guide: true,
    }];
    if pairs.iter().any(|p| p.perturbed.is_some()) {
        panels.push(Panel {
            title: format!("(b) after {attack_name}"),
            x_label: "z0".to_string(),
            y_label: "z1".to_string(),
            series: by_prediction(
                pairs
                    .iter()
                    .filter_map(|p| p.perturbed.as_ref().map(|r| (r,)))
                    .collect(),
            ),
            antidiagonal_guide: true,
        });
        panels.push(Panel {
            title: "(c) perturbation shift".to_string(),
            x_label: "dz0".to_string(),
            y_label: "dz1".to_string(),
            series: vec![Series {
                label: "shift".to_string(),
                color: "#2ca02c",
                points: shifts.to_vec(),
            }],
            antidiagonal_guide: false,
        });
    }
    render_panels(&format!("logit plane, {attack_name}"), &panels)
}

/// Two-panel softmax comparison: each sample at its (P0, P1) point.
pub fn saturation_figure(rows: &[SaturationRow]) -> String {
    let to_points = |f: &dyn Fn(&SaturationRow) -> (f64, usize)| -> Vec<Series> {
        let mut class0 = Vec::new();
        let mut class1 = Vec::new();
        for row in rows {
            let (max, predicted) = f(row);
            let point = if predicted == 0 {
                (max, 1.0 - max)
            } else {
                (1.0 - max, max)
            };
            if predicted == 0 {
                class0.push(point);
            } else {
                class1.push(point);
            }
        }
        vec![
            Series {
                label: "predicted 0".to_string(),
                color: "#d62728",
                points: class0,
            },
            Series {
                label: "predicted 1".to_string(),
                color: "#1f77b4",
                points: class1,
            },
        ]
    };
    let panels = vec![
        Panel {
            title: "(a) plain softmax".to_string(),
            x_label: "P0".to_string(),
            y_label: "P1".to_string(),
            series: to_points(&|r| (r.plain_max, r.plain_predicted)),
            antidiagonal_guide: false,
        },
        Panel {
            title: "(b) distilled softmax".to_string(),
            x_label: "P0".to_string(),
            y_label: "P1".to_string(),
            series: to_points(&|r| (r.distilled_max, r.distilled_predicted)),
            antidiagonal_guide: false,
        },
    ];
    render_panels("softmax saturation", &panels)
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (-1.0, 1.0);
    }
    let span = (max - min).max(1e-9);
    (min - 0.05 * span, max + 0.05 * span)
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
