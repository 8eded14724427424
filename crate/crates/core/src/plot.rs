//! Static SVG charts of summary tables: one panel per (setting, estimator),
//! α on the horizontal axis, one grey line per series length (darker for
//! longer series).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::montecarlo::{SummaryRow, SummaryStats};
use crate::series_gen::SettingTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mean,
    Sd,
    Mse,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Sd => "sd",
            Metric::Mse => "mse",
        }
    }

    fn value(self, s: &SummaryStats) -> f64 {
        match self {
            Metric::Mean => s.mean,
            Metric::Sd => s.sd,
            Metric::Mse => s.mse,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(Metric::Mean),
            "sd" => Ok(Metric::Sd),
            "mse" => Ok(Metric::Mse),
            other => Err(Error::invalid(format!("unknown metric `{other}` (expected mean, sd or mse)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub metric: Metric,
    /// Restrict to one setting; `None` draws a row of panels per setting.
    pub setting: Option<SettingTag>,
    /// Reference level drawn on `mean` charts.
    pub true_h: f64,
}

impl PlotSpec {
    pub fn new(metric: Metric) -> Self {
        Self { metric, setting: None, true_h: 0.5 }
    }
}

const PANEL_W: f64 = 260.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 52.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 38.0;
const HEADER: f64 = 34.0;
const LEGEND: f64 = 30.0;

struct Panel<'a> {
    setting: SettingTag,
    estimator: EstimatorId,
    rows: Vec<&'a SummaryRow>,
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.08;
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let raw = (hi - lo) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Grey level for the `i`-th of `n` lengths: light for the shortest.
fn shade(i: usize, n: usize) -> String {
    let t = if n <= 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
    let level = (190.0 - t * 170.0).round() as u8;
    format!("rgb({level},{level},{level})")
}

/// Renders the chart as an SVG document.
pub fn render_svg(rows: &[SummaryRow], spec: &PlotSpec) -> Result<String> {
    let selected: Vec<&SummaryRow> = rows
        .iter()
        .filter(|r| spec.setting.is_none_or(|s| s == r.setting))
        .collect();
    if !selected.iter().any(|r| r.stats.is_some()) {
        return Err(Error::invalid(match spec.setting {
            Some(s) => format!("summary has no populated cells for setting {s}"),
            None => "summary has no populated cells".into(),
        }));
    }
    let settings: BTreeSet<SettingTag> = selected.iter().map(|r| r.setting).collect();
    let estimators: BTreeSet<EstimatorId> = selected.iter().map(|r| r.estimator).collect();
    let lengths: Vec<usize> = selected.iter().map(|r| r.len).collect::<BTreeSet<_>>().into_iter().collect();

    let panels: Vec<Vec<Panel>> = settings
        .iter()
        .map(|&setting| {
            estimators
                .iter()
                .map(|&estimator| Panel {
                    setting,
                    estimator,
                    rows: selected
                        .iter()
                        .copied()
                        .filter(|r| r.setting == setting && r.estimator == estimator)
                        .collect(),
                })
                .collect()
        })
        .collect();

    let (a_lo, a_hi) = selected
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.alpha), hi.max(r.alpha)));
    let (a_lo, a_hi) = nice_range(a_lo, a_hi);

    let n_cols = estimators.len();
    let n_rows = settings.len();
    let cell_w = MARGIN_L + PANEL_W + MARGIN_R;
    let cell_h = MARGIN_T + PANEL_H + MARGIN_B;
    let width = cell_w * n_cols as f64;
    let height = HEADER + cell_h * n_rows as f64 + LEGEND;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} of the estimates against alpha</text>"#,
        width / 2.0,
        spec.metric.as_str()
    );

    for (ri, row) in panels.iter().enumerate() {
        for (ci, panel) in row.iter().enumerate() {
            let ox = ci as f64 * cell_w + MARGIN_L;
            let oy = HEADER + ri as f64 * cell_h + MARGIN_T;
            draw_panel(&mut svg, panel, spec, &lengths, (ox, oy), (a_lo, a_hi));
        }
    }

    let ly = height - LEGEND / 2.0;
    let mut lx = MARGIN_L;
    for (i, len) in lengths.iter().enumerate() {
        let color = shade(i, lengths.len());
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">T = {len}</text>"#,
            lx + 24.0,
            lx + 28.0,
            ly + 4.0
        );
        lx += 100.0;
    }
    if spec.metric == Metric::Mean {
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="red" stroke-width="1.5"/><text x="{}" y="{}">H = {}</text>"#,
            lx + 24.0,
            lx + 28.0,
            ly + 4.0,
            label(spec.true_h)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn draw_panel(
    svg: &mut String,
    panel: &Panel,
    spec: &PlotSpec,
    lengths: &[usize],
    (ox, oy): (f64, f64),
    (a_lo, a_hi): (f64, f64),
) {
    let values: Vec<f64> = panel
        .rows
        .iter()
        .filter_map(|r| r.stats.as_ref().map(|s| spec.metric.value(s)))
        .collect();
    let mut v_lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut v_hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if spec.metric == Metric::Mean {
        v_lo = v_lo.min(spec.true_h);
        v_hi = v_hi.max(spec.true_h);
    } else {
        v_lo = v_lo.min(0.0);
    }
    if !(v_lo.is_finite() && v_hi.is_finite()) {
        (v_lo, v_hi) = (0.0, 1.0);
    }
    let (v_lo, v_hi) = nice_range(v_lo, v_hi);
    let px = |a: f64| ox + (a - a_lo) / (a_hi - a_lo) * PANEL_W;
    let py = |v: f64| oy + PANEL_H - (v - v_lo) / (v_hi - v_lo) * PANEL_H;

    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{} (setting {})</text>"#,
        ox + PANEL_W / 2.0,
        oy - 8.0,
        panel.estimator.as_str().to_ascii_uppercase(),
        panel.setting
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
    );
    for t in ticks(v_lo, v_hi, 5) {
        let y = py(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{ox}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#e4e4e4"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            ox + PANEL_W,
            ox - 4.0,
            y + 4.0,
            label(t)
        );
    }
    for t in ticks(a_lo, a_hi, 5) {
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            oy + PANEL_H + 14.0,
            label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">alpha</text>"#,
        ox + PANEL_W / 2.0,
        oy + PANEL_H + 30.0
    );
    if spec.metric == Metric::Mean {
        let y = py(spec.true_h);
        let _ = writeln!(
            svg,
            r#"<line class="reference" x1="{ox}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="red" stroke-width="1.5"/>"#,
            ox + PANEL_W
        );
    }
    for (i, &len) in lengths.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = panel
            .rows
            .iter()
            .filter(|r| r.len == len)
            .filter_map(|r| r.stats.as_ref().map(|s| (r.alpha, spec.metric.value(s))))
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = shade(i, lengths.len());
        let coords: Vec<String> = pts.iter().map(|&(a, v)| format!("{:.2},{:.2}", px(a), py(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-length="{len}" points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            coords.join(" ")
        );
        for &(a, v) in &pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{color}" data-value="{v}"/>"#,
                px(a),
                py(v)
            );
        }
    }
}

pub fn save_svg(rows: &[SummaryRow], spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg(rows, spec)?;
    std::fs::write(path, svg).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<SummaryRow> {
        let mut out = Vec::new();
        for estimator in [EstimatorId::Dcca, EstimatorId::Lxw] {
            for len in [500, 1000] {
                for k in 11..=20 {
                    let alpha = k as f64 / 10.0;
                    let mean = 0.5 + (2.0 - alpha) * 0.2;
                    out.push(SummaryRow {
                        estimator,
                        setting: SettingTag::SettingI,
                        alpha,
                        len,
                        n_ok: 10,
                        stats: Some(SummaryStats { mean, bias: mean - 0.5, sd: 0.05, q025: 0.4, q975: 0.9, mse: 0.01 }),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("MSE".parse::<Metric>().unwrap(), Metric::Mse);
        assert!("median".parse::<Metric>().is_err());
    }

    #[test]
    fn mean_chart_has_reference_and_curves() {
        let svg = render_svg(&rows(), &PlotSpec::new(Metric::Mean)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="reference""#).count(), 2);
        assert_eq!(svg.matches(r#"class="series""#).count(), 4);
        assert!(svg.contains("DCCA (setting I)") && svg.contains("LXW (setting I)"));
    }

    #[test]
    fn other_metrics_skip_reference() {
        let svg = render_svg(&rows(), &PlotSpec::new(Metric::Mse)).unwrap();
        assert_eq!(svg.matches(r#"class="reference""#).count(), 0);
    }

    #[test]
    fn empty_selection_rejected() {
        let spec = PlotSpec { setting: Some(SettingTag::SettingII), ..PlotSpec::new(Metric::Sd) };
        assert!(render_svg(&rows(), &spec).is_err());
        assert!(render_svg(&[], &PlotSpec::new(Metric::Sd)).is_err());
    }

    #[test]
    fn tick_steps() {
        let labels: Vec<String> = ticks(0.0, 1.0, 5).into_iter().map(label).collect();
        assert_eq!(labels, ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
        assert_eq!(label(0.30000000000000004), "0.3");
        assert_eq!(shade(0, 3), "rgb(190,190,190)");
        assert_eq!(shade(2, 3), "rgb(20,20,20)");
    }
}
