//! Metrics JSON, trajectory CSVs and a top-down SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{ate, rpe, AteResult, RpeResult};
use crate::error::{Error, Result};
use crate::se3::Trajectory;

pub const METRICS_FILE: &str = "metrics.json";
pub const PLOT_FILE: &str = "trajectory.svg";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AteSummary {
    pub rmse: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpeSummary {
    pub delta: usize,
    pub trans_mean: f64,
    pub rot_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackMetrics {
    pub ate: AteSummary,
    /// `None` when the trajectory is shorter than the RPE interval.
    pub rpe: Option<RpeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ate: AteSummary,
    pub rpe: Option<RpeSummary>,
    pub baseline: Option<TrackMetrics>,
}

impl From<&AteResult> for AteSummary {
    fn from(a: &AteResult) -> Self {
        Self {
            rmse: a.rmse,
            mean: a.mean,
            max: a.max,
        }
    }
}

impl From<&RpeResult> for RpeSummary {
    fn from(r: &RpeResult) -> Self {
        Self {
            delta: r.delta,
            trans_mean: r.trans_mean,
            rot_mean: r.rot_mean,
        }
    }
}

fn track_metrics(est: &Trajectory, truth: &Trajectory, delta: usize) -> Result<TrackMetrics> {
    let a = ate(est, truth)?;
    let r = match rpe(est, truth, delta) {
        Ok(r) => Some(RpeSummary::from(&r)),
        Err(Error::TrajectoryTooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(TrackMetrics {
        ate: AteSummary::from(&a),
        rpe: r,
    })
}

/// Writes `metrics.json`, `estimate.csv`, `truth.csv`, `baseline.csv` (when
/// given) and `trajectory.svg` into `out_dir`.
pub fn report(
    est: &Trajectory,
    truth: &Trajectory,
    baseline: Option<&Trajectory>,
    rpe_delta: usize,
    out_dir: impl AsRef<Path>,
) -> Result<Metrics> {
    let dir = out_dir.as_ref();
    let main = track_metrics(est, truth, rpe_delta)?;
    let base = baseline.map(|b| track_metrics(b, truth, rpe_delta)).transpose()?;
    let metrics = Metrics {
        ate: main.ate,
        rpe: main.rpe,
        baseline: base,
    };
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(METRICS_FILE), serde_json::to_string_pretty(&metrics)? + "\n")?;
    est.write_csv(dir.join("estimate.csv"))?;
    truth.write_csv(dir.join("truth.csv"))?;
    if let Some(b) = baseline {
        b.write_csv(dir.join("baseline.csv"))?;
    }
    std::fs::write(dir.join(PLOT_FILE), render_svg(est, truth, baseline))?;
    Ok(metrics)
}

const PX_PER_M: f64 = 60.0;
const MARGIN: f64 = 40.0;

/// Top-down x-y view with a 1 m grid. Truth is dashed red, the estimate
/// solid blue, the baseline grey. The view is framed on truth and estimate;
/// a diverging baseline simply runs off the canvas.
pub fn render_svg(est: &Trajectory, truth: &Trajectory, baseline: Option<&Trajectory>) -> String {
    let xy = |t: &Trajectory| -> Vec<(f64, f64)> { t.poses().map(|p| (p.translation().x, p.translation().y)).collect() };
    let (truth_xy, est_xy) = (xy(truth), xy(est));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in truth_xy.iter().chain(&est_xy) {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let (x0, y0) = ((x0 - 0.5).floor(), (y0 - 0.5).floor());
    let (x1, y1) = ((x1 + 0.5).ceil(), (y1 + 0.5).ceil());
    let w = (x1 - x0) * PX_PER_M + 2.0 * MARGIN;
    let h = (y1 - y0) * PX_PER_M + 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) * PX_PER_M;
    let py = |y: f64| h - MARGIN - (y - y0) * PX_PER_M;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
    let mut gx = x0;
    while gx <= x1 + 1e-9 {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/>"#,
            px(gx),
            py(y0),
            px(gx),
            py(y1)
        );
        gx += 1.0;
    }
    let mut gy = y0;
    while gy <= y1 + 1e-9 {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/>"#,
            px(x0),
            py(gy),
            px(x1),
            py(gy)
        );
        gy += 1.0;
    }
    let _ = writeln!(s, "</g>");

    let mut polyline = |id: &str, pts: &[(f64, f64)], style: &str| {
        let mut coords = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            if i > 0 {
                coords.push(' ');
            }
            let _ = write!(coords, "{:.2},{:.2}", px(x), py(y));
        }
        let _ = writeln!(s, r#"<polyline id="{id}" fill="none" {style} points="{coords}"/>"#);
    };
    if let Some(b) = baseline {
        polyline("baseline", &xy(b), r#"stroke="grey" stroke-width="1.5""#);
    }
    polyline("truth", &truth_xy, r#"stroke="red" stroke-width="2" stroke-dasharray="8,5""#);
    polyline("estimate", &est_xy, r#"stroke="blue" stroke-width="2""#);

    let mut legend = vec![("red", "ground truth"), ("blue", "estimate")];
    if baseline.is_some() {
        legend.push(("grey", "IMU dead reckoning"));
    }
    for (i, (color, label)) in legend.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" fill="{color}" font-family="sans-serif" font-size="13">{label}</text>"#,
            MARGIN,
            18.0 + 15.0 * i as f64
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}
