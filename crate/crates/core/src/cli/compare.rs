use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::Report;

use super::run::REPORT_JSON;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    /// Constellation point, or empty for the marginal row.
    pub x: Vec<f64>,
    pub js_a: f64,
    pub js_b: f64,
    pub mean_error_a: f64,
    pub mean_error_b: f64,
    /// Per-axis learned/true std ratios.
    pub std_ratio_a: Vec<f64>,
    pub std_ratio_b: Vec<f64>,
}

impl ComparisonRow {
    /// `js_b − js_a`.
    pub fn js_delta(&self) -> f64 {
        self.js_b - self.js_a
    }

    pub fn mean_error_delta(&self) -> f64 {
        self.mean_error_b - self.mean_error_a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunComparison {
    pub conditions: Vec<ComparisonRow>,
    pub marginal_js_a: f64,
    pub marginal_js_b: f64,
}

/// Side-by-side divergences and moment errors of two reports on the same setup.
pub fn compare_runs(a: &Report, b: &Report) -> Result<RunComparison> {
    if a.channel != b.channel {
        return Err(Error::Config(format!(
            "reports use different channels: {:?} vs {:?}",
            a.channel, b.channel
        )));
    }
    if a.constellation != b.constellation {
        return Err(Error::Config("reports use different constellations".into()));
    }
    if a.eval.bins != b.eval.bins || a.eval.ranges(1) != b.eval.ranges(1) || a.eval.ranges(2) != b.eval.ranges(2) {
        return Err(Error::Config("reports use different histogram binning".into()));
    }
    if a.conditions.len() != b.conditions.len() {
        return Err(Error::Format("reports have different condition counts".into()));
    }
    let conditions = a
        .conditions
        .iter()
        .zip(&b.conditions)
        .map(|(ca, cb)| ComparisonRow {
            x: ca.x.clone(),
            js_a: ca.js,
            js_b: cb.js,
            mean_error_a: ca.mean_error,
            mean_error_b: cb.mean_error,
            std_ratio_a: ca.std_ratio.clone(),
            std_ratio_b: cb.std_ratio.clone(),
        })
        .collect();
    Ok(RunComparison {
        conditions,
        marginal_js_a: a.marginal.js,
        marginal_js_b: b.marginal.js,
    })
}

/// Loads a report from a `report.json` path or a run directory containing one.
pub fn load_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let file = if path.is_dir() { path.join(REPORT_JSON) } else { path.to_path_buf() };
    Report::load_json(&file).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read report {}: {io}", file.display())),
        other => other,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for RunComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>9} {:>9} {:>10} {:>9} {:>9} {:>10}  {:<18} {:<18}",
            "x", "js_a", "js_b", "js_delta", "merr_a", "merr_b", "merr_delta", "std_ratio_a", "std_ratio_b"
        )?;
        for r in &self.conditions {
            writeln!(
                f,
                "{:<18} {:>9.5} {:>9.5} {:>+10.5} {:>9.4} {:>9.4} {:>+10.4}  {:<18} {:<18}",
                fmt_vec(&r.x),
                r.js_a,
                r.js_b,
                r.js_delta(),
                r.mean_error_a,
                r.mean_error_b,
                r.mean_error_delta(),
                fmt_vec(&r.std_ratio_a),
                fmt_vec(&r.std_ratio_b)
            )?;
        }
        writeln!(
            f,
            "{:<18} {:>9.5} {:>9.5} {:>+10.5}",
            "marginal",
            self.marginal_js_a,
            self.marginal_js_b,
            self.marginal_js_b - self.marginal_js_a
        )
    }
}
