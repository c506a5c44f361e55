//! Side-by-side evaluation of a learned sampler against the ground-truth channel.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::density::{histogram, js_divergence, kl_divergence, marginal_density, DensityEstimate};
use super::stats::{mean_and_covariance, mean_marginal_w1, polar_spread, skewness, PolarSpread};
use crate::channels::{ChannelModel, ConditionalSampler};
use crate::error::{Error, Result};
use crate::modulation::SymbolSource;
use crate::netcore::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub bins: usize,
    pub range_1d: (f64, f64),
    pub range_2d: (f64, f64),
    /// Samples drawn per constellation point, from each of truth and model.
    pub samples_per_condition: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            bins: 100,
            range_1d: (-6.0, 6.0),
            range_2d: (-2.0, 2.0),
            samples_per_condition: 100_000,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn ranges(&self, dims: usize) -> Vec<(f64, f64)> {
        match dims {
            1 => vec![self.range_1d],
            _ => vec![self.range_2d; dims],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 {
            return Err(Error::Config("eval.bins must be >= 1".into()));
        }
        if self.samples_per_condition < 2 {
            return Err(Error::Config("eval.samples_per_condition must be >= 2".into()));
        }
        for (name, (lo, hi)) in [("range_1d", self.range_1d), ("range_2d", self.range_2d)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Config(format!("eval.{name} must satisfy lo < hi")));
            }
        }
        Ok(())
    }
}

/// Moment summary of one conditional sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Row-major `d × d`.
    pub covariance: Vec<f64>,
    pub skewness: Vec<f64>,
    /// Only for 2-D outputs with a centroid away from the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polar: Option<PolarSpread>,
}

impl MomentSummary {
    fn of(samples: &Matrix) -> Self {
        let (mean, covariance) = mean_and_covariance(samples);
        let d = mean.len();
        let std = (0..d).map(|i| covariance[i * d + i].max(0.0).sqrt()).collect();
        let polar = if d == 2 { polar_spread(samples).ok() } else { None };
        Self {
            mean,
            std,
            covariance,
            skewness: skewness(samples),
            polar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub x: Vec<f64>,
    pub truth: MomentSummary,
    pub model: MomentSummary,
    /// Euclidean distance between the two means.
    pub mean_error: f64,
    /// Per-dimension `model std / true std`.
    pub std_ratio: Vec<f64>,
    pub kl: f64,
    pub js: f64,
    /// Mean of per-dimension 1-D Wasserstein distances.
    pub w1: f64,
    pub empty_model_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub kl: f64,
    pub js: f64,
    pub empty_model_bins: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportDensities {
    pub truth: Vec<DensityEstimate>,
    pub model: Vec<DensityEstimate>,
    pub truth_marginal: Option<DensityEstimate>,
    pub model_marginal: Option<DensityEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub channel: ChannelModel,
    pub constellation: Vec<Vec<f64>>,
    pub eval: EvalConfig,
    pub conditions: Vec<ConditionReport>,
    pub marginal: MarginalReport,
    /// Average of the per-condition JS divergences.
    pub mean_js: f64,
    #[serde(skip)]
    pub densities: ReportDensities,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn max_js(&self) -> f64 {
        self.conditions.iter().map(|c| c.js).fold(0.0, f64::max)
    }
}

/// Repeats one constellation point `n` times.
fn repeat_point(point: &[f64], n: usize) -> Matrix {
    Matrix::from_fn(n, point.len(), |_, c| point[c])
}

/// Draws matched-size sample sets from `truth` and `model` for every
/// constellation point and compares them.
///
/// Each condition uses its own RNG streams so adding conditions or changing
/// one side never perturbs the draws of the other.
pub fn compare_model(
    model: &dyn ConditionalSampler,
    channel: &ChannelModel,
    source: &SymbolSource,
    eval: &EvalConfig,
) -> Result<Report> {
    eval.validate()?;
    let dim = channel.dim();
    if source.dim() != channel.dim() || model.input_dim() != source.dim() || model.output_dim() != dim {
        return Err(Error::Config(format!(
            "dims disagree: source {}, channel {}, model {}->{}",
            source.dim(),
            channel.dim(),
            model.input_dim(),
            model.output_dim()
        )));
    }
    let ranges = eval.ranges(dim);
    let n = eval.samples_per_condition;
    let mut conditions = Vec::new();
    let mut densities = ReportDensities::default();
    for (k, point) in source.points().iter_rows().enumerate() {
        let x = repeat_point(point, n);
        let mut truth_rng = ChaCha8Rng::seed_from_u64(eval.seed);
        truth_rng.set_stream(2 * k as u64);
        let mut model_rng = ChaCha8Rng::seed_from_u64(eval.seed);
        model_rng.set_stream(2 * k as u64 + 1);
        let y_true = channel.sample(&x, &mut truth_rng)?;
        let y_model = model.sample(&x, &mut model_rng)?;
        if !y_model.is_finite() {
            return Err(Error::Numeric(format!("model produced non-finite samples for x = {point:?}")));
        }
        let p = histogram(&y_true, eval.bins, &ranges)?;
        let q = histogram(&y_model, eval.bins, &ranges)?;
        let truth = MomentSummary::of(&y_true);
        let modeled = MomentSummary::of(&y_model);
        let mean_error = truth
            .mean
            .iter()
            .zip(&modeled.mean)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let std_ratio = truth
            .std
            .iter()
            .zip(&modeled.std)
            .map(|(t, m)| if *t > 0.0 { m / t } else { f64::NAN })
            .collect();
        conditions.push(ConditionReport {
            x: point.to_vec(),
            mean_error,
            std_ratio,
            kl: kl_divergence(&p, &q)?,
            js: js_divergence(&p, &q)?,
            w1: mean_marginal_w1(&y_true, &y_model)?,
            empty_model_bins: q.empty_bins(),
            truth,
            model: modeled,
        });
        densities.truth.push(p);
        densities.model.push(q);
    }
    let pm = marginal_density(&densities.truth)?;
    let qm = marginal_density(&densities.model)?;
    let marginal = MarginalReport {
        kl: kl_divergence(&pm, &qm)?,
        js: js_divergence(&pm, &qm)?,
        empty_model_bins: qm.empty_bins(),
    };
    densities.truth_marginal = Some(pm);
    densities.model_marginal = Some(qm);
    let mean_js = conditions.iter().map(|c| c.js).sum::<f64>() / conditions.len() as f64;
    Ok(Report {
        channel: *channel,
        constellation: source.points().iter_rows().map(<[f64]>::to_vec).collect(),
        eval: *eval,
        conditions,
        marginal,
        mean_js,
        densities,
    })
}
