//! Sample statistics: 1-D Wasserstein distance and per-condition moments.

use serde::{Deserialize, Serialize};

use crate::channels::SampleBatch;
use crate::error::{Error, Result};
use crate::netcore::Matrix;

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Empirical quantile function of sorted data at `n` midpoints `(i + ½)/n`,
/// linearly interpolated between order statistics.
fn resample_quantiles(sorted: &[f64], n: usize) -> Vec<f64> {
    let m = sorted.len();
    (0..n)
        .map(|i| {
            let pos = (i as f64 + 0.5) / n as f64 * m as f64 - 0.5;
            let pos = pos.clamp(0.0, (m - 1) as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(m - 1);
            let t = pos - lo as f64;
            sorted[lo] + t * (sorted[hi] - sorted[lo])
        })
        .collect()
}

/// Earth mover's distance between two 1-D empirical distributions.
///
/// Equal-size sets are compared order statistic by order statistic; otherwise
/// both are resampled to the larger size through their quantile functions.
pub fn wasserstein1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("wasserstein distance needs non-empty samples".into()));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let (qa, qb) = if sa.len() == sb.len() {
        (sa, sb)
    } else {
        let n = sa.len().max(sb.len());
        (resample_quantiles(&sa, n), resample_quantiles(&sb, n))
    };
    Ok(qa.iter().zip(&qb).map(|(x, y)| (x - y).abs()).sum::<f64>() / qa.len() as f64)
}

/// Mean of per-column 1-D Wasserstein distances.
pub fn mean_marginal_w1(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.cols() != b.cols() {
        return Err(Error::shape("sample sets have different widths"));
    }
    let mut total = 0.0;
    for c in 0..a.cols() {
        total += wasserstein1_1d(&a.col(c), &b.col(c))?;
    }
    Ok(total / a.cols() as f64)
}

/// Mean vector and population covariance of the rows of `samples`.
pub fn mean_and_covariance(samples: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let d = samples.cols();
    let n = samples.rows() as f64;
    let mean: Vec<f64> = samples.col_sums().into_iter().map(|s| s / n).collect();
    let mut cov = vec![0.0; d * d];
    for row in samples.iter_rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in 0..d {
                cov[i * d + j] += di * (row[j] - mean[j]);
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= n);
    (mean, cov)
}

/// Per-column sample skewness `E[(v − μ)³] / σ³`.
pub fn skewness(samples: &Matrix) -> Vec<f64> {
    (0..samples.cols())
        .map(|c| {
            let v = samples.col(c);
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            let m3 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
            if m2 > 0.0 {
                m3 / m2.powf(1.5)
            } else {
                0.0
            }
        })
        .collect()
}

/// Spread of a 2-D cluster along and across the direction of its centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarSpread {
    pub radial_std: f64,
    pub tangential_std: f64,
}

pub fn polar_spread(samples: &Matrix) -> Result<PolarSpread> {
    if samples.cols() != 2 || samples.rows() == 0 {
        return Err(Error::shape("polar spread needs a non-empty 2-column sample set"));
    }
    let (mean, cov) = mean_and_covariance(samples);
    let norm = mean[0].hypot(mean[1]);
    if norm == 0.0 {
        return Err(Error::Numeric("cluster centroid at the origin has no radial direction".into()));
    }
    let u = [mean[0] / norm, mean[1] / norm];
    let t = [-u[1], u[0]];
    let quad = |a: [f64; 2]| {
        a[0] * a[0] * cov[0] + 2.0 * a[0] * a[1] * cov[1] + a[1] * a[1] * cov[3]
    };
    Ok(PolarSpread {
        radial_std: quad(u).max(0.0).sqrt(),
        tangential_std: quad(t).max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionGroup {
    pub x: Vec<f64>,
    pub count: usize,
    pub mean: Vec<f64>,
    /// Row-major `d × d` population covariance.
    pub covariance: Vec<f64>,
}

impl ConditionGroup {
    pub fn std(&self) -> Vec<f64> {
        let d = self.mean.len();
        (0..d).map(|i| self.covariance[i * d + i].max(0.0).sqrt()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub groups: Vec<ConditionGroup>,
    /// Rows whose condition was not among the requested ones.
    pub omitted: usize,
}

impl ConditionalMoments {
    pub fn total_count(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn group(&self, x: &[f64]) -> Option<&ConditionGroup> {
        self.groups.iter().find(|g| g.x == x)
    }
}

fn group_rows(batch: &SampleBatch, conditions: &[Vec<f64>]) -> (Vec<Vec<usize>>, usize) {
    let mut members = vec![Vec::new(); conditions.len()];
    let mut omitted = 0;
    for (r, x) in batch.x.iter_rows().enumerate() {
        match conditions.iter().position(|c| c.as_slice() == x) {
            Some(k) => members[k].push(r),
            None => omitted += 1,
        }
    }
    (members, omitted)
}

fn summarize(batch: &SampleBatch, conditions: Vec<Vec<f64>>) -> ConditionalMoments {
    let (members, omitted) = group_rows(batch, &conditions);
    let groups = conditions
        .into_iter()
        .zip(members)
        .filter(|(_, rows)| !rows.is_empty())
        .map(|(x, rows)| {
            let ys = batch.y.select_rows(&rows);
            let (mean, covariance) = mean_and_covariance(&ys);
            ConditionGroup {
                x,
                count: rows.len(),
                mean,
                covariance,
            }
        })
        .collect();
    ConditionalMoments { groups, omitted }
}

/// Groups rows by exact `x` value and summarizes `y` within each group.
///
/// Groups are ordered by `x` (lexicographic).
pub fn conditional_moments(batch: &SampleBatch) -> ConditionalMoments {
    let mut conditions: Vec<Vec<f64>> = Vec::new();
    for x in batch.x.iter_rows() {
        if x.iter().all(|v| v.is_finite()) && !conditions.iter().any(|c| c.as_slice() == x) {
            conditions.push(x.to_vec());
        }
    }
    conditions.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    summarize(batch, conditions)
}

/// Moments for a fixed list of conditions; rows matching none are counted in `omitted`.
pub fn conditional_moments_for(batch: &SampleBatch, conditions: &Matrix) -> ConditionalMoments {
    summarize(batch, conditions.iter_rows().map(<[f64]>::to_vec).collect())
}
