//! Binned probability mass tables and the divergences between them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::Matrix;

/// Floor added to model bins before normalizing in `kl_divergence`.
pub const KL_FLOOR: f64 = 1e-10;

/// Normalized 1-D or 2-D histogram.
///
/// 2-D mass is stored row-major over `(bin_x, bin_y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    edges: Vec<Vec<f64>>,
    mass: Vec<f64>,
    sample_count: usize,
    /// Samples that fell outside the range and were folded into an edge bin.
    clipped: usize,
}

impl DensityEstimate {
    pub fn dims(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<f64>] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn clipped(&self) -> usize {
        self.clipped
    }

    pub fn bins_per_dim(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.len() - 1).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn centers(&self, dim: usize) -> Vec<f64> {
        self.edges[dim].windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Number of bins with zero mass.
    pub fn empty_bins(&self) -> usize {
        self.mass.iter().filter(|&&m| m == 0.0).count()
    }

    fn same_binning(&self, other: &DensityEstimate) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::shape("densities use different binning"));
        }
        Ok(())
    }

    /// Mass per bin in the `(center…, mass)` long format.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match self.dims() {
            1 => {
                out.write_record(["bin_center", "mass"])?;
                for (c, m) in self.centers(0).iter().zip(&self.mass) {
                    out.write_record([format!("{c:?}"), format!("{m:?}")])?;
                }
            }
            _ => {
                out.write_record(["bin_x", "bin_y", "mass"])?;
                let cy = self.centers(1);
                for (ix, cx) in self.centers(0).iter().enumerate() {
                    for (iy, cyv) in cy.iter().enumerate() {
                        let m = self.mass[ix * cy.len() + iy];
                        out.write_record([format!("{cx:?}"), format!("{cyv:?}"), format!("{m:?}")])?;
                    }
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> (usize, bool) {
    if v < lo {
        return (0, true);
    }
    if v > hi {
        return (bins - 1, true);
    }
    let idx = ((v - lo) / (hi - lo) * bins as f64) as usize;
    (idx.min(bins - 1), false)
}

/// Histograms the rows of `samples` (1 or 2 columns) over `ranges`, one per column.
///
/// Out-of-range samples land in the nearest edge bin and are counted in `clipped`.
pub fn histogram(samples: &Matrix, bins: usize, ranges: &[(f64, f64)]) -> Result<DensityEstimate> {
    if samples.rows() == 0 {
        return Err(Error::Empty("cannot histogram an empty sample set".into()));
    }
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let dims = samples.cols();
    if !(1..=2).contains(&dims) || ranges.len() != dims {
        return Err(Error::shape(format!(
            "histogram supports 1 or 2 columns with one range each, got {dims} columns and {} ranges",
            ranges.len()
        )));
    }
    for &(lo, hi) in ranges {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Config(format!("invalid histogram range [{lo}, {hi}]")));
        }
    }
    if !samples.is_finite() {
        return Err(Error::Numeric("histogram samples contain NaN or Inf".into()));
    }
    let edges: Vec<Vec<f64>> = ranges
        .iter()
        .map(|&(lo, hi)| {
            (0..=bins)
                .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
                .collect()
        })
        .collect();
    let mut counts = vec![0u64; bins.pow(dims as u32)];
    let mut clipped = 0;
    for row in samples.iter_rows() {
        let mut flat = 0;
        let mut out = false;
        for (v, &(lo, hi)) in row.iter().zip(ranges) {
            let (i, o) = bin_index(*v, lo, hi, bins);
            flat = flat * bins + i;
            out |= o;
        }
        counts[flat] += 1;
        clipped += usize::from(out);
    }
    let n = samples.rows() as f64;
    Ok(DensityEstimate {
        edges,
        mass: counts.into_iter().map(|c| c as f64 / n).collect(),
        sample_count: samples.rows(),
        clipped,
    })
}

/// `Σ p log(p/q)` in nats, with `q` floored by `KL_FLOOR` and renormalized.
pub fn kl_divergence(p: &DensityEstimate, q: &DensityEstimate) -> Result<f64> {
    p.same_binning(q)?;
    let qsum: f64 = q.mass.iter().map(|m| m + KL_FLOOR).sum();
    let kl: f64 = p
        .mass
        .iter()
        .zip(&q.mass)
        .filter(|(pm, _)| **pm > 0.0)
        .map(|(pm, qm)| pm * (pm / ((qm + KL_FLOOR) / qsum)).ln())
        .sum();
    Ok(kl.max(0.0))
}

fn kl_to_mixture(a: &[f64], m: &[f64]) -> f64 {
    a.iter()
        .zip(m)
        .filter(|(av, _)| **av > 0.0)
        .map(|(av, mv)| av * (av / mv).ln())
        .sum()
}

/// Jensen–Shannon divergence in nats, in `[0, ln 2]`.
pub fn js_divergence(p: &DensityEstimate, q: &DensityEstimate) -> Result<f64> {
    p.same_binning(q)?;
    let m: Vec<f64> = p.mass.iter().zip(&q.mass).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * kl_to_mixture(&p.mass, &m) + 0.5 * kl_to_mixture(&q.mass, &m);
    Ok(js.clamp(0.0, std::f64::consts::LN_2))
}

/// Uniform mixture `(1/K) Σ p_k` of per-condition densities.
pub fn marginal_density(per_condition: &[DensityEstimate]) -> Result<DensityEstimate> {
    let first = per_condition
        .first()
        .ok_or_else(|| Error::Empty("no conditional densities to marginalize".into()))?;
    let k = per_condition.len() as f64;
    let mut mass = vec![0.0; first.mass.len()];
    let mut sample_count = 0;
    let mut clipped = 0;
    for d in per_condition {
        first.same_binning(d)?;
        for (m, v) in mass.iter_mut().zip(&d.mass) {
            *m += v / k;
        }
        sample_count += d.sample_count;
        clipped += d.clipped;
    }
    Ok(DensityEstimate {
        edges: first.edges.clone(),
        mass,
        sample_count,
        clipped,
    })
}
