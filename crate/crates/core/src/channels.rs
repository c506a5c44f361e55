//! Ground-truth stochastic channels used as black-box measurement sources.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::SymbolSource;
use crate::netcore::Matrix;

/// Anything that draws `y ~ p(y|x)` for a batch of inputs.
pub trait ConditionalSampler {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn sample(&self, x: &Matrix, rng: &mut dyn RngCore) -> Result<Matrix>;
}

/// Saleh-form amplifier plus phase impairments and AWGN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearQamParams {
    pub noise_std: f64,
    pub phase_offset: f64,
    pub phase_noise_std: f64,
    pub amam_alpha: f64,
    pub amam_beta: f64,
    pub ampm_alpha: f64,
    pub ampm_beta: f64,
}

impl Default for NonlinearQamParams {
    fn default() -> Self {
        Self {
            noise_std: 0.05,
            phase_offset: 0.15,
            phase_noise_std: 0.1,
            amam_alpha: 2.1587,
            amam_beta: 1.1517,
            ampm_alpha: 4.0033,
            ampm_beta: 9.1040,
        }
    }
}

impl NonlinearQamParams {
    /// Parameters under which the channel is the identity map.
    pub fn transparent() -> Self {
        Self {
            noise_std: 0.0,
            phase_offset: 0.0,
            phase_noise_std: 0.0,
            amam_alpha: 1.0,
            amam_beta: 0.0,
            ampm_alpha: 0.0,
            ampm_beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("noise_std", self.noise_std),
            ("phase_noise_std", self.phase_noise_std),
            ("amam_beta", self.amam_beta),
            ("ampm_beta", self.ampm_beta),
        ];
        for (name, v) in checks {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("phase_offset", self.phase_offset),
            ("amam_alpha", self.amam_alpha),
            ("ampm_alpha", self.ampm_alpha),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Output amplitude for input amplitude `r`.
    pub fn am_am(&self, r: f64) -> f64 {
        self.amam_alpha * r / (1.0 + self.amam_beta * r * r)
    }

    /// Phase rotation (radians) for input amplitude `r`.
    pub fn am_pm(&self, r: f64) -> f64 {
        self.ampm_alpha * r * r / (1.0 + self.ampm_beta * r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelModel {
    /// Real AWGN, 1 → 1.
    Awgn { noise_std: f64 },
    /// Additive chi-squared noise with `dof` degrees of freedom, 1 → 1.
    Chi2 { dof: u32 },
    /// Independent AWGN on I and Q, 2 → 2.
    ComplexAwgn { noise_std: f64 },
    /// Amplifier nonlinearity, phase noise/offset and AWGN, 2 → 2.
    NonlinearQam(NonlinearQamParams),
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Awgn { noise_std } | ChannelModel::ComplexAwgn { noise_std } => {
                if !(noise_std >= 0.0 && noise_std.is_finite()) {
                    return Err(Error::Config(format!(
                        "noise_std must be finite and >= 0, got {noise_std}"
                    )));
                }
                Ok(())
            }
            ChannelModel::Chi2 { dof } => {
                if dof == 0 {
                    return Err(Error::Config("chi-squared dof must be >= 1".into()));
                }
                Ok(())
            }
            ChannelModel::NonlinearQam(p) => p.validate(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ChannelModel::Awgn { .. } | ChannelModel::Chi2 { .. } => 1,
            ChannelModel::ComplexAwgn { .. } | ChannelModel::NonlinearQam(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Awgn { .. } => "awgn",
            ChannelModel::Chi2 { .. } => "chi2",
            ChannelModel::ComplexAwgn { .. } => "complex_awgn",
            ChannelModel::NonlinearQam(_) => "nonlinear_qam",
        }
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::shape(format!(
                "{} channel expects {} input columns, got {}",
                self.name(),
                self.dim(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// Draws one received sample per input row.
    pub fn apply<R: Rng + ?Sized>(&self, x: &Matrix, rng: &mut R) -> Result<Matrix> {
        self.check_input(x)?;
        Ok(match self {
            ChannelModel::Awgn { noise_std } => awgn_channel(x, *noise_std, rng),
            ChannelModel::Chi2 { dof } => chi2_channel(x, *dof, rng),
            ChannelModel::ComplexAwgn { noise_std } => complex_awgn_channel(x, *noise_std, rng),
            ChannelModel::NonlinearQam(p) => nonlinear_qam_channel(x, p, rng),
        })
    }

    /// Applies the channel row by row, each row with its own seeded stream.
    pub fn apply_per_row(&self, x: &Matrix, seeds: &[u64]) -> Result<Matrix> {
        self.check_input(x)?;
        if seeds.len() != x.rows() {
            return Err(Error::shape(format!(
                "{} seeds for {} rows",
                seeds.len(),
                x.rows()
            )));
        }
        let mut out = Matrix::zeros(x.rows(), self.dim());
        for (r, &seed) in seeds.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let row = x.row_range(r, r + 1)?;
            let y = self.apply(&row, &mut rng)?;
            out.row_mut(r).copy_from_slice(y.row(0));
        }
        Ok(out)
    }
}

impl ConditionalSampler for ChannelModel {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn output_dim(&self) -> usize {
        self.dim()
    }

    fn sample(&self, x: &Matrix, rng: &mut dyn RngCore) -> Result<Matrix> {
        self.apply(x, rng)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// `y = x + N(0, noise_std²)` elementwise.
pub fn awgn_channel<R: Rng + ?Sized>(x: &Matrix, noise_std: f64, rng: &mut R) -> Matrix {
    let mut y = x.clone();
    for v in y.as_mut_slice() {
        *v += noise_std * gaussian(rng);
    }
    y
}

/// `y = x + Σ_{k<dof} n_k²` with `n_k` standard normal.
pub fn chi2_channel<R: Rng + ?Sized>(x: &Matrix, dof: u32, rng: &mut R) -> Matrix {
    let mut y = x.clone();
    for v in y.as_mut_slice() {
        let mut s = 0.0;
        for _ in 0..dof {
            let n = gaussian(rng);
            s += n * n;
        }
        *v += s;
    }
    y
}

/// Independent AWGN on each of the I and Q columns.
pub fn complex_awgn_channel<R: Rng + ?Sized>(x: &Matrix, noise_std_per_dim: f64, rng: &mut R) -> Matrix {
    awgn_channel(x, noise_std_per_dim, rng)
}

pub fn nonlinear_qam_channel<R: Rng + ?Sized>(x: &Matrix, p: &NonlinearQamParams, rng: &mut R) -> Matrix {
    let phase_noise = Normal::new(0.0, p.phase_noise_std).expect("validated std");
    let mut y = Matrix::zeros(x.rows(), 2);
    for r in 0..x.rows() {
        let (i, q) = (x.get(r, 0), x.get(r, 1));
        let amp = i.hypot(q);
        let phase = q.atan2(i);
        let out_amp = p.am_am(amp);
        let out_phase = phase + p.am_pm(amp) + p.phase_offset + phase_noise.sample(rng);
        let ni = p.noise_std * gaussian(rng);
        let nq = p.noise_std * gaussian(rng);
        y.set(r, 0, out_amp * out_phase.cos() + ni);
        y.set(r, 1, out_amp * out_phase.sin() + nq);
    }
    y
}

/// Paired transmitted/received samples with matching row counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub x: Matrix,
    pub y: Matrix,
}

impl SampleBatch {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::shape(format!(
                "x has {} rows but y has {}",
                x.rows(),
                y.rows()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<String> = (0..self.x.cols())
            .map(|i| format!("x_{i}"))
            .chain((0..self.y.cols()).map(|i| format!("y_{i}")))
            .collect();
        out.write_record(&header)?;
        for (xr, yr) in self.x.iter_rows().zip(self.y.iter_rows()) {
            out.write_record(xr.iter().chain(yr).map(|v| format!("{v:?}")))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a batch written by `write_csv` or measured elsewhere.
    ///
    /// Columns are recognized by their `x_i` / `y_i` header names.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let headers = reader.headers()?.clone();
        let mut x_cols = Vec::new();
        let mut y_cols = Vec::new();
        for (pos, h) in headers.iter().enumerate() {
            let h = h.trim();
            let (target, idx) = if let Some(i) = h.strip_prefix("x_") {
                (&mut x_cols, i)
            } else if let Some(i) = h.strip_prefix("y_") {
                (&mut y_cols, i)
            } else {
                return Err(Error::Format(format!("unexpected column {h:?}")));
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Format(format!("bad column index in {h:?}")))?;
            target.push((idx, pos));
        }
        for (name, cols) in [("x", &mut x_cols), ("y", &mut y_cols)] {
            cols.sort_unstable();
            if cols.is_empty() || cols.iter().enumerate().any(|(i, (idx, _))| *idx != i) {
                return Err(Error::Format(format!(
                    "{name} columns must be {name}_0..{name}_(d-1)"
                )));
            }
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut rows = 0;
        for rec in reader.records() {
            let rec = rec?;
            let field = |pos: usize| -> Result<f64> {
                let raw = rec.get(pos).unwrap_or("");
                raw.trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("row {rows}: cannot parse {raw:?}")))
            };
            for &(_, pos) in &x_cols {
                xs.push(field(pos)?);
            }
            for &(_, pos) in &y_cols {
                ys.push(field(pos)?);
            }
            rows += 1;
        }
        Self::new(
            Matrix::from_vec(rows, x_cols.len(), xs)?,
            Matrix::from_vec(rows, y_cols.len(), ys)?,
        )
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Draws `n` symbols from `source` and passes them through `channel`.
pub fn sample_dataset(
    source: &SymbolSource,
    channel: &ChannelModel,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if source.dim() != channel.dim() {
        return Err(Error::Config(format!(
            "source emits {}-D symbols but the {} channel takes {}-D input",
            source.dim(),
            channel.name(),
            channel.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = source.draw(n, &mut rng);
    let y = channel.apply(&x, &mut rng)?;
    SampleBatch::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{bpsk_source, qam16_source};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn zero_noise_awgn_is_identity() {
        let x = Matrix::column(&[1.0, -1.0, 0.25]);
        assert_eq!(awgn_channel(&x, 0.0, &mut rng(1)), x);
        let x2 = Matrix::from_rows(&[[0.1, 0.2], [-0.3, 0.4]]).unwrap();
        assert_eq!(complex_awgn_channel(&x2, 0.0, &mut rng(1)), x2);
    }

    #[test]
    fn awgn_moments() {
        let x = Matrix::filled(100_000, 1, 1.0);
        let y = awgn_channel(&x, 1.0, &mut rng(2));
        let (m, v) = mean_var(y.as_slice());
        assert!((m - 1.0).abs() < 0.01, "mean {m}");
        assert!((v - 1.0).abs() < 0.02, "var {v}");
    }

    #[test]
    fn awgn_is_mirror_symmetric() {
        let n = 100_000;
        let pos = awgn_channel(&Matrix::filled(n, 1, 1.0), 1.0, &mut rng(3));
        let neg = awgn_channel(&Matrix::filled(n, 1, -1.0), 1.0, &mut rng(4));
        let (mp, vp) = mean_var(pos.as_slice());
        let (mn, vn) = mean_var(neg.as_slice());
        assert!((mp + mn).abs() < 0.02);
        assert!((vp - vn).abs() < 0.03);
    }

    #[test]
    fn chi2_moments_and_support() {
        let x = Matrix::zeros(100_000, 1);
        let y = chi2_channel(&x, 2, &mut rng(5));
        assert!(y.as_slice().iter().all(|&v| v >= 0.0));
        let (m, v) = mean_var(y.as_slice());
        assert!((m - 2.0).abs() < 0.05, "mean {m}");
        assert!((v - 4.0).abs() < 0.3, "var {v}");
    }

    #[test]
    fn complex_awgn_statistics() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let n = 100_000;
        let x = Matrix::from_fn(n, 2, |_, _| a);
        let y = complex_awgn_channel(&x, 0.1, &mut rng(6));
        let ni: Vec<f64> = y.col(0).iter().map(|v| v - a).collect();
        let nq: Vec<f64> = y.col(1).iter().map(|v| v - a).collect();
        let (mi, vi) = mean_var(&ni);
        let (mq, vq) = mean_var(&nq);
        assert!((vi.sqrt() - 0.1).abs() < 0.005);
        assert!((vq.sqrt() - 0.1).abs() < 0.005);
        let cov = ni.iter().zip(&nq).map(|(p, q)| (p - mi) * (q - mq)).sum::<f64>() / (n as f64 - 1.0);
        let rho = cov / (vi * vq).sqrt();
        assert!(rho.abs() < 0.02, "rho {rho}");
    }

    #[test]
    fn transparent_nonlinear_is_identity() {
        let x = qam16_source().points().clone();
        let y = nonlinear_qam_channel(&x, &NonlinearQamParams::transparent(), &mut rng(7));
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn saleh_am_am_at_unit_amplitude() {
        let p = NonlinearQamParams::default();
        assert!((p.am_am(1.0) - 2.1587 / 2.1517).abs() < 1e-12);
        assert!((p.am_am(1.0) - 1.00325).abs() < 1e-5);
    }

    #[test]
    fn phase_noise_is_circumferential() {
        let p = NonlinearQamParams {
            noise_std: 0.0,
            phase_noise_std: 0.3,
            ..NonlinearQamParams::default()
        };
        let x = Matrix::from_fn(1000, 2, |_, c| if c == 0 { 0.6 } else { -0.2 });
        let y = nonlinear_qam_channel(&x, &p, &mut rng(8));
        let radii: Vec<f64> = y.iter_rows().map(|r| r[0].hypot(r[1])).collect();
        let expected = p.am_am(0.6f64.hypot(0.2));
        assert!(radii.iter().all(|r| (r - expected).abs() < 1e-12));
        let (_, v) = mean_var(&radii);
        assert!(v < 1e-24);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ChannelModel::Chi2 { dof: 0 }.validate().is_err());
        assert!(ChannelModel::Awgn { noise_std: -1.0 }.validate().is_err());
        let p = NonlinearQamParams {
            phase_noise_std: -0.1,
            ..Default::default()
        };
        assert!(ChannelModel::NonlinearQam(p).validate().is_err());
        let ch = ChannelModel::Awgn { noise_std: 1.0 };
        assert!(ch.apply(&Matrix::zeros(2, 2), &mut rng(0)).is_err());
    }

    #[test]
    fn per_row_streams_commute_with_permutation() {
        let ch = ChannelModel::NonlinearQam(NonlinearQamParams::default());
        let x = qam16_source().points().clone();
        let seeds: Vec<u64> = (0..16).map(|i| 1000 + i).collect();
        let y = ch.apply_per_row(&x, &seeds).unwrap();
        let perm: Vec<usize> = (0..16).rev().collect();
        let xp = x.select_rows(&perm);
        let sp: Vec<u64> = perm.iter().map(|&i| seeds[i]).collect();
        let yp = ch.apply_per_row(&xp, &sp).unwrap();
        assert_eq!(yp, y.select_rows(&perm));
    }

    #[test]
    fn dataset_basics() {
        let src = bpsk_source();
        let ch = ChannelModel::Awgn { noise_std: 1.0 };
        assert!(sample_dataset(&src, &ch, 0, 1).unwrap().is_empty());
        assert_eq!(
            sample_dataset(&src, &ch, 50, 9).unwrap(),
            sample_dataset(&src, &ch, 50, 9).unwrap()
        );
        let n = 10_000;
        let b = sample_dataset(&src, &ch, n, 10).unwrap();
        let ones = b.x.as_slice().iter().filter(|&&v| v == 1.0).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones - n as f64 / 2.0).abs() < 3.0 * sigma);
        let qam = ChannelModel::ComplexAwgn { noise_std: 0.1 };
        assert!(sample_dataset(&src, &qam, 5, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let b = sample_dataset(&qam16_source(), &ChannelModel::ComplexAwgn { noise_std: 0.1 }, 20, 3).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_0,x_1,y_0,y_1\n"));
        assert_eq!(SampleBatch::read_csv(buf.as_slice()).unwrap(), b);
        assert!(SampleBatch::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
