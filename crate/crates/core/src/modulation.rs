//! Fixed symbol sources with uniform priors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netcore::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn source(self) -> SymbolSource {
        match self {
            Modulation::Bpsk => bpsk_source(),
            Modulation::Qpsk => qpsk_source(),
            Modulation::Qam16 => qam16_source(),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk | Modulation::Qam16 => 2,
        }
    }
}

/// A constellation drawn with a uniform prior.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSource {
    /// One constellation point per row.
    points: Matrix,
}

impl SymbolSource {
    pub fn from_points(points: Matrix) -> Self {
        assert!(points.rows() > 0, "constellation must not be empty");
        Self { points }
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn average_power(&self) -> f64 {
        self.points.as_slice().iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    pub fn mean(&self) -> Vec<f64> {
        self.points
            .col_sums()
            .into_iter()
            .map(|s| s / self.len() as f64)
            .collect()
    }

    /// Uniform i.i.d. symbol indices.
    pub fn draw_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..self.len())).collect()
    }

    /// `n` uniform i.i.d. symbols, one per row.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Matrix {
        let idx = self.draw_indices(n, rng);
        self.points.select_rows(&idx)
    }
}

pub fn bpsk_source() -> SymbolSource {
    SymbolSource::from_points(Matrix::column(&[-1.0, 1.0]))
}

/// Unit-energy QPSK, points `(±1/√2, ±1/√2)`.
pub fn qpsk_source() -> SymbolSource {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let pts = [[a, a], [-a, a], [-a, -a], [a, -a]];
    SymbolSource::from_points(Matrix::from_rows(&pts).expect("fixed shape"))
}

/// Square 16-QAM on `{±1, ±3}²`, scaled to unit average power.
pub fn qam16_source() -> SymbolSource {
    let scale = 1.0 / 10f64.sqrt();
    let levels = [-3.0, -1.0, 1.0, 3.0];
    let mut pts = Vec::with_capacity(16);
    for &i in &levels {
        for &q in &levels {
            pts.push([i * scale, q * scale]);
        }
    }
    SymbolSource::from_points(Matrix::from_rows(&pts).expect("fixed shape"))
}

/// `n` symbols drawn from `source` with a dedicated seeded stream.
pub fn draw_symbols(source: &SymbolSource, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    source.draw(n, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_points() {
        let s = bpsk_source();
        assert_eq!(s.points().as_slice(), &[-1.0, 1.0]);
        assert_eq!(s.mean(), vec![0.0]);
        assert_eq!(s.average_power(), 1.0);
    }

    #[test]
    fn qpsk_unit_circle_and_rotation_symmetry() {
        let s = qpsk_source();
        assert_eq!(s.len(), 4);
        for p in s.points().iter_rows() {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        let m = s.mean();
        assert!(m[0].abs() < 1e-15 && m[1].abs() < 1e-15);
        // (i, q) -> (-q, i)
        for p in s.points().iter_rows() {
            let rotated = [-p[1], p[0]];
            assert!(s
                .points()
                .iter_rows()
                .any(|o| (o[0] - rotated[0]).abs() < 1e-15 && (o[1] - rotated[1]).abs() < 1e-15));
        }
    }

    #[test]
    fn qam16_geometry() {
        let s = qam16_source();
        assert_eq!(s.len(), 16);
        assert!((s.average_power() - 1.0).abs() < 1e-12);
        let corner = s
            .points()
            .iter_rows()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max);
        assert!((corner - (1.8f64).sqrt()).abs() < 1e-12);
        assert!(s.mean().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn draws_are_seeded() {
        let s = qam16_source();
        assert_eq!(draw_symbols(&s, 0, 1).rows(), 0);
        assert_eq!(draw_symbols(&s, 100, 5), draw_symbols(&s, 100, 5));
        assert_ne!(draw_symbols(&s, 100, 5), draw_symbols(&s, 100, 6));
    }

    #[test]
    fn uniform_frequencies_within_four_sigma() {
        let s = qam16_source();
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let idx = s.draw_indices(n, &mut rng);
        let mut counts = vec![0usize; s.len()];
        for i in idx {
            counts[i] += 1;
        }
        let p = 1.0 / s.len() as f64;
        let expect = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 4.0 * sigma, "count {c}");
        }
    }
}
