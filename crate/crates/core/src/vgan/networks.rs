//! Generator (channel approximation) and discriminator architectures.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channels::ConditionalSampler;
use crate::error::{Error, Result};
use crate::netcore::{DenseLayer, LayerKind, LayerStack, Matrix};

pub const DEFAULT_LATENT_DIM: usize = 16;
const GEN_TRUNK: [usize; 3] = [20, 20, 20];
const GEN_HEAD: usize = 80;
const DISC_HIDDEN: [usize; 3] = [80, 80, 80];

/// Channel approximation network: three 20-wide ReLU layers, a linear map to
/// `2 · latent_dim` sampler parameters, the sampler, an 80-wide ReLU layer and
/// a linear output of width `y_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub x_dim: usize,
    pub y_dim: usize,
    pub latent_dim: usize,
}

impl GeneratorSpec {
    pub fn new(x_dim: usize, y_dim: usize) -> Self {
        Self {
            x_dim,
            y_dim,
            latent_dim: DEFAULT_LATENT_DIM,
        }
    }

    pub fn build(&self) -> Result<LayerStack> {
        if self.x_dim == 0 || self.y_dim == 0 || self.latent_dim == 0 {
            return Err(Error::Config(format!("generator dims must be positive: {self:?}")));
        }
        let mut layers = Vec::new();
        let mut width = self.x_dim;
        for w in GEN_TRUNK {
            layers.push(DenseLayer::new(LayerKind::Relu, width, w)?);
            width = w;
        }
        layers.push(DenseLayer::new(LayerKind::Linear, width, 2 * self.latent_dim)?);
        layers.push(DenseLayer::sampler(self.latent_dim)?);
        layers.push(DenseLayer::new(LayerKind::Relu, self.latent_dim, GEN_HEAD)?);
        layers.push(DenseLayer::new(LayerKind::Linear, GEN_HEAD, self.y_dim)?);
        LayerStack::new(layers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscriminatorHead {
    /// Sigmoid probability output for the cross-entropy objective.
    Gan,
    /// Unbounded linear score for the Wasserstein objective.
    Wgan,
}

/// Scores `[x ‖ y]` rows: three 80-wide ReLU layers and a scalar head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    pub x_dim: usize,
    pub y_dim: usize,
    pub head: DiscriminatorHead,
}

impl DiscriminatorSpec {
    pub fn build(&self) -> Result<LayerStack> {
        if self.x_dim == 0 || self.y_dim == 0 {
            return Err(Error::Config(format!("discriminator dims must be positive: {self:?}")));
        }
        let mut layers = Vec::new();
        let mut width = self.x_dim + self.y_dim;
        for w in DISC_HIDDEN {
            layers.push(DenseLayer::new(LayerKind::Relu, width, w)?);
            width = w;
        }
        let head = match self.head {
            DiscriminatorHead::Gan => LayerKind::Sigmoid,
            DiscriminatorHead::Wgan => LayerKind::Linear,
        };
        layers.push(DenseLayer::new(head, width, 1)?);
        LayerStack::new(layers)
    }
}

/// Standard normal noise for `rows` sampler draws of width `dim`.
pub fn standard_noise(rows: usize, dim: usize, rng: &mut dyn RngCore) -> Matrix {
    let data = (0..rows * dim)
        .map(|_| StandardNormal.sample(&mut *rng))
        .collect();
    Matrix::from_vec(rows, dim, data).expect("length matches")
}

const PREDICT_CHUNK: usize = 8192;

/// A trained generator draws `ŷ ~ p(ŷ|x)` with fresh latent noise.
impl ConditionalSampler for LayerStack {
    fn input_dim(&self) -> usize {
        self.in_dim()
    }

    fn output_dim(&self) -> usize {
        self.out_dim()
    }

    fn sample(&self, x: &Matrix, rng: &mut dyn RngCore) -> Result<Matrix> {
        let mut out = Vec::with_capacity(x.rows() * self.out_dim());
        let mut start = 0;
        while start < x.rows() {
            let end = (start + PREDICT_CHUNK).min(x.rows());
            let chunk = x.row_range(start, end)?;
            let noise = self.noise_dim().map(|d| standard_noise(end - start, d, rng));
            out.extend(self.predict(&chunk, noise.as_ref())?.into_vec());
            start = end;
        }
        Matrix::from_vec(x.rows(), self.out_dim(), out)
    }
}
