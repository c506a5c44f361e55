//! Dense layer kinds and their forward/backward transfer functions.
//!
//! Weights are stored `in_dim × out_dim` so a batch forward is
//! `input · W + b` with one row per sample.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    /// Affine map followed by `max(0, ·)`.
    Relu,
    /// Affine map only.
    Linear,
    /// Affine map followed by the logistic function.
    Sigmoid,
    /// Gaussian reparameterized sampler: `2L` inputs → `L` outputs, no parameters.
    Sampler,
}

impl LayerKind {
    pub fn code(self) -> u8 {
        match self {
            LayerKind::Relu => 0,
            LayerKind::Linear => 1,
            LayerKind::Sigmoid => 2,
            LayerKind::Sampler => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LayerKind::Relu),
            1 => Some(LayerKind::Linear),
            2 => Some(LayerKind::Sigmoid),
            3 => Some(LayerKind::Sampler),
            _ => None,
        }
    }

    pub fn has_params(self) -> bool {
        self != LayerKind::Sampler
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    kind: LayerKind,
    in_dim: usize,
    out_dim: usize,
    /// `in_dim × out_dim`; `0 × 0` for the sampler.
    pub(crate) weights: Matrix,
    pub(crate) bias: Vec<f64>,
}

impl DenseLayer {
    /// A parameterized layer with zero weights and bias.
    pub fn new(kind: LayerKind, in_dim: usize, out_dim: usize) -> Result<Self> {
        if kind == LayerKind::Sampler {
            return Err(Error::Config(
                "use DenseLayer::sampler for sampler layers".into(),
            ));
        }
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Config(format!(
                "layer dims must be positive, got {in_dim}->{out_dim}"
            )));
        }
        Ok(Self {
            kind,
            in_dim,
            out_dim,
            weights: Matrix::zeros(in_dim, out_dim),
            bias: vec![0.0; out_dim],
        })
    }

    /// A sampler emitting `latent_dim` values from `2 · latent_dim` inputs.
    pub fn sampler(latent_dim: usize) -> Result<Self> {
        if latent_dim == 0 {
            return Err(Error::Config("sampler latent dim must be positive".into()));
        }
        Ok(Self {
            kind: LayerKind::Sampler,
            in_dim: 2 * latent_dim,
            out_dim: latent_dim,
            weights: Matrix::zeros(0, 0),
            bias: Vec::new(),
        })
    }

    /// A parameterized layer with explicit weights (`in × out`) and bias.
    pub fn with_params(kind: LayerKind, weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        let mut layer = Self::new(kind, weights.rows(), weights.cols())?;
        if bias.len() != layer.out_dim {
            return Err(Error::shape(format!(
                "bias has length {}, expected {}",
                bias.len(),
                layer.out_dim
            )));
        }
        layer.weights = weights;
        layer.bias = bias;
        Ok(layer)
    }

    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }
}

#[inline]
pub fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Logistic function, branching on sign so `exp` never overflows.
#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eᵛ)` without overflow for large `v` or underflow loss for small `v`.
#[inline]
pub fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

/// Affine map of a batch: `input · W + b`.
pub(crate) fn affine(input: &Matrix, layer: &DenseLayer) -> Result<Matrix> {
    let mut out = input.matmul(&layer.weights)?;
    for row in out.as_mut_slice().chunks_exact_mut(layer.out_dim) {
        for (o, b) in row.iter_mut().zip(&layer.bias) {
            *o += b;
        }
    }
    Ok(out)
}

/// Forward pass of one parameterized layer.
pub fn fc_forward(input: &Matrix, layer: &DenseLayer) -> Result<Matrix> {
    fc_forward_at(input, layer, 0)
}

pub(crate) fn fc_forward_at(input: &Matrix, layer: &DenseLayer, index: usize) -> Result<Matrix> {
    if layer.kind == LayerKind::Sampler {
        return Err(Error::Config(format!(
            "layer {index} is a sampler; use sampler_forward"
        )));
    }
    if input.cols() != layer.in_dim {
        return Err(Error::layer_shape(
            index,
            format!(
                "input has {} columns, layer expects {}",
                input.cols(),
                layer.in_dim
            ),
        ));
    }
    let pre = affine(input, layer)?;
    Ok(activate(layer.kind, pre))
}

pub(crate) fn activate(kind: LayerKind, pre: Matrix) -> Matrix {
    match kind {
        LayerKind::Relu => pre.map(relu),
        LayerKind::Sigmoid => pre.map(sigmoid),
        LayerKind::Linear | LayerKind::Sampler => pre,
    }
}

/// Reparameterized Gaussian draw.
///
/// Columns of `pre` interleave `(μ_j, s_j)` at `(2j, 2j+1)`; the output is
/// `z_j = μ_j + softplus(s_j) · ε_j`.
pub fn sampler_forward(pre: &Matrix, epsilon: &Matrix) -> Result<Matrix> {
    let latent = epsilon.cols();
    if pre.cols() != 2 * latent || pre.rows() != epsilon.rows() {
        return Err(Error::shape(format!(
            "sampler expects parameters n x {} for noise n x {latent}, got {}x{} and {}x{}",
            2 * latent,
            pre.rows(),
            pre.cols(),
            epsilon.rows(),
            epsilon.cols()
        )));
    }
    let mut out = Matrix::zeros(pre.rows(), latent);
    for r in 0..pre.rows() {
        let p = pre.row(r);
        let e = epsilon.row(r);
        for (j, z) in out.row_mut(r).iter_mut().enumerate() {
            *z = p[2 * j] + softplus(p[2 * j + 1]) * e[j];
        }
    }
    Ok(out)
}

/// Gradient of the sampler w.r.t. its interleaved input given `∂L/∂z`.
pub fn sampler_backward(pre: &Matrix, epsilon: &Matrix, grad_z: &Matrix) -> Result<Matrix> {
    let latent = epsilon.cols();
    if grad_z.shape() != epsilon.shape() || pre.cols() != 2 * latent || pre.rows() != grad_z.rows()
    {
        return Err(Error::shape("sampler backward shapes disagree"));
    }
    let mut out = Matrix::zeros(pre.rows(), 2 * latent);
    for r in 0..pre.rows() {
        let p = pre.row(r);
        let e = epsilon.row(r);
        let g = grad_z.row(r);
        let o = out.row_mut(r);
        for j in 0..latent {
            o[2 * j] = g[j];
            // d softplus(s)/ds = sigmoid(s)
            o[2 * j + 1] = g[j] * e[j] * sigmoid(p[2 * j + 1]);
        }
    }
    Ok(out)
}
