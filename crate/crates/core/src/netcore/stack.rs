//! Ordered chain of dense layers with a cached forward pass for backprop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::layer::{
    affine, fc_forward_at, relu, sampler_backward, sampler_forward, DenseLayer, LayerKind,
};
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Gradient (or any other per-parameter quantity) shaped like a stack's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(stack: &LayerStack) -> Self {
        Self {
            layers: stack
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    /// Parameter slices in storage order: per layer, weights then bias.
    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.slices().flat_map(|s| s.iter().copied()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices()
            .flat_map(|s| s.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Default)]
struct ForwardCache {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Post-activation output of each layer.
    outputs: Vec<Matrix>,
    noise: Option<Matrix>,
}

#[derive(Debug, Clone)]
pub struct LayerStack {
    layers: Vec<DenseLayer>,
    seed: Option<u64>,
    cache: Option<ForwardCache>,
}

impl PartialEq for LayerStack {
    /// Compares architecture and parameters; the activation cache is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.seed == other.seed
    }
}

impl LayerStack {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a layer stack needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::layer_shape(
                    i + 1,
                    format!(
                        "layer {i} emits {} values but layer {} expects {}",
                        pair[0].out_dim(),
                        i + 1,
                        pair[1].in_dim()
                    ),
                ));
            }
        }
        let samplers = layers
            .iter()
            .filter(|l| l.kind() == LayerKind::Sampler)
            .count();
        if samplers > 1 {
            return Err(Error::Config(format!(
                "at most one sampler layer is supported, found {samplers}"
            )));
        }
        for (i, l) in layers.iter().enumerate() {
            let (wr, wc) = l.weights.shape();
            let ok = if l.kind().has_params() {
                wr == l.in_dim() && wc == l.out_dim() && l.bias.len() == l.out_dim()
            } else {
                wr == 0 && wc == 0 && l.bias.is_empty() && l.in_dim() == 2 * l.out_dim()
            };
            if !ok {
                return Err(Error::layer_shape(i, "parameter shapes disagree with dims"));
            }
        }
        Ok(Self {
            layers,
            seed: None,
            cache: None,
        })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Seed used by the last `init_params` call, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub(crate) fn set_seed(&mut self, seed: Option<u64>) {
        self.seed = seed;
    }

    /// Width of the noise matrix the stack needs, or `None` without a sampler.
    pub fn noise_dim(&self) -> Option<usize> {
        self.layers
            .iter()
            .find(|l| l.kind() == LayerKind::Sampler)
            .map(DenseLayer::out_dim)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Draws weights from a scaled Gaussian and zeroes the biases.
    ///
    /// ReLU layers use std `√(2/in)`, linear and sigmoid layers `√(1/in)`.
    pub fn init_params(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut self.layers {
            let std = match layer.kind() {
                LayerKind::Relu => (2.0 / layer.in_dim() as f64).sqrt(),
                LayerKind::Linear | LayerKind::Sigmoid => (1.0 / layer.in_dim() as f64).sqrt(),
                LayerKind::Sampler => continue,
            };
            for w in layer.weights.as_mut_slice() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *w = std * n;
            }
            layer.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        self.seed = Some(seed);
        self.cache = None;
    }

    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.cache = None;
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    /// All parameters in storage order (per layer: weights row-major, then bias).
    pub fn params_flat(&self) -> Vec<f64> {
        self.slices().flat_map(|s| s.iter().copied()).collect()
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        let mut offset = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&values[offset..offset + s.len()]);
            offset += s.len();
        }
        Ok(())
    }

    /// Clamps every parameter into `[-limit, limit]`.
    pub fn clamp_params(&mut self, limit: f64) {
        for s in self.slices_mut() {
            for v in s {
                *v = v.clamp(-limit, limit);
            }
        }
    }

    fn check_noise(&self, input: &Matrix, noise: Option<&Matrix>) -> Result<()> {
        match (self.noise_dim(), noise) {
            (None, None) => Ok(()),
            (None, Some(_)) => Err(Error::Config(
                "noise supplied to a stack without a sampler layer".into(),
            )),
            (Some(_), None) => Err(Error::Config(
                "stack has a sampler layer but no noise was supplied".into(),
            )),
            (Some(dim), Some(n)) => {
                if n.cols() != dim || n.rows() != input.rows() {
                    Err(Error::Config(format!(
                        "noise must be {}x{dim}, got {}x{}",
                        input.rows(),
                        n.rows(),
                        n.cols()
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn run(&self, input: &Matrix, noise: Option<&Matrix>, keep: bool) -> Result<(Matrix, ForwardCache)> {
        self.check_noise(input, noise)?;
        let mut cache = ForwardCache::default();
        let mut current = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let next = match layer.kind() {
                LayerKind::Sampler => {
                    if current.cols() != layer.in_dim() {
                        return Err(Error::layer_shape(
                            i,
                            format!(
                                "sampler expects {} inputs, got {}",
                                layer.in_dim(),
                                current.cols()
                            ),
                        ));
                    }
                    sampler_forward(&current, noise.expect("checked above"))?
                }
                _ => fc_forward_at(&current, layer, i)?,
            };
            if keep {
                cache.inputs.push(current);
                cache.outputs.push(next.clone());
            }
            current = next;
        }
        if keep {
            cache.noise = noise.cloned();
        }
        Ok((current, cache))
    }

    /// Forward pass that caches activations for a following `backward`.
    pub fn forward(&mut self, input: &Matrix, noise: Option<&Matrix>) -> Result<Matrix> {
        let (out, cache) = self.run(input, noise, true)?;
        self.cache = Some(cache);
        Ok(out)
    }

    /// Forward pass without touching the cache.
    pub fn predict(&self, input: &Matrix, noise: Option<&Matrix>) -> Result<Matrix> {
        self.run(input, noise, false).map(|(out, _)| out)
    }

    /// Backpropagates `output_grad` through the cached forward pass.
    ///
    /// Returns parameter gradients and the gradient w.r.t. the stack input.
    pub fn backward(&self, output_grad: &Matrix) -> Result<(ParamGrads, Matrix)> {
        let (grads, input_grad) = self.backprop(output_grad, true)?;
        Ok((grads.expect("requested"), input_grad))
    }

    /// Like `backward` but only computes the input gradient.
    pub fn backward_input(&self, output_grad: &Matrix) -> Result<Matrix> {
        self.backprop(output_grad, false).map(|(_, g)| g)
    }

    fn backprop(&self, output_grad: &Matrix, with_params: bool) -> Result<(Option<ParamGrads>, Matrix)> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward called before forward".into()))?;
        let last = cache.outputs.last().expect("non-empty stack");
        if output_grad.shape() != last.shape() {
            return Err(Error::shape(format!(
                "output gradient is {}x{}, last layer output is {}x{}",
                output_grad.rows(),
                output_grad.cols(),
                last.rows(),
                last.cols()
            )));
        }
        let mut grads = with_params.then(|| ParamGrads::zeros_like(self));
        let mut grad = output_grad.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            let output = &cache.outputs[i];
            if layer.kind() == LayerKind::Sampler {
                let noise = cache.noise.as_ref().expect("sampler forward stores noise");
                grad = sampler_backward(input, noise, &grad)?;
                continue;
            }
            let delta = match layer.kind() {
                // Subgradient at exactly zero is zero.
                LayerKind::Relu => {
                    let mut d = grad;
                    for (g, &o) in d.as_mut_slice().iter_mut().zip(output.as_slice()) {
                        if o <= 0.0 {
                            *g = 0.0;
                        }
                    }
                    d
                }
                LayerKind::Sigmoid => {
                    let mut d = grad;
                    for (g, &o) in d.as_mut_slice().iter_mut().zip(output.as_slice()) {
                        *g *= o * (1.0 - o);
                    }
                    d
                }
                _ => grad,
            };
            if let Some(grads) = grads.as_mut() {
                grads.layers[i] = LayerGrads {
                    weights: input.t_matmul(&delta)?,
                    bias: delta.col_sums(),
                };
            }
            grad = delta.matmul_t(&layer.weights)?;
        }
        Ok((grads, grad))
    }
}

/// Chains layer forwards; pure in `(input, parameters, noise)`.
pub fn stack_forward(input: &Matrix, stack: &LayerStack, noise: Option<&Matrix>) -> Result<Matrix> {
    stack.predict(input, noise)
}

/// The affine part of `layer` applied to `input`, before the activation.
pub fn pre_activation(input: &Matrix, layer: &DenseLayer) -> Result<Matrix> {
    affine(input, layer)
}

/// Number of ReLU units that are inactive (output 0) for every row.
pub fn dead_units(input: &Matrix, layer: &DenseLayer) -> Result<usize> {
    let pre = pre_activation(input, layer)?;
    Ok((0..pre.cols())
        .filter(|&c| (0..pre.rows()).all(|r| relu(pre.get(r, c)) == 0.0))
        .count())
}
