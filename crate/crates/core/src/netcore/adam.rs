//! Adam optimizer with bias-corrected moment estimates.

use serde::{Deserialize, Serialize};

use super::stack::{LayerStack, ParamGrads};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

/// Moment accumulators for one set of parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// State for parameters split into slices of the given lengths.
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        Self {
            config,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// State mirroring every parameter slice of `stack`.
    pub fn for_stack(stack: &LayerStack, config: AdamConfig) -> Self {
        let shapes: Vec<usize> = stack.slices().map(<[f64]>::len).collect();
        Self::new(config, &shapes)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// One Adam update over matching parameter and gradient slices.
    pub fn step<'a, 'b>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut [f64]>,
        grads: impl IntoIterator<Item = &'b [f64]>,
    ) -> Result<()> {
        let params: Vec<&mut [f64]> = params.into_iter().collect();
        let grads: Vec<&[f64]> = grads.into_iter().collect();
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(format!(
                "optimizer tracks {} parameter slices, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
            if p.len() != self.m[i].len() || g.len() != self.m[i].len() {
                return Err(Error::shape(format!(
                    "slice {i}: optimizer has {}, params {}, grads {}",
                    self.m[i].len(),
                    p.len(),
                    g.len()
                )));
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for ((p, g), (m, v)) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

/// Applies one Adam step to every parameter of `stack`.
pub fn adam_step(stack: &mut LayerStack, grads: &ParamGrads, state: &mut AdamState) -> Result<()> {
    state.step(stack.slices_mut(), grads.slices())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut state = AdamState::new(AdamConfig::with_learning_rate(1e-3), &[1]);
        let mut w = [0.0];
        state.step([&mut w[..]], [&[0.5][..]]).unwrap();
        assert!((w[0] + 1e-3).abs() < 1e-10, "{}", w[0]);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut state = AdamState::new(AdamConfig::default(), &[3]);
        // moments stay zero when every gradient so far was zero, at any step count
        let mut w = [1.0, -2.0, 0.5];
        state.step([&mut w[..]], [&[0.0, 0.0, 0.0][..]]).unwrap();
        let before = w;
        for _ in 0..50 {
            state.step([&mut w[..]], [&[0.0, 0.0, 0.0][..]]).unwrap();
        }
        for (a, b) in w.iter().zip(before) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn converges_on_scalar_quadratic() {
        let mut state = AdamState::new(AdamConfig::with_learning_rate(0.1), &[1]);
        let mut w = [0.0];
        for _ in 0..200 {
            let g = 2.0 * (w[0] - 3.0);
            state.step([&mut w[..]], [&[g][..]]).unwrap();
        }
        assert!((w[0] - 3.0).abs() < 0.1, "w = {}", w[0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut w = [0.0; 3];
        assert!(state.step([&mut w[..]], [&[0.0; 3][..]]).is_err());
        assert_eq!(state.step_count(), 0);
    }
}
