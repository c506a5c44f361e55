//! Central finite-difference gradients, used as an independent check on backprop.

use super::matrix::Matrix;
use super::stack::{LayerStack, ParamGrads};
use crate::error::{Error, Result};

/// Perturbation used by the central-difference estimates.
pub const FD_STEP: f64 = 1e-5;

/// Estimates `∂f/∂θ` for every parameter of `stack` by central differences.
///
/// `f` receives a perturbed copy of the stack and must be deterministic.
pub fn finite_diff_params(
    stack: &LayerStack,
    mut f: impl FnMut(&LayerStack) -> Result<f64>,
) -> Result<ParamGrads> {
    let base = stack.params_flat();
    let mut probe = stack.clone();
    let mut flat = Vec::with_capacity(base.len());
    let mut params = base.clone();
    for i in 0..base.len() {
        params[i] = base[i] + FD_STEP;
        probe.set_params_flat(&params)?;
        let plus = f(&probe)?;
        params[i] = base[i] - FD_STEP;
        probe.set_params_flat(&params)?;
        let minus = f(&probe)?;
        params[i] = base[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "loss is not finite while perturbing parameter {i}"
            )));
        }
        flat.push((plus - minus) / (2.0 * FD_STEP));
    }
    let mut grads = ParamGrads::zeros_like(stack);
    let mut offset = 0;
    for s in grads.slices_mut() {
        s.copy_from_slice(&flat[offset..offset + s.len()]);
        offset += s.len();
    }
    Ok(grads)
}

/// Finite-difference gradient of `scalar_loss(stack(input, noise))`.
///
/// The noise matrix is held fixed across perturbations.
pub fn finite_diff_grad(
    stack: &LayerStack,
    input: &Matrix,
    noise: Option<&Matrix>,
    scalar_loss: impl Fn(&Matrix) -> f64,
) -> Result<ParamGrads> {
    finite_diff_params(stack, |s| Ok(scalar_loss(&s.predict(input, noise)?)))
}

/// Largest elementwise `|a − n| / max(|a|, |n|, floor)` between two gradient sets.
///
/// The floor turns the comparison absolute for entries near zero, where a
/// relative error would only measure finite-difference roundoff.
pub fn max_relative_error(analytic: &ParamGrads, numeric: &ParamGrads, floor: f64) -> f64 {
    analytic
        .flatten()
        .into_iter()
        .zip(numeric.flatten())
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{DenseLayer, LayerKind};

    fn linear(w: f64, b: f64) -> LayerStack {
        let l = DenseLayer::with_params(
            LayerKind::Linear,
            Matrix::from_vec(1, 1, vec![w]).unwrap(),
            vec![b],
        )
        .unwrap();
        LayerStack::new(vec![l]).unwrap()
    }

    #[test]
    fn identity_output_gradient() {
        let s = linear(1.0, 0.0);
        let g = finite_diff_grad(&s, &Matrix::column(&[1.0]), None, Matrix::sum).unwrap();
        assert!((g.layers[0].weights.get(0, 0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn quadratic_loss_matches_analytic() {
        // loss = (w x)² with b = 0 → dL/dw = 2 w x²
        let (w, x) = (0.7, -1.3);
        let s = linear(w, 0.0);
        let g = finite_diff_grad(&s, &Matrix::column(&[x]), None, |o| o.get(0, 0).powi(2)).unwrap();
        let analytic = 2.0 * w * x * x;
        assert!((g.layers[0].weights.get(0, 0) - analytic).abs() < 1e-8);
    }

    #[test]
    fn zero_input_sum_loss() {
        let mut s = LayerStack::new(vec![DenseLayer::new(LayerKind::Linear, 3, 2).unwrap()]).unwrap();
        s.init_params(3);
        let g = finite_diff_grad(&s, &Matrix::zeros(1, 3), None, Matrix::sum).unwrap();
        assert!(g.layers[0].weights.max_abs() < 1e-9);
        for b in &g.layers[0].bias {
            assert!((b - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let s = linear(1.0, 0.0);
        let err = finite_diff_grad(&s, &Matrix::column(&[1.0]), None, |_| f64::NAN).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }
}
