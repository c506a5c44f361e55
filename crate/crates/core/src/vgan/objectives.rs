//! Training objectives and single-network update steps.
//!
//! Every `*_loss_grad` returns the quantity that is *minimized* together with
//! its gradient. The matching `*_update` applies one Adam step to exactly one
//! network; the other network's parameters are never written.

use crate::error::{Error, Result};
use crate::netcore::{adam_step, AdamState, LayerStack, Matrix, ParamGrads};

/// Discriminator outputs are clamped into `[D_CLAMP, 1 − D_CLAMP]` before `log`.
pub const D_CLAMP: f64 = 1e-7;

fn check_rows(x: &Matrix, other: &Matrix, what: &str) -> Result<()> {
    if x.rows() != other.rows() {
        return Err(Error::shape(format!(
            "x has {} rows but {what} has {}",
            x.rows(),
            other.rows()
        )));
    }
    if x.rows() == 0 {
        return Err(Error::Empty("training batch has no rows".into()));
    }
    Ok(())
}

/// `log(clamp(d))` and its derivative (zero where the clamp is active).
fn clamped_log(d: f64) -> (f64, f64) {
    if d < D_CLAMP {
        (D_CLAMP.ln(), 0.0)
    } else if d > 1.0 - D_CLAMP {
        ((1.0 - D_CLAMP).ln(), 0.0)
    } else {
        (d.ln(), 1.0 / d)
    }
}

/// Mean squared error `(1/N) Σ ‖y − h(x)‖²` and its generator gradient.
pub fn mse_loss_grad(
    gen: &mut LayerStack,
    x: &Matrix,
    y: &Matrix,
    noise: Option<&Matrix>,
) -> Result<(ParamGrads, f64)> {
    check_rows(x, y, "y")?;
    let pred = gen.forward(x, noise)?;
    if pred.shape() != y.shape() {
        return Err(Error::shape(format!(
            "generator emits {} columns, targets have {}",
            pred.cols(),
            y.cols()
        )));
    }
    let n = x.rows() as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut loss = 0.0;
    for ((g, p), t) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(pred.as_slice())
        .zip(y.as_slice())
    {
        let d = p - t;
        loss += d * d;
        *g = 2.0 * d / n;
    }
    let (grads, _) = gen.backward(&grad)?;
    Ok((grads, loss / n))
}

pub fn mse_update(
    gen: &mut LayerStack,
    x: &Matrix,
    y: &Matrix,
    noise: Option<&Matrix>,
    adam: &mut AdamState,
) -> Result<f64> {
    let (grads, loss) = mse_loss_grad(gen, x, y, noise)?;
    adam_step(gen, &grads, adam)?;
    Ok(loss)
}

/// Scores real pairs in the first N rows and generated pairs in the last N.
fn score_real_and_fake(
    gen: &LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    y_real: &Matrix,
    noise: Option<&Matrix>,
) -> Result<Matrix> {
    check_rows(x, y_real, "y_real")?;
    let fake = gen.predict(x, noise)?;
    let input = x.hconcat(y_real)?.vconcat(&x.hconcat(&fake)?)?;
    disc.forward(&input, None)
}

/// Negated cross-entropy objective of the discriminator,
/// `−(1/N) Σ [log D(x, y) + log(1 − D(x, h(x)))]`, and its gradient.
pub fn gan_discriminator_loss_grad(
    gen: &LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    y_real: &Matrix,
    noise: Option<&Matrix>,
) -> Result<(ParamGrads, f64)> {
    let scores = score_real_and_fake(gen, disc, x, y_real, noise)?;
    let n = x.rows();
    let nf = n as f64;
    let mut grad = Matrix::zeros(2 * n, 1);
    let mut loss = 0.0;
    for i in 0..n {
        let (lr, dr) = clamped_log(scores.get(i, 0));
        let (lf, df) = clamped_log(1.0 - scores.get(n + i, 0));
        loss -= lr + lf;
        grad.set(i, 0, -dr / nf);
        // d/dD log(1 − D) = −1/(1 − D)
        grad.set(n + i, 0, df / nf);
    }
    let (grads, _) = disc.backward(&grad)?;
    Ok((grads, loss / nf))
}

pub fn gan_discriminator_update(
    gen: &LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    y_real: &Matrix,
    noise: Option<&Matrix>,
    adam: &mut AdamState,
) -> Result<f64> {
    let (grads, loss) = gan_discriminator_loss_grad(gen, disc, x, y_real, noise)?;
    adam_step(disc, &grads, adam)?;
    Ok(loss)
}

/// Forward through generator then discriminator, returning scores and fakes.
fn score_generated(
    gen: &mut LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    noise: Option<&Matrix>,
) -> Result<Matrix> {
    if x.rows() == 0 {
        return Err(Error::Empty("training batch has no rows".into()));
    }
    let fake = gen.forward(x, noise)?;
    disc.forward(&x.hconcat(&fake)?, None)
}

/// Pulls `∂L/∂score` back through the discriminator into the generator.
fn generator_grads_from_scores(
    gen: &LayerStack,
    disc: &LayerStack,
    x_dim: usize,
    score_grad: &Matrix,
) -> Result<ParamGrads> {
    let input_grad = disc.backward_input(score_grad)?;
    let y_grad = input_grad.col_range(x_dim, input_grad.cols())?;
    gen.backward(&y_grad).map(|(g, _)| g)
}

/// Generator cross-entropy objective.
///
/// Non-saturating: `−(1/N) Σ log D(x, h(x))`. Literal: `(1/N) Σ log(1 − D(x, h(x)))`.
pub fn gan_generator_loss_grad(
    gen: &mut LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    noise: Option<&Matrix>,
    non_saturating: bool,
) -> Result<(ParamGrads, f64)> {
    let scores = score_generated(gen, disc, x, noise)?;
    let n = x.rows();
    let nf = n as f64;
    let mut grad = Matrix::zeros(n, 1);
    let mut loss = 0.0;
    for i in 0..n {
        let d = scores.get(i, 0);
        if non_saturating {
            let (l, dl) = clamped_log(d);
            loss -= l;
            grad.set(i, 0, -dl / nf);
        } else {
            let (l, dl) = clamped_log(1.0 - d);
            loss += l;
            grad.set(i, 0, -dl / nf);
        }
    }
    let grads = generator_grads_from_scores(gen, disc, x.cols(), &grad)?;
    Ok((grads, loss / nf))
}

pub fn gan_generator_update(
    gen: &mut LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    noise: Option<&Matrix>,
    non_saturating: bool,
    adam: &mut AdamState,
) -> Result<f64> {
    let (grads, loss) = gan_generator_loss_grad(gen, disc, x, noise, non_saturating)?;
    adam_step(gen, &grads, adam)?;
    Ok(loss)
}

/// Negated critic objective `−(1/N) Σ [D(x, y) − D(x, h(x))]` and its gradient.
pub fn wgan_discriminator_loss_grad(
    gen: &LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    y_real: &Matrix,
    noise: Option<&Matrix>,
) -> Result<(ParamGrads, f64)> {
    let scores = score_real_and_fake(gen, disc, x, y_real, noise)?;
    let n = x.rows();
    let nf = n as f64;
    let mut grad = Matrix::zeros(2 * n, 1);
    let mut loss = 0.0;
    for i in 0..n {
        loss -= scores.get(i, 0) - scores.get(n + i, 0);
        grad.set(i, 0, -1.0 / nf);
        grad.set(n + i, 0, 1.0 / nf);
    }
    let (grads, _) = disc.backward(&grad)?;
    Ok((grads, loss / nf))
}

/// Critic step followed by clamping every critic parameter into `[−clip, clip]`.
pub fn wgan_discriminator_update(
    gen: &LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    y_real: &Matrix,
    noise: Option<&Matrix>,
    adam: &mut AdamState,
    clip: f64,
) -> Result<f64> {
    if clip.is_nan() || clip <= 0.0 {
        return Err(Error::Config(format!("wgan clip must be positive, got {clip}")));
    }
    let (grads, loss) = wgan_discriminator_loss_grad(gen, disc, x, y_real, noise)?;
    adam_step(disc, &grads, adam)?;
    disc.clamp_params(clip);
    Ok(loss)
}

/// Generator Wasserstein objective `−(1/N) Σ D(x, h(x))`.
pub fn wgan_generator_loss_grad(
    gen: &mut LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    noise: Option<&Matrix>,
) -> Result<(ParamGrads, f64)> {
    let scores = score_generated(gen, disc, x, noise)?;
    let nf = x.rows() as f64;
    let loss = -scores.sum() / nf;
    let grad = Matrix::filled(x.rows(), 1, -1.0 / nf);
    let grads = generator_grads_from_scores(gen, disc, x.cols(), &grad)?;
    Ok((grads, loss))
}

pub fn wgan_generator_update(
    gen: &mut LayerStack,
    disc: &mut LayerStack,
    x: &Matrix,
    noise: Option<&Matrix>,
    adam: &mut AdamState,
) -> Result<f64> {
    let (grads, loss) = wgan_generator_loss_grad(gen, disc, x, noise)?;
    adam_step(gen, &grads, adam)?;
    Ok(loss)
}
