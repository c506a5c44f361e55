//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use channel_gan::netcore::{
    finite_diff_params, max_relative_error, DenseLayer, LayerKind, LayerStack, Matrix, ParamGrads,
};
use channel_gan::vgan::{
    gan_discriminator_loss_grad, gan_generator_loss_grad, mse_loss_grad,
    wgan_discriminator_loss_grad, wgan_generator_loss_grad,
};
use channel_gan::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Denominator floor for relative errors. Central differences at `h = 1e-5`
/// carry ~1e-11 absolute roundoff, so smaller entries are compared absolutely.
pub const GRAD_FLOOR: f64 = 1e-6;

pub fn gaussian(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Builds a stack from `(kind, in, out)` triples with random weights and biases.
pub fn random_stack(spec: &[(LayerKind, usize, usize)], rng: &mut ChaCha8Rng) -> LayerStack {
    let layers = spec
        .iter()
        .map(|&(kind, i, o)| match kind {
            LayerKind::Sampler => DenseLayer::sampler(o).unwrap(),
            _ => DenseLayer::new(kind, i, o).unwrap(),
        })
        .collect();
    let mut stack = LayerStack::new(layers).unwrap();
    let n = stack.param_count();
    let params: Vec<f64> = (0..n).map(|_| 0.7 * rng.sample::<f64, _>(StandardNormal)).collect();
    stack.set_params_flat(&params).unwrap();
    stack
}

/// Small conditional generator: Linear → Sampler → Linear.
pub fn small_generator(x_dim: usize, y_dim: usize, latent: usize, rng: &mut ChaCha8Rng) -> LayerStack {
    random_stack(
        &[
            (LayerKind::Linear, x_dim, 2 * latent),
            (LayerKind::Sampler, 2 * latent, latent),
            (LayerKind::Linear, latent, y_dim),
        ],
        rng,
    )
}

pub fn small_discriminator(in_dim: usize, sigmoid_head: bool, rng: &mut ChaCha8Rng) -> LayerStack {
    let head = if sigmoid_head { LayerKind::Sigmoid } else { LayerKind::Linear };
    random_stack(
        &[(LayerKind::Relu, in_dim, 8), (LayerKind::Relu, 8, 6), (head, 6, 1)],
        rng,
    )
}

fn check(analytic: &ParamGrads, stack: &LayerStack, f: impl FnMut(&LayerStack) -> Result<f64>) -> f64 {
    let numeric = finite_diff_params(stack, f).unwrap();
    max_relative_error(analytic, &numeric, GRAD_FLOOR)
}

/// Maximum relative error against central differences for each layer kind and
/// each objective, on randomized small stacks drawn from `seed`.
pub fn gradient_oracle_errors(seed: u64) -> Vec<(String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let n = 7;

    // Single layers of every kind under a random linear readout.
    for kind in [LayerKind::Relu, LayerKind::Linear, LayerKind::Sigmoid, LayerKind::Sampler] {
        let (spec, noise) = match kind {
            LayerKind::Sampler => (
                vec![(LayerKind::Linear, 3, 8), (LayerKind::Sampler, 8, 4)],
                Some(gaussian(n, 4, 1.0, &mut rng)),
            ),
            k => (vec![(k, 3, 5)], None),
        };
        let mut stack = random_stack(&spec, &mut rng);
        let input = gaussian(n, 3, 1.0, &mut rng);
        let readout = gaussian(n, stack.out_dim(), 1.0, &mut rng);
        let loss = |out: &Matrix| -> f64 {
            out.as_slice().iter().zip(readout.as_slice()).map(|(a, b)| a * b).sum()
        };
        stack.forward(&input, noise.as_ref()).unwrap();
        let (analytic, _) = stack.backward(&readout).unwrap();
        let err = check(&analytic, &stack, |s| Ok(loss(&s.predict(&input, noise.as_ref())?)));
        out.push((format!("layer {kind:?}"), err));
    }

    for (x_dim, y_dim) in [(1, 1), (2, 2)] {
        let latent = 3;
        let x = gaussian(n, x_dim, 1.0, &mut rng);
        let y = gaussian(n, y_dim, 1.0, &mut rng);
        let noise = gaussian(n, latent, 1.0, &mut rng);
        let gen = small_generator(x_dim, y_dim, latent, &mut rng);
        let tag = format!("{x_dim}->{y_dim}");

        let mut g = gen.clone();
        let (analytic, _) = mse_loss_grad(&mut g, &x, &y, Some(&noise)).unwrap();
        let err = check(&analytic, &gen, |s| {
            mse_loss_grad(&mut s.clone(), &x, &y, Some(&noise)).map(|(_, l)| l)
        });
        out.push((format!("mse {tag}"), err));

        for sigmoid_head in [true, false] {
            let disc = small_discriminator(x_dim + y_dim, sigmoid_head, &mut rng);
            let d_loss = |g: &LayerStack, d: &LayerStack| {
                let mut d = d.clone();
                if sigmoid_head {
                    gan_discriminator_loss_grad(g, &mut d, &x, &y, Some(&noise))
                } else {
                    wgan_discriminator_loss_grad(g, &mut d, &x, &y, Some(&noise))
                }
            };
            let (analytic, _) = d_loss(&gen, &disc).unwrap();
            let err = check(&analytic, &disc, |s| d_loss(&gen, s).map(|(_, l)| l));
            let name = if sigmoid_head { "gan discriminator" } else { "wgan critic" };
            out.push((format!("{name} {tag}"), err));

            let modes: &[Option<bool>] = if sigmoid_head { &[Some(true), Some(false)] } else { &[None] };
            for &mode in modes {
                let g_loss = |g: &LayerStack| {
                    let mut g = g.clone();
                    let mut d = disc.clone();
                    match mode {
                        Some(ns) => gan_generator_loss_grad(&mut g, &mut d, &x, Some(&noise), ns),
                        None => wgan_generator_loss_grad(&mut g, &mut d, &x, Some(&noise)),
                    }
                };
                let (analytic, _) = g_loss(&gen).unwrap();
                let err = check(&analytic, &gen, |s| g_loss(s).map(|(_, l)| l));
                let name = match mode {
                    Some(true) => "gan generator (non-saturating)",
                    Some(false) => "gan generator (literal)",
                    None => "wgan generator",
                };
                out.push((format!("{name} {tag}"), err));
            }
        }
    }
    out
}

use channel_gan::channels::{chi2_channel, ChannelModel, NonlinearQamParams};
use channel_gan::eval::{compare_model, histogram, kl_divergence, wasserstein1_1d, EvalConfig};
use channel_gan::modulation::{bpsk_source, qam16_source, qpsk_source, SymbolSource};
use channel_gan::netcore::sampler_forward;

/// Sample mean and std of `n` sampler draws with fixed `(μ, σ_pre)` pre-activations.
pub fn sampler_moments(mu: f64, sigma_pre: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pre = Matrix::from_fn(n, 2, |_, c| if c == 0 { mu } else { sigma_pre });
    let eps = gaussian(n, 1, 1.0, &mut rng);
    let z = sampler_forward(&pre, &eps).unwrap();
    sample_mean_std(z.as_slice())
}

pub fn sample_mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `σ_pre` with `softplus(σ_pre) = s`.
pub fn inverse_softplus(s: f64) -> f64 {
    s.exp_m1().ln()
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// KS distance between the chi-squared channel's additive noise and a direct
/// sum of `dof` squared standard normals.
pub fn chi2_ks_vs_brute_force(dof: u32, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::zeros(n, 1);
    let y = chi2_channel(&x, dof, &mut rng);
    let mut oracle_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let brute: Vec<f64> = (0..n)
        .map(|_| (0..dof).map(|_| oracle_rng.sample::<f64, _>(StandardNormal).powi(2)).sum())
        .collect();
    ks_distance(y.as_slice(), &brute)
}

/// Histogrammed mass of `n` standard normal draws inside `[−1, 1]`.
pub fn normal_mass_within_one(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = histogram(&gaussian(n, 1, 1.0, &mut rng), 100, &[(-5.0, 5.0)]).unwrap();
    d.centers(0)
        .iter()
        .zip(d.mass())
        .filter(|(c, _)| c.abs() < 1.0)
        .map(|(_, m)| m)
        .sum()
}

/// Histogram KL of N(0,1) against N(1,1) samples.
pub fn gaussian_shift_kl(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = gaussian(n, 1, 1.0, &mut rng);
    let q = gaussian(n, 1, 1.0, &mut rng).map(|v| v + 1.0);
    let r = [(-6.0, 6.0)];
    kl_divergence(&histogram(&p, 100, &r).unwrap(), &histogram(&q, 100, &r).unwrap()).unwrap()
}

/// W1 between N(0,1) and N(0,2²) samples.
pub fn gaussian_scale_w1(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian(n, 1, 1.0, &mut rng);
    let b = gaussian(n, 1, 2.0, &mut rng);
    wasserstein1_1d(a.as_slice(), b.as_slice()).unwrap()
}

/// The four ground-truth channels with their symbol sources.
pub fn reference_channels() -> Vec<(&'static str, ChannelModel, SymbolSource)> {
    vec![
        ("awgn", ChannelModel::Awgn { noise_std: 1.0 }, bpsk_source()),
        ("chi2", ChannelModel::Chi2 { dof: 2 }, bpsk_source()),
        ("complex_awgn", ChannelModel::ComplexAwgn { noise_std: 0.1 }, qpsk_source()),
        (
            "nonlinear_qam",
            ChannelModel::NonlinearQam(NonlinearQamParams::default()),
            qam16_source(),
        ),
    ]
}

/// Largest per-condition JS when the channel is compared against itself.
pub fn self_comparison_js(channel: &ChannelModel, source: &SymbolSource, seed: u64) -> f64 {
    let eval = EvalConfig {
        seed,
        ..EvalConfig::default()
    };
    let report = compare_model(channel, channel, source, &eval).unwrap();
    report.max_js().max(report.marginal.js)
}
