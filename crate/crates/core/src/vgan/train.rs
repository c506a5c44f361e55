//! Alternating discriminator/generator training loop.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::networks::{standard_noise, DiscriminatorHead, DiscriminatorSpec, GeneratorSpec};
use super::objectives::{
    gan_discriminator_update, gan_generator_update, mse_update, wgan_discriminator_update,
    wgan_generator_update,
};
use crate::channels::{ChannelModel, SampleBatch};
use crate::error::{Error, Result};
use crate::eval::mean_marginal_w1;
use crate::modulation::SymbolSource;
use crate::netcore::{AdamConfig, AdamState, LayerStack, Matrix};
use crate::seeds::SubSeeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Mse,
    Gan,
    Wgan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub objective: Objective,
    pub learning_rate: f64,
    /// Discriminator learning rate; `None` uses `learning_rate`.
    pub discriminator_learning_rate: Option<f64>,
    /// The generator learning rate decays linearly to this fraction of its
    /// initial value by the last iteration (1 = constant). The discriminator
    /// rate stays constant.
    pub final_lr_scale: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub seed: u64,
    pub wgan_clip: f64,
    /// Use `−log D(x, h(x))` for the generator instead of `log(1 − D(x, h(x)))`.
    pub non_saturating: bool,
    /// Discriminator updates per generator update.
    pub critic_steps: usize,
    pub latent_dim: usize,
    /// Record a W1 snapshot every this many iterations (0 = never).
    pub snapshot_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            objective: Objective::Gan,
            learning_rate: 2e-4,
            discriminator_learning_rate: None,
            final_lr_scale: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            batch_size: 256,
            iterations: 10_000,
            seed: 0,
            wgan_clip: 0.01,
            non_saturating: true,
            critic_steps: 1,
            latent_dim: super::networks::DEFAULT_LATENT_DIM,
            snapshot_every: 500,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if let Some(lr) = self.discriminator_learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                return fail(format!("discriminator_learning_rate must be > 0, got {lr}"));
            }
        }
        if !(self.final_lr_scale > 0.0 && self.final_lr_scale <= 1.0) {
            return fail(format!("final_lr_scale must lie in (0, 1], got {}", self.final_lr_scale));
        }
        if self.batch_size < 2 {
            return fail(format!("batch_size must be >= 2, got {}", self.batch_size));
        }
        if self.wgan_clip.is_nan() || self.wgan_clip <= 0.0 {
            return fail(format!("wgan_clip must be > 0, got {}", self.wgan_clip));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("beta1 and beta2 must lie in [0, 1)".into());
        }
        if self.critic_steps == 0 {
            return fail("critic_steps must be >= 1".into());
        }
        if self.latent_dim == 0 {
            return fail("latent_dim must be >= 1".into());
        }
        Ok(())
    }

    fn adam(&self, learning_rate: f64) -> AdamConfig {
        AdamConfig {
            learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            ..AdamConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    /// Absent for the MSE objective, which has no discriminator.
    pub d_loss: Option<f64>,
    pub g_loss: f64,
    pub divergence: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<HistoryRecord>,
    /// Largest `|θ_D|` observed right after any critic step (WGAN only).
    pub critic_max_abs: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

impl TrainHistory {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iteration", "d_loss", "g_loss", "divergence"])?;
        for r in &self.records {
            out.write_record([
                r.iteration.to_string(),
                opt(r.d_loss),
                format!("{:?}", r.g_loss),
                opt(r.divergence),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub generator: LayerStack,
    /// `None` for the MSE objective.
    pub discriminator: Option<LayerStack>,
    pub history: TrainHistory,
}

/// Trains a generator against a live channel, drawing fresh symbols each batch.
pub fn train(channel: &ChannelModel, source: &SymbolSource, config: &TrainConfig) -> Result<TrainedModel> {
    channel.validate()?;
    if source.dim() != channel.dim() {
        return Err(Error::Config(format!(
            "source emits {}-D symbols but the {} channel takes {}-D input",
            source.dim(),
            channel.name(),
            channel.dim()
        )));
    }
    let spec = GeneratorSpec {
        x_dim: source.dim(),
        y_dim: channel.dim(),
        latent_dim: config.latent_dim,
    };
    train_with(spec, config, |rng, n| {
        let x = source.draw(n, rng);
        let y = channel.apply(&x, rng)?;
        Ok((x, y))
    })
}

/// Trains on a fixed dataset (e.g. imported measurements), sampling minibatches with replacement.
pub fn train_on_dataset(data: &SampleBatch, config: &TrainConfig) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::Empty("training dataset has no rows".into()));
    }
    let spec = GeneratorSpec {
        x_dim: data.x.cols(),
        y_dim: data.y.cols(),
        latent_dim: config.latent_dim,
    };
    train_with(spec, config, |rng, n| {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..data.len())).collect();
        Ok((data.x.select_rows(&idx), data.y.select_rows(&idx)))
    })
}

fn check_loss(iteration: usize, what: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Diverged {
            iteration,
            msg: format!("{what} loss is {v}"),
        })
    }
}

fn train_with(
    spec: GeneratorSpec,
    config: &TrainConfig,
    mut draw: impl FnMut(&mut ChaCha8Rng, usize) -> Result<(Matrix, Matrix)>,
) -> Result<TrainedModel> {
    config.validate()?;
    let seeds = SubSeeds::from_master(config.seed);
    let mut gen = spec.build()?;
    gen.init_params(seeds.generator_init);
    let mut disc = match config.objective {
        Objective::Mse => None,
        Objective::Gan | Objective::Wgan => {
            let head = if config.objective == Objective::Gan {
                DiscriminatorHead::Gan
            } else {
                DiscriminatorHead::Wgan
            };
            let mut d = DiscriminatorSpec {
                x_dim: spec.x_dim,
                y_dim: spec.y_dim,
                head,
            }
            .build()?;
            d.init_params(seeds.discriminator_init);
            if config.objective == Objective::Wgan {
                d.clamp_params(config.wgan_clip);
            }
            Some(d)
        }
    };
    let mut gen_adam = AdamState::for_stack(&gen, config.adam(config.learning_rate));
    let mut disc_adam = disc.as_ref().map(|d| {
        let lr = config.discriminator_learning_rate.unwrap_or(config.learning_rate);
        AdamState::for_stack(d, config.adam(lr))
    });
    let mut data_rng = ChaCha8Rng::seed_from_u64(seeds.data);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seeds.noise);
    let latent = spec.latent_dim;
    let n = config.batch_size;

    let mut history = TrainHistory::default();
    let gen_lr = config.learning_rate;
    for it in 0..config.iterations {
        gen_adam.config.learning_rate = gen_lr * lr_scale(config, it);
        let (x, y) = draw(&mut data_rng, n)?;
        let (d_loss, g_loss) = match (disc.as_mut(), disc_adam.as_mut()) {
            (None, _) | (_, None) => {
                let noise = standard_noise(n, latent, &mut noise_rng);
                let loss = mse_update(&mut gen, &x, &y, Some(&noise), &mut gen_adam)
                    .map_err(|e| at_iteration(it, e))?;
                (None, check_loss(it, "mse", loss)?)
            }
            (Some(d), Some(d_adam)) => {
                let mut d_loss = 0.0;
                for step in 0..config.critic_steps {
                    let (cx, cy) = if step == 0 {
                        (x.clone(), y.clone())
                    } else {
                        draw(&mut data_rng, n)?
                    };
                    let noise = standard_noise(n, latent, &mut noise_rng);
                    d_loss = match config.objective {
                        Objective::Wgan => {
                            let l = wgan_discriminator_update(
                                &gen, d, &cx, &cy, Some(&noise), d_adam, config.wgan_clip,
                            )?;
                            let max = d.params_flat().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                            let seen = history.critic_max_abs.get_or_insert(0.0);
                            *seen = seen.max(max);
                            l
                        }
                        _ => gan_discriminator_update(&gen, d, &cx, &cy, Some(&noise), d_adam)?,
                    };
                    check_loss(it, "discriminator", d_loss)?;
                }
                let noise = standard_noise(n, latent, &mut noise_rng);
                let g_loss = match config.objective {
                    Objective::Wgan => wgan_generator_update(&mut gen, d, &x, Some(&noise), &mut gen_adam)?,
                    _ => gan_generator_update(
                        &mut gen,
                        d,
                        &x,
                        Some(&noise),
                        config.non_saturating,
                        &mut gen_adam,
                    )?,
                };
                (Some(d_loss), check_loss(it, "generator", g_loss)?)
            }
        };
        let divergence = if config.snapshot_every > 0 && (it + 1) % config.snapshot_every == 0 {
            let noise = standard_noise(n, latent, &mut noise_rng);
            let fake = gen.predict(&x, Some(&noise))?;
            if !fake.is_finite() {
                return Err(Error::Diverged {
                    iteration: it,
                    msg: "generator output is not finite".into(),
                });
            }
            Some(mean_marginal_w1(&y, &fake)?)
        } else {
            None
        };
        history.records.push(HistoryRecord {
            iteration: it,
            d_loss,
            g_loss,
            divergence,
        });
    }
    Ok(TrainedModel {
        generator: gen,
        discriminator: disc,
        history,
    })
}

fn lr_scale(config: &TrainConfig, it: usize) -> f64 {
    if config.iterations < 2 {
        return 1.0;
    }
    let t = it as f64 / (config.iterations - 1) as f64;
    1.0 + (config.final_lr_scale - 1.0) * t
}

fn at_iteration(iteration: usize, e: Error) -> Error {
    match e {
        Error::Numeric(msg) => Error::Diverged { iteration, msg },
        other => other,
    }
}
