//! Variational conditional GAN: generator/discriminator networks, the MSE,
//! cross-entropy and Wasserstein objectives, and the alternating training loop.

mod networks;
mod objectives;
mod train;

pub use networks::{
    standard_noise, DiscriminatorHead, DiscriminatorSpec, GeneratorSpec, DEFAULT_LATENT_DIM,
};
pub use objectives::{
    gan_discriminator_loss_grad, gan_discriminator_update, gan_generator_loss_grad,
    gan_generator_update, mse_loss_grad, mse_update, wgan_discriminator_loss_grad,
    wgan_discriminator_update, wgan_generator_loss_grad, wgan_generator_update, D_CLAMP,
};
pub use train::{
    train, train_on_dataset, HistoryRecord, Objective, TrainConfig, TrainHistory, TrainedModel,
};
