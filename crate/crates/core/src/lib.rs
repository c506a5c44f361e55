//! Learn stochastic channel models `p(y|x)` from paired samples with a
//! variational conditional GAN, alongside an MSE regression baseline.
//!
//! * [`netcore`]: dense layers, backprop, Adam, finite-difference oracle
//! * [`vgan`]: generator/discriminator, objectives, training loop
//! * [`channels`]: ground-truth channel simulators and datasets
//! * [`modulation`]: BPSK, QPSK and 16-QAM symbol sources
//! * [`eval`]: histograms, divergences, moments, model reports
//! * [`cli`]: experiment configs, presets and the runner behind the binary

pub mod channels;
pub mod cli;
pub mod error;
pub mod eval;
pub mod modulation;
pub mod netcore;
pub mod seeds;
pub mod vgan;

pub use error::{Error, Result};
