//! Minimal dense-network engine: layers, backprop, Adam and a finite-difference oracle.

mod adam;
mod gradcheck;
mod io;
mod layer;
mod matrix;
mod stack;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{finite_diff_grad, finite_diff_params, max_relative_error, FD_STEP};
pub use io::{load_stack, read_stack, save_stack, write_stack};
pub use layer::{
    fc_forward, relu, sampler_backward, sampler_forward, sigmoid, softplus, DenseLayer, LayerKind,
};
pub use matrix::Matrix;
pub use stack::{dead_units, stack_forward, LayerGrads, LayerStack, ParamGrads};
