//! Small dense-network engine with hand-written reverse mode.

mod adam;
mod mlp;
mod softmax;

pub use adam::{clip_grad_norm, Adam};
pub use mlp::{Activation, GradientTape, Mlp};
pub use softmax::{argmax, entropy, log_softmax, softmax, softmax_sample};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("backward called before forward")]
    NoForward,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid architecture: {0}")]
    Architecture(String),
}

/// Policy and value trunk: two hidden layers of 64 tanh units.
pub fn actor_critic_sizes(input: usize, output: usize) -> Vec<usize> {
    vec![input, 64, 64, output]
}

pub const TANH_TRUNK: [Activation; 3] = [Activation::Tanh, Activation::Tanh, Activation::Linear];
