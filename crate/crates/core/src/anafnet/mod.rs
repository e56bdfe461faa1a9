//! Forward-only ANAFNet: NAFNet blocks in a U-shaped network with attention
//! gates on the skip connections. Weights come from a parameter file or a
//! seeded random initialization; there is no training.

mod block;
mod io;
mod net;
mod ops;
mod tensor;

pub use block::{nafblock, LayerNormParams, NafBlockParams};
pub use io::{read_params, write_params, PARAM_MAGIC};
pub use net::{anafnet_forward, deblur_image, AnafConfig, AnafParams, StageParams};
pub use ops::{attention_gate, conv2d, layer_norm, sca, simple_gate, AttentionGateParams, ConvParams, LN_EPS};
pub use tensor::Tensor4;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnafError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("tensor contains a non-finite value")]
    NonFinite,
    #[error("simple gate needs an even channel count, got {0}")]
    OddChannels(usize),
    #[error("spatial size {h}x{w} is not divisible by 2^{depth}")]
    Indivisible { h: usize, w: usize, depth: usize },
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
