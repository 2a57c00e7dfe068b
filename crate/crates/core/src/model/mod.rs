//! Transformer encoder-decoder over record tuples with a content-selection
//! head. Forward and backward passes are written out by hand on `ndarray`.

mod checkpoint;
mod config;
mod decode;
mod layers;
mod loss;
mod network;
mod optim;
mod params;
mod positional;
mod train;

pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint, Checkpoint, TensorEntry,
    FORMAT_VERSION, MAGIC,
};
pub use config::{ModelConfig, ModelDims, TrainConfig};
pub use decode::{
    beam_decode, beam_from, compare_hypotheses, greedy_decode, greedy_from, mean_log_prob,
};
pub use layers::{Attention, FeedForward, LayerNorm, Linear, A2};
pub use loss::{log_softmax_row, loss, sigmoid};
pub use network::{Encoded, Example, ForwardOutput, Model};
pub use optim::{clip_grad_norm, Adam};
pub use params::{DecoderLayer, EncoderLayer, Params};
pub use positional::positional_encoding;
pub use train::{train, EpochRecord, History};
