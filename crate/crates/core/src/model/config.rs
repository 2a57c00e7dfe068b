use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub ff_dim: usize,
    pub dropout: f64,
    pub use_positional_embeddings: bool,
    pub max_records: usize,
    pub max_target_len: usize,
    pub beam_size: usize,
    pub cs_loss_weight: f64,
}

impl ModelConfig {
    /// Small enough to train on one CPU core in minutes.
    pub fn desk() -> Self {
        ModelConfig {
            d_model: 64,
            n_heads: 2,
            encoder_layers: 1,
            decoder_layers: 2,
            ff_dim: 128,
            dropout: 0.1,
            use_positional_embeddings: true,
            max_records: 256,
            max_target_len: 160,
            beam_size: 4,
            cs_loss_weight: 1.0,
        }
    }

    pub fn paper() -> Self {
        ModelConfig {
            d_model: 512,
            n_heads: 8,
            encoder_layers: 1,
            decoder_layers: 6,
            ff_dim: 2048,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_model", self.d_model),
            ("n_heads", self.n_heads),
            ("encoder_layers", self.encoder_layers),
            ("decoder_layers", self.decoder_layers),
            ("ff_dim", self.ff_dim),
            ("max_records", self.max_records),
            ("max_target_len", self.max_target_len),
            ("beam_size", self.beam_size),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::Config(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        // Four record features of equal width, and sin/cos pairs.
        if !self.d_model.is_multiple_of(4) {
            return Err(Error::Config(format!("d_model {} is not divisible by 4", self.d_model)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.cs_loss_weight >= 0.0 && self.cs_loss_weight.is_finite()) {
            return Err(Error::Config(format!(
                "cs_loss_weight {} must be finite and non-negative",
                self.cs_loss_weight
            )));
        }
        Ok(())
    }
}

/// Sizes of the embedding and output tables, fixed by the vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub target_vocab: usize,
    pub header_vocab: usize,
    pub value_vocab: usize,
    pub columns: usize,
    pub chart_types: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Optimizer updates per epoch.
    pub updates_per_epoch: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn desk() -> Self {
        TrainConfig {
            epochs: 20,
            updates_per_epoch: 100,
            batch_size: 6,
            learning_rate: 1e-3,
            clip_norm: 1.0,
            seed: 0,
        }
    }

    pub fn paper() -> Self {
        TrainConfig {
            epochs: 80,
            updates_per_epoch: 1000,
            ..Self::desk()
        }
    }

    /// The learning rate may be zero (a no-op run); everything else must be
    /// positive.
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.updates_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs, updates_per_epoch and batch_size must be at least 1".into(),
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("invalid learning rate {}", self.learning_rate)));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::Config(format!("clip_norm {} must be positive", self.clip_norm)));
        }
        Ok(())
    }

    pub fn total_updates(&self) -> usize {
        self.epochs * self.updates_per_epoch
    }
}
