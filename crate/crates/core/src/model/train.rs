use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::network::{Example, Model};
use super::optim::{clip_grad_norm, Adam};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean minibatch loss over the epoch's updates (dropout active).
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Training-set loss before the first update, dropout off.
    pub initial_loss: f64,
    /// Training-set loss after the last update, dropout off.
    pub final_loss: f64,
    pub updates: usize,
    pub epochs: Vec<EpochRecord>,
}

/// Runs `epochs × updates_per_epoch` Adam steps on minibatches drawn from a
/// seeded reshuffle of `train`.
pub fn train(model: &mut Model, train: &[Example], validation: &[Example], tc: &TrainConfig) -> Result<History> {
    tc.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut order_rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(tc.seed);
    dropout_rng.set_stream(1);
    let mut opt = Adam::new(&model.params, tc.learning_rate);
    let initial_loss = model.loss(train)?;
    log::info!("initial training loss {initial_loss:.4}");

    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut order_rng);
    let mut cursor = 0;
    let mut epochs = Vec::with_capacity(tc.epochs);
    let mut updates = 0;
    for epoch in 1..=tc.epochs {
        let mut sum = 0.0;
        for step in 1..=tc.updates_per_epoch {
            let mut batch = Vec::with_capacity(tc.batch_size);
            while batch.len() < tc.batch_size {
                if cursor == order.len() {
                    order.shuffle(&mut order_rng);
                    cursor = 0;
                }
                batch.push(train[order[cursor]].clone());
                cursor += 1;
            }
            let diverged = |message: String| Error::Divergence { epoch, step, message };
            let (loss, mut grads) = model
                .loss_and_grad(&batch, Some(&mut dropout_rng))
                .map_err(|e| match e {
                    Error::NonFinite(m) => diverged(m),
                    other => other,
                })?;
            clip_grad_norm(&mut grads, tc.clip_norm);
            opt.step(&mut model.params, &grads);
            if !model.params.all_finite() {
                return Err(diverged("non-finite parameters after update".into()));
            }
            sum += loss;
            updates += 1;
        }
        let train_loss = sum / tc.updates_per_epoch as f64;
        let validation_loss = if validation.is_empty() { None } else { Some(model.loss(validation)?) };
        log::info!(
            "epoch {epoch}/{}: train {train_loss:.4}{}",
            tc.epochs,
            validation_loss.map(|v| format!(", validation {v:.4}")).unwrap_or_default()
        );
        epochs.push(EpochRecord { epoch, train_loss, validation_loss });
    }
    let final_loss = model.loss(train)?;
    log::info!("final training loss {final_loss:.4}");
    Ok(History { initial_loss, final_loss, updates, epochs })
}
