use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schema::{Corpus, SplitTag};
use crate::error::{Error, Result};

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.70,
            validation: 0.15,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Self {
        SplitRatios {
            train,
            validation,
            test,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.validation, self.test];
        let fail = |message: &str| Error::SplitRatios {
            ratios: all,
            message: message.to_string(),
        };
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(fail("ratios must be finite and non-negative"));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(fail("ratios must sum to 1"));
        }
        Ok(())
    }

    /// Part sizes for `n` samples: validation and test are rounded to the
    /// nearest integer, train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let validation = (((n as f64) * self.validation).round() as usize).min(n);
        let test = (((n as f64) * self.test).round() as usize).min(n - validation);
        (n - validation - test, validation, test)
    }
}

/// Deterministic shuffle-then-cut split.
pub fn split_corpus(
    corpus: &Corpus,
    ratios: SplitRatios,
    seed: u64,
) -> Result<(Corpus, Corpus, Corpus)> {
    ratios.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (n_train, n_val, _) = ratios.sizes(corpus.len());
    let part = |idx: &[usize], tag| Corpus {
        samples: idx.iter().map(|&i| corpus.samples[i].clone()).collect(),
        split_tag: Some(tag),
    };
    Ok((
        part(&order[..n_train], SplitTag::Train),
        part(&order[n_train..n_train + n_val], SplitTag::Validation),
        part(&order[n_train + n_val..], SplitTag::Test),
    ))
}
