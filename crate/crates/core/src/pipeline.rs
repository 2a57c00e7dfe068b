//! End-to-end wiring: charts to training examples, training, generation and
//! scoring, for either summary mode.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ChartSample;
use crate::encoding::{
    build_example, build_vocab, target_summary, RecordVocab, SummaryMode, TrainingExample, VarBounds, Vocab,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_corpus, EvalInput, EvalReport};
use crate::model::{
    beam_from, greedy_from, load_checkpoint, save_checkpoint, train, Checkpoint, Example, History, Model, ModelConfig, ModelDims, TrainConfig,
};
use crate::template::{detemplatize, DetempReport, SummaryToken};
use crate::text::detokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: SummaryMode,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub bounds: VarBounds,
    pub min_freq: usize,
    /// Seed for parameter initialization.
    pub model_seed: u64,
}

impl PipelineConfig {
    /// Desk-scale settings, sized for the synthetic generator's tables.
    pub fn desk(mode: SummaryMode) -> Self {
        PipelineConfig {
            mode,
            model: ModelConfig::desk(),
            train: TrainConfig::desk(),
            bounds: VarBounds {
                max_columns: 8,
                max_rows: 16,
                max_title_tokens: 16,
                max_subjects: 4,
            },
            min_freq: 1,
            model_seed: 0,
        }
    }

    pub fn paper(mode: SummaryMode) -> Self {
        PipelineConfig {
            mode,
            model: ModelConfig::paper(),
            train: TrainConfig::paper(),
            bounds: VarBounds::default(),
            min_freq: 1,
            model_seed: 0,
        }
    }
}

/// What a checkpoint must carry besides the weights to generate again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMeta {
    pub mode: SummaryMode,
    pub bounds: VarBounds,
    pub record_vocab: RecordVocab,
}

/// A trained model together with its vocabularies.
#[derive(Debug, Clone)]
pub struct System {
    pub mode: SummaryMode,
    pub bounds: VarBounds,
    pub vocab: Vocab,
    pub record_vocab: RecordVocab,
    pub model: Model,
}

/// One generated summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub id: String,
    /// Decoded tokens before variable resolution, EOS removed.
    pub tokens: Vec<String>,
    pub text: String,
    pub report: DetempReport,
}

/// Target texts (templated or raw, whitespace-joined) for vocabulary building.
pub fn target_texts(samples: &[ChartSample], mode: SummaryMode) -> Vec<String> {
    samples.iter().map(|s| target_summary(s, mode).to_text()).collect()
}

impl System {
    /// Builds vocabularies from `samples` and initializes an untrained model.
    pub fn init(samples: &[ChartSample], config: &PipelineConfig) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let texts = target_texts(samples, config.mode);
        let vocab = build_vocab(texts.iter().map(String::as_str), config.min_freq, &config.bounds);
        let record_vocab = RecordVocab::build(samples, config.min_freq);
        let dims = ModelDims {
            target_vocab: vocab.len(),
            header_vocab: record_vocab.headers.len(),
            value_vocab: record_vocab.values.len(),
            columns: config.bounds.max_columns,
            chart_types: 4,
        };
        let model = Model::new(config.model.clone(), dims, config.model_seed)?;
        Ok(System { mode: config.mode, bounds: config.bounds, vocab, record_vocab, model })
    }

    pub fn meta(&self) -> SystemMeta {
        SystemMeta { mode: self.mode, bounds: self.bounds, record_vocab: self.record_vocab.clone() }
    }

    pub fn from_checkpoint(checkpoint: Checkpoint, vocab: Vocab) -> Result<Self> {
        if checkpoint.vocab_hash != vocab.hash() {
            return Err(Error::VocabMismatch { checkpoint: checkpoint.vocab_hash, vocab: vocab.hash() });
        }
        let meta: SystemMeta = serde_json::from_value(checkpoint.meta)
            .map_err(|e| Error::Checkpoint(format!("missing pipeline metadata: {e}")))?;
        if vocab.len() != checkpoint.model.dims.target_vocab {
            return Err(Error::Checkpoint(format!(
                "vocabulary has {} tokens, model expects {}",
                vocab.len(),
                checkpoint.model.dims.target_vocab
            )));
        }
        Ok(System {
            mode: meta.mode,
            bounds: meta.bounds,
            vocab,
            record_vocab: meta.record_vocab,
            model: checkpoint.model,
        })
    }

    /// Writes the checkpoint and its vocabulary file.
    pub fn save(&self, checkpoint: impl AsRef<Path>, vocab: impl AsRef<Path>) -> Result<()> {
        let meta = serde_json::to_value(self.meta())?;
        save_checkpoint(checkpoint, &self.model, &self.vocab.hash(), &meta)?;
        self.vocab.save(vocab)
    }

    pub fn load(checkpoint: impl AsRef<Path>, vocab: impl AsRef<Path>) -> Result<Self> {
        let ckpt = load_checkpoint(checkpoint)?;
        Self::from_checkpoint(ckpt, Vocab::load(vocab)?)
    }

    /// Encodes one sample for training.
    pub fn example(&self, sample: &ChartSample) -> Result<(TrainingExample, Example)> {
        let te = build_example(sample, self.mode, &self.vocab, &self.bounds)?;
        let records = self.record_vocab.encode(sample, &self.bounds)?;
        let ex = Example {
            records,
            record_labels: te.record_labels.clone(),
            target_ids: te.target_ids.clone(),
        };
        Ok((te, ex))
    }

    pub fn examples(&self, samples: &[ChartSample]) -> Result<Vec<Example>> {
        samples.iter().map(|s| self.example(s).map(|(_, e)| e)).collect()
    }

    pub fn train(&mut self, train_set: &[ChartSample], validation: &[ChartSample], tc: &TrainConfig) -> Result<History> {
        let train_ex = self.examples(train_set)?;
        let val_ex = self.examples(validation)?;
        train(&mut self.model, &train_ex, &val_ex, tc)
    }

    /// Beam-decodes a summary for `chart` (`beam_size` 1 decodes greedily)
    /// and resolves its variables against the chart.
    pub fn generate(&self, chart: &ChartSample, beam_size: usize) -> Result<Generation> {
        let records = self.record_vocab.encode(chart, &self.bounds)?;
        let enc = self.model.encode(&records)?;
        let max_len = self.model.config.max_target_len;
        let ids = if beam_size <= 1 {
            greedy_from(&self.model, &enc, max_len)?
        } else {
            beam_from(&self.model, &enc, beam_size, max_len)?
        };
        let tokens = self.vocab.decode(&ids);
        let (text, report) = match self.mode {
            SummaryMode::Templated => {
                let parsed: Vec<SummaryToken> = tokens.iter().map(|t| SummaryToken::parse(t)).collect();
                let d = detemplatize(&parsed, chart);
                (d.text, d.report)
            }
            SummaryMode::Raw => (detokenize(&tokens), DetempReport::default()),
        };
        Ok(Generation { id: chart.id.clone(), tokens, text, report })
    }

    /// Generates for every chart and scores against the gold summaries.
    pub fn evaluate(&self, charts: &[ChartSample], beam_size: usize) -> Result<(Vec<Generation>, EvalReport)> {
        let gens: Vec<Generation> = charts.iter().map(|c| self.generate(c, beam_size)).collect::<Result<_>>()?;
        let inputs: Vec<EvalInput<'_>> = charts
            .iter()
            .zip(&gens)
            .map(|(c, g)| EvalInput { id: &c.id, generated: &g.text, gold: &c.summary, chart: c })
            .collect();
        let report = evaluate_corpus(&inputs, Some(self.mode.as_str()))?;
        Ok((gens, report))
    }
}
