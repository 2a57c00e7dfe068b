use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::labels::{label_records, label_tokens};
use super::records::{encode_records, RecordTuple};
use super::vocab::{VarBounds, Vocab};
use crate::corpus::ChartSample;
use crate::error::{Error, Result};
use crate::template::{templatize, SummaryToken, TemplatedSummary};
use crate::text::tokenize;

/// What the decoder is trained to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryMode {
    /// Summaries with chart-grounded tokens replaced by variables.
    Templated,
    /// Plain summary tokens (the ablation baseline).
    Raw,
}

impl SummaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SummaryMode::Templated => "templated",
            SummaryMode::Raw => "raw",
        }
    }
}

/// The token sequence the decoder learns for `sample`.
pub fn target_summary(sample: &ChartSample, mode: SummaryMode) -> TemplatedSummary {
    match mode {
        SummaryMode::Templated => templatize(&sample.summary, sample),
        SummaryMode::Raw => TemplatedSummary::from_tokens(
            tokenize(&sample.summary)
                .into_iter()
                .map(SummaryToken::Literal)
                .collect(),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub id: String,
    pub records: Vec<RecordTuple>,
    pub record_labels: Vec<u8>,
    pub target_ids: Vec<u32>,
    pub token_labels: Vec<u8>,
}

/// Encodes one sample. Fails when the table or a variable in the target lies
/// outside the vocabulary bounds.
pub fn build_example(
    sample: &ChartSample,
    mode: SummaryMode,
    vocab: &Vocab,
    bounds: &VarBounds,
) -> Result<TrainingExample> {
    let records = encode_records(sample, bounds)?;
    let ts = target_summary(sample, mode);
    let words: Vec<String> = ts.tokens.iter().map(ToString::to_string).collect();
    for (tok, word) in ts.tokens.iter().zip(&words) {
        if tok.as_var().is_some() && vocab.id(word).is_none() {
            return Err(Error::OutOfBounds {
                id: sample.id.clone(),
                message: format!("variable {word} is outside the vocabulary bounds"),
            });
        }
    }
    let record_labels = label_records(&records, &ts);
    let token_labels: Vec<u8> = std::iter::once(0)
        .chain(label_tokens(&ts, &records))
        .chain(std::iter::once(0))
        .collect();
    Ok(TrainingExample {
        id: sample.id.clone(),
        records,
        record_labels,
        target_ids: vocab.encode_target(&words),
        token_labels,
    })
}

pub fn write_examples(path: impl AsRef<Path>, examples: &[TrainingExample]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for ex in examples {
        serde_json::to_writer(&mut w, ex)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
