//! BLEU and the content-selection measure, per sample and per corpus.

mod bleu;
mod report;

use serde::{Deserialize, Serialize};

pub use bleu::{bleu, corpus_bleu};
pub use report::{evaluate_corpus, EvalConfig, EvalInput, EvalReport, SampleScore, BLEU_VARIANT};

use crate::corpus::ChartSample;
use crate::template::mentioned_cells;

/// Content selection of one generated text against its gold text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentSelection {
    /// `100 × |G ∩ R| / |G|`, or 0 when nothing is mentioned.
    pub cs: f64,
    /// |G|: data cells mentioned in the generated text.
    pub mentions_gen: usize,
    /// |G ∩ R|.
    pub overlap: usize,
    /// Set when the generated text mentions no cell.
    pub flagged: bool,
}

/// Share of the data cells mentioned by `generated` that `gold` mentions too,
/// in percent. Mentions are decided on surface text.
pub fn content_selection(generated: &str, gold: &str, chart: &ChartSample) -> ContentSelection {
    let g = mentioned_cells(generated, chart);
    let r = mentioned_cells(gold, chart);
    let overlap = g.intersection(&r).count();
    if g.is_empty() {
        return ContentSelection { cs: 0.0, mentions_gen: 0, overlap: 0, flagged: true };
    }
    ContentSelection {
        cs: 100.0 * overlap as f64 / g.len() as f64,
        mentions_gen: g.len(),
        overlap,
        flagged: false,
    }
}
