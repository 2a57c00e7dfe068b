use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{bleu, content_selection, corpus_bleu};
use crate::corpus::ChartSample;
use crate::error::{Error, Result};
use crate::text::tokenize;

pub const BLEU_VARIANT: &str = "sentence BLEU-4, add-one smoothing for n >= 2, mean over samples";

#[derive(Debug, Clone, Copy)]
pub struct EvalInput<'a> {
    pub id: &'a str,
    pub generated: &'a str,
    pub gold: &'a str,
    pub chart: &'a ChartSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub bleu: f64,
    pub cs: f64,
    pub mentions_gen: usize,
    pub overlap: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub bleu_variant: String,
    /// "templated", "raw" or anything the caller uses to tell runs apart.
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: Vec<SampleScore>,
    pub bleu_mean: f64,
    pub bleu_std: f64,
    pub corpus_bleu: f64,
    pub cs_mean: f64,
    /// Population standard deviation.
    pub cs_std: f64,
    pub n_flagged: usize,
    pub config: EvalConfig,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn evaluate_corpus(outputs: &[EvalInput<'_>], tag: Option<&str>) -> Result<EvalReport> {
    if outputs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut samples = Vec::with_capacity(outputs.len());
    let mut pairs = Vec::with_capacity(outputs.len());
    for o in outputs {
        let cand = tokenize(o.generated);
        let reference = tokenize(o.gold);
        let cs = content_selection(o.generated, o.gold, o.chart);
        samples.push(SampleScore {
            id: o.id.to_string(),
            bleu: bleu(&cand, &reference, 4),
            cs: cs.cs,
            mentions_gen: cs.mentions_gen,
            overlap: cs.overlap,
            flagged: cs.flagged,
        });
        pairs.push((cand, reference));
    }
    let bleus: Vec<f64> = samples.iter().map(|s| s.bleu).collect();
    let css: Vec<f64> = samples.iter().map(|s| s.cs).collect();
    let (bleu_mean, bleu_std) = mean_std(&bleus);
    let (cs_mean, cs_std) = mean_std(&css);
    Ok(EvalReport {
        n_flagged: samples.iter().filter(|s| s.flagged).count(),
        samples,
        bleu_mean,
        bleu_std,
        corpus_bleu: corpus_bleu(&pairs, 4),
        cs_mean,
        cs_std,
        config: EvalConfig { bleu_variant: BLEU_VARIANT.to_string(), tag: tag.map(str::to_string) },
    })
}

impl EvalReport {
    /// Corpus figures in the "mean (std)" layout, followed by per-sample rows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let tag = self.config.tag.as_deref().unwrap_or("-");
        let _ = writeln!(s, "{:<12} {:>16} {:>16} {:>12}", "System", "BLEU", "CS", "Corpus BLEU");
        let _ = writeln!(
            s,
            "{:<12} {:>16} {:>16} {:>12.4}",
            tag,
            format!("{:.4} ({:.4})", self.bleu_mean, self.bleu_std),
            format!("{:.2} ({:.2})", self.cs_mean, self.cs_std),
            self.corpus_bleu
        );
        let _ = writeln!(s, "samples: {}, zero-mention (flagged): {}", self.samples.len(), self.n_flagged);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<24} {:>8} {:>8} {:>6} {:>6}", "id", "bleu", "cs", "|G|", "|G∩R|");
        for x in &self.samples {
            let _ = writeln!(
                s,
                "{:<24} {:>8.4} {:>8.2} {:>6} {:>6}{}",
                x.id,
                x.bleu,
                x.cs,
                x.mentions_gen,
                x.overlap,
                if x.flagged { "  flagged" } else { "" }
            );
        }
        s
    }
}
