use std::collections::{BTreeMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::schema::{ChartType, Corpus};
use crate::error::{Error, Result};
use crate::text::{split_sentences, tokenize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n_samples: usize,
    pub chart_types: BTreeMap<String, usize>,
    pub simple_total: usize,
    pub complex_total: usize,
    pub line_total: usize,
    pub bar_total: usize,
    pub mean_token_count: f64,
    pub mean_sentence_count: f64,
    pub vocab_size: usize,
    pub total_tokens: usize,
    pub mean_data_cells: f64,
}

impl StatsReport {
    pub fn count(&self, t: ChartType) -> usize {
        self.chart_types.get(t.as_str()).copied().unwrap_or(0)
    }

    /// Share of samples of each chart type, in percent.
    pub fn proportion(&self, t: ChartType) -> f64 {
        100.0 * self.count(t) as f64 / self.n_samples as f64
    }

    /// Chart-type and summary statistics as two aligned text tables.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = |t| self.count(t);
        let _ = writeln!(s, "Chart type distribution");
        let _ = writeln!(s, "{:<10} {:>8} {:>8} {:>8}", "", "Line", "Bar", "Total");
        let _ = writeln!(
            s,
            "{:<10} {:>8} {:>8} {:>8}",
            "Simple",
            c(ChartType::SimpleLine),
            c(ChartType::SimpleBar),
            self.simple_total
        );
        let _ = writeln!(
            s,
            "{:<10} {:>8} {:>8} {:>8}",
            "Complex",
            c(ChartType::ComplexLine),
            c(ChartType::ComplexBar),
            self.complex_total
        );
        let _ = writeln!(s, "{:<10} {:>8} {:>8}", "Total", self.line_total, self.bar_total);
        let _ = writeln!(s);
        let _ = writeln!(s, "Dataset statistics");
        let rows = [
            ("Mean Token Count", format!("{:.1}", self.mean_token_count)),
            ("Mean Sentence Count", format!("{:.1}", self.mean_sentence_count)),
            ("Vocab Size", self.vocab_size.to_string()),
            ("Total Tokens", self.total_tokens.to_string()),
            ("Mean Data Cells", format!("{:.1}", self.mean_data_cells)),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k:<22} {v:>10}");
        }
        s
    }
}

pub fn corpus_stats(corpus: &Corpus) -> Result<StatsReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut chart_types: BTreeMap<String, usize> =
        ChartType::ALL.iter().map(|t| (t.as_str().to_string(), 0)).collect();
    let mut vocab = HashSet::new();
    let mut total_tokens = 0;
    let mut total_sentences = 0;
    let mut total_cells = 0;
    for s in &corpus.samples {
        *chart_types.entry(s.chart_type.as_str().to_string()).or_default() += 1;
        let toks = tokenize(&s.summary);
        total_tokens += toks.len();
        vocab.extend(toks);
        total_sentences += split_sentences(&s.summary).len();
        total_cells += s.table.n_cells();
    }
    let n = corpus.len();
    let get = |t: ChartType| chart_types[t.as_str()];
    Ok(StatsReport {
        n_samples: n,
        simple_total: get(ChartType::SimpleBar) + get(ChartType::SimpleLine),
        complex_total: get(ChartType::ComplexBar) + get(ChartType::ComplexLine),
        line_total: get(ChartType::SimpleLine) + get(ChartType::ComplexLine),
        bar_total: get(ChartType::SimpleBar) + get(ChartType::ComplexBar),
        chart_types,
        mean_token_count: total_tokens as f64 / n as f64,
        mean_sentence_count: total_sentences as f64 / n as f64,
        vocab_size: vocab.len(),
        total_tokens,
        mean_data_cells: total_cells as f64 / n as f64,
    })
}
