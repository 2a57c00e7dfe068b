use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::vocab::{VarBounds, Vocab};
use crate::corpus::{ChartSample, ChartType, DataTable};
use crate::error::{Error, Result};

/// One data cell as model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTuple {
    pub header: String,
    pub value: String,
    pub column_index: usize,
    pub chart_type: ChartType,
    /// 0-based data row the cell came from.
    pub row: usize,
}

/// One record per data cell, row-major, so record order follows table order.
pub fn encode_records(chart: &ChartSample, bounds: &VarBounds) -> Result<Vec<RecordTuple>> {
    let table = &chart.table;
    if table.n_columns() > bounds.max_columns {
        return Err(Error::OutOfBounds {
            id: chart.id.clone(),
            message: format!(
                "{} columns, vocabulary supports {}",
                table.n_columns(),
                bounds.max_columns
            ),
        });
    }
    if table.n_rows() > bounds.max_rows {
        return Err(Error::OutOfBounds {
            id: chart.id.clone(),
            message: format!("{} rows, vocabulary supports {}", table.n_rows(), bounds.max_rows),
        });
    }
    Ok(table
        .rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter().enumerate().map(move |(c, cell)| RecordTuple {
                header: table.headers[c].clone(),
                value: cell.raw.clone(),
                column_index: c,
                chart_type: chart.chart_type,
                row: r,
            })
        })
        .collect())
}

/// Number of magnitude levels numeric values are bucketed into.
pub const VALUE_BUCKETS: usize = 10;

/// Value-feature tokens for each cell of a table, row-major.
///
/// Numeric cells become a magnitude bucket `<num:k>` relative to their group:
/// the x column on its own, all value columns together. The largest value of
/// a group is always bucket 9 and the smallest bucket 0. Text cells keep their
/// raw text.
pub fn value_features(table: &DataTable) -> Vec<String> {
    let group = |c: usize| usize::from(c > 0);
    let mut range = [(f64::INFINITY, f64::NEG_INFINITY); 2];
    for row in &table.rows {
        for (c, cell) in row.iter().enumerate() {
            if let Some(v) = cell.value {
                let r = &mut range[group(c)];
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
    }
    table
        .rows
        .iter()
        .flat_map(|row| row.iter().enumerate())
        .map(|(c, cell)| match cell.value {
            Some(v) => {
                let (lo, hi) = range[group(c)];
                let k = if hi > lo {
                    (((v - lo) / (hi - lo)) * (VALUE_BUCKETS - 1) as f64).round() as usize
                } else {
                    0
                };
                format!("<num:{k}>")
            }
            None => cell.raw.clone(),
        })
        .collect()
}

/// Record tuple as embedding-table indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedRecord {
    pub header: u32,
    pub value: u32,
    pub column: u32,
    pub chart_type: u32,
}

impl EncodedRecord {
    /// Padding record; masked out of attention and the content-selection loss.
    pub const PAD: EncodedRecord = EncodedRecord {
        header: 0,
        value: 0,
        column: 0,
        chart_type: 0,
    };

    pub fn is_pad(&self) -> bool {
        self.header == super::vocab::PAD
    }
}

/// Vocabularies of the header and value features, built from training charts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordVocab {
    pub headers: Vocab,
    pub values: Vocab,
}

impl RecordVocab {
    pub fn build<'a, I: IntoIterator<Item = &'a ChartSample>>(charts: I, min_freq: usize) -> Self {
        let mut headers: HashMap<String, usize> = HashMap::new();
        let mut values: HashMap<String, usize> = HashMap::new();
        for chart in charts {
            for h in &chart.table.headers {
                *headers.entry(h.clone()).or_default() += 1;
            }
            for v in value_features(&chart.table) {
                if !v.starts_with("<num:") {
                    *values.entry(v).or_default() += 1;
                }
            }
        }
        let ordered = |m: HashMap<String, usize>| {
            let mut v: Vec<(String, usize)> = m.into_iter().filter(|(_, n)| *n >= min_freq.max(1)).collect();
            v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            v.into_iter().map(|(t, _)| t)
        };
        let buckets = (0..VALUE_BUCKETS).map(|k| format!("<num:{k}>"));
        RecordVocab {
            headers: Vocab::from_tokens(ordered(headers)),
            values: Vocab::from_tokens(buckets.chain(ordered(values))),
        }
    }

    /// Embedding indices for a chart's records.
    pub fn encode(&self, chart: &ChartSample, bounds: &VarBounds) -> Result<Vec<EncodedRecord>> {
        let records = encode_records(chart, bounds)?;
        let values = value_features(&chart.table);
        Ok(records
            .iter()
            .zip(values)
            .map(|(r, v)| EncodedRecord {
                header: self.headers.id_or_unk(&r.header),
                value: self.values.id_or_unk(&v),
                column: r.column_index as u32,
                chart_type: r.chart_type.index() as u32,
            })
            .collect())
    }
}
