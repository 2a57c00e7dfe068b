use std::collections::BTreeSet;

use crate::corpus::ChartSample;
use crate::text::{parse_number, tokenize, values_match};

/// Data cells mentioned in surface text, as `(column, data_row)` with 0-based
/// data rows.
///
/// A numeric cell is mentioned when some token parses to the same value; a
/// text cell when its tokens occur contiguously (case-insensitive).
pub fn mentioned_cells(text: &str, chart: &ChartSample) -> BTreeSet<(usize, usize)> {
    let tokens = tokenize(text);
    let values: Vec<f64> = tokens.iter().filter_map(|t| parse_number(t)).collect();
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut out = BTreeSet::new();
    for (r, row) in chart.table.rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let hit = match cell.value {
                Some(v) => values.iter().any(|&x| values_match(x, v)),
                None => {
                    let needle: Vec<String> =
                        tokenize(&cell.raw).iter().map(|t| t.to_lowercase()).collect();
                    !needle.is_empty() && lower.windows(needle.len()).any(|w| w == needle.as_slice())
                }
            };
            if hit {
                out.insert((c, r));
            }
        }
    }
    out
}
