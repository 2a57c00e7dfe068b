use super::records::RecordTuple;
use crate::template::{SummaryToken, TemplatedSummary};
use crate::text::{comparison_key, numbers_match};

fn literal_equals(literal: &str, text: &str) -> bool {
    numbers_match(literal, text) || comparison_key(literal) == comparison_key(text.trim())
}

/// Whether a summary token points at `record`: a variable naming its cell, or
/// a literal equal to its value.
fn grounds(token: &SummaryToken, record: &RecordTuple) -> bool {
    match token {
        SummaryToken::Var(v) => {
            v.table_coords() == Some((record.column_index, record.row + 1))
        }
        SummaryToken::Literal(s) => literal_equals(s, &record.value),
    }
}

/// 1 for every record the summary mentions, by variable reference or by a
/// literal equal to the record's value.
pub fn label_records(records: &[RecordTuple], ts: &TemplatedSummary) -> Vec<u8> {
    records
        .iter()
        .map(|r| u8::from(ts.tokens.iter().any(|t| grounds(t, r))))
        .collect()
}

/// 1 for every summary token that is present in the records: a variable
/// pointing at a record cell or header, or a literal equal to some record's
/// value or header.
pub fn label_tokens(ts: &TemplatedSummary, records: &[RecordTuple]) -> Vec<u8> {
    ts.tokens
        .iter()
        .map(|t| {
            let hit = match t {
                SummaryToken::Var(v) => match v.table_coords() {
                    Some((c, 0)) => records.iter().any(|r| r.column_index == c),
                    Some((c, row)) => records
                        .iter()
                        .any(|r| r.column_index == c && r.row + 1 == row),
                    None => false,
                },
                SummaryToken::Literal(s) => records
                    .iter()
                    .any(|r| literal_equals(s, &r.value) || literal_equals(s, &r.header)),
            };
            u8::from(hit)
        })
        .collect()
}
