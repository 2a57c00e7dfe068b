//! Model-facing representation of charts and summaries.

mod example;
mod labels;
mod records;
mod vocab;

pub use example::{build_example, target_summary, write_examples, SummaryMode, TrainingExample};
pub use labels::{label_records, label_tokens};
pub use records::{
    encode_records, value_features, EncodedRecord, RecordTuple, RecordVocab, VALUE_BUCKETS,
};
pub use vocab::{build_vocab, grammar_tokens, VarBounds, Vocab, BOS, EOS, PAD, SPECIALS, UNK};
