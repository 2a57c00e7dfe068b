//! Dataset schema, loading, splitting, statistics and synthetic generation.

mod axis;
mod schema;
mod split;
mod stats;
pub mod synth;

pub use axis::{recover_axis_label, TEMPORAL_SHARE};
pub use schema::{
    load_corpus, scan_corpus, Cell, ChartSample, ChartType, Corpus, DataTable, SplitTag, Violation,
};
pub use split::{split_corpus, SplitRatios};
pub use stats::{corpus_stats, StatsReport};
pub use synth::{generate_synthetic_corpus, SynthSpec};
