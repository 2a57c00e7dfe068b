//! Data-variable substitution: rewriting summaries so that chart-grounded
//! tokens become indexed variables, and resolving variables back to text.

pub mod lexicon;
mod matcher;
mod mention;
mod subjects;
mod substitute;
mod var;

pub use matcher::{match_category, ChartIndex};
pub use mention::mentioned_cells;
pub use subjects::detect_subjects;
pub use substitute::{
    detemplatize, templatize, templatize_tokens, DetempReport, Detemplatized, TemplatedSummary,
    UnresolvedVar, UNK_REF,
};
pub use var::{parse_templated, Axis, Category, Direction, ParseVarError, SummaryToken, TemplateVar};
