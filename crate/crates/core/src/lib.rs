//! Chart-to-text summarization.
//!
//! The pipeline rewrites gold summaries into data-variable form
//! ([`template`]), encodes charts as record tuples ([`encoding`]), trains a
//! transformer encoder-decoder with a content-selection head ([`model`]),
//! decodes with beam search, resolves variables back into text and scores the
//! result ([`metrics`]).

pub mod corpus;
pub mod encoding;
pub mod error;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod template;
pub mod text;

pub use error::{Error, Result};
