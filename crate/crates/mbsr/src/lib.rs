//! File formats, exporters and the command-line front end built on `mbsr-core`.

pub mod block;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod history;
pub mod relmap;
pub mod report;
pub mod reqif;
pub mod table;
pub mod time;
pub mod xmi;

pub use corpus::{load_corpus, parse_corpus, serialize, CorpusError, Loaded};
