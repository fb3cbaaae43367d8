//! Detect framing changes between two periods of news coverage, measure
//! news-cycle features per year, and predict years of legislative activity
//! from how those features change.
//!
//! The pipeline modules, in the order they are usually composed:
//!
//! - [`corpus`]: articles, tokenization, n-grams, term-frequency matrices
//! - [`keywords`]: information-gain keywords separating two periods
//! - [`semantics`]: co-occurrence embeddings, word mover's distance
//! - [`framing`]: score and threshold a keyword set into a decision
//! - [`newscycle`]: annual volume, sentiment and correlation
//! - [`legislation`]: change-pattern model over annual features
//! - [`datasets`]: random-forest bootstrapping of topic datasets
//! - [`metrics`]: precision/recall/F1, accuracy, Cohen's kappa

pub mod corpus;
pub mod datasets;
pub mod framing;
pub mod keywords;
pub mod legislation;
pub mod metrics;
pub mod newscycle;
pub mod rng;
pub mod semantics;
mod stats;

pub use corpus::{Article, Corpus, DateRange, Label, NGram, NgramOrders, Source, TfMatrix, Tokenizer};
