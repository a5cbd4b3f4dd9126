//! Retrieval-augmented generation over knowledge-graph walks.
//!
//! The crate turns a knowledge graph into a corpus of walks rooted at every
//! entity (random walks or BFS spanning-tree paths), verbalizes each distinct
//! walk into a sentence, and indexes walks and per-node global
//! representations as vectors. At query time the `k` nodes most similar to
//! the question are selected, then the `k` most similar walks of each of
//! those nodes, and the resulting context is handed to a language model in a
//! single call.
//!
//! Module map:
//!
//! - [`graph`]: parsing, storage and mutation of the knowledge graph
//! - [`walker`]: walk corpus generation and incremental maintenance
//! - [`verbalizer`]: walk-to-text, by template or language model
//! - [`llm`]: chat client abstraction, HTTP client and offline mocks
//! - [`embed`]: embedders, cosine similarity and the exact kNN index
//! - [`retriever`]: two-stage node/walk retrieval
//! - [`qa`]: answer prompt assembly and abstention detection
//! - [`eval`]: benchmark loading, scoring and aggregate reports
//! - [`pipeline`]: in-memory orchestration of build and update
//! - [`app`]: on-disk artifacts and the command implementations

pub mod app;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
mod hash;
pub mod llm;
pub mod pipeline;
pub mod qa;
pub mod records;
pub mod retriever;
mod template;
pub mod verbalizer;
pub mod walker;

pub use error::{Error, Result};
pub use hash::{fnv1a64, splitmix64};
