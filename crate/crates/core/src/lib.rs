//! Knowledge graph embedding with semantic hyperplane projection.
//!
//! Triples are embedded by translation (`h + r ≈ t`). The projected model
//! scores a triple by its loss vector `e = h + r − t` after discounting the
//! part of `e` lying inside the hyperplane whose normal is composed from the
//! two entities' topic vectors. Topic vectors come from a nonnegative
//! factorization of entity description word counts, either pre-trained and
//! frozen (Standard) or trained jointly with the embeddings (Joint).
//!
//! Module map:
//! - [`kg_store`]: triple and description ingestion, filter index, relation statistics
//! - [`topic_semantics`]: the topic model, composition, and fold-in
//! - [`scoring`]: loss vectors, projection, score functions and gradients
//! - [`trainer`]: negative sampling and the SGD loop
//! - [`evalsuite`]: ranking, classification, and model comparison analyses

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod evalsuite;
pub mod kg_store;
pub mod linalg;
pub mod scoring;
pub mod synthetic;
pub mod topic_semantics;
pub mod trainer;

pub use checkpoint::Checkpoint;
pub use config::TrainConfig;
pub use error::{Error, Result};
pub use evalsuite::{EvalReport, RankResult, Target, TieBreak};
pub use kg_store::{DescriptionCorpus, Split, TokenizerOptions, Triple, TripleStore, Vocab};
pub use linalg::Matrix;
pub use scoring::{EmbeddingTable, ModelKind, ScoreParams, Scorer, TrainMode};
pub use topic_semantics::SemanticModel;
pub use trainer::{TrainOutcome, TrainState};
