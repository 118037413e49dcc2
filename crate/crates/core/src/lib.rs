//! Multi-label indexing of documents with descriptors from a controlled
//! vocabulary.
//!
//! Training learns, for every descriptor with enough manually indexed
//! texts, a weighted list of associate lemmas that are statistically
//! characteristic of it. Assignment ranks descriptors for a new text by a
//! blend of cosine, Okapi and dot-product similarity between the text's
//! lemma frequencies and each associate list.
//!
//! Batch loops (per-document preprocessing, per-descriptor training,
//! per-document evaluation) run on rayon when the default `parallel`
//! feature is on and sequentially otherwise; results are identical either
//! way.

pub mod assigner;
pub mod baseline;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluator;
mod parallel;
pub mod persist;
pub mod preprocess;
pub mod stats;
pub mod synthetic;
pub mod thesaurus;
pub mod trainer;

pub use assigner::{assign, AssignConfig, AssignmentResult, RankedDescriptor};
pub use baseline::{extract_descriptors, ExtractionOptions, LabelMatcher};
pub use corpus::{corpus_stats, split_stratified, Corpus, CorpusStats, Document};
pub use error::{Error, Result};
pub use evaluator::{evaluate, pr_at_rank, EvalReport, Prf};
pub use parallel::is_parallel;
pub use persist::{load_model, save_model};
pub use preprocess::{preprocess, LemmaVector, PreprocessConfig};
pub use stats::{g2, g2_threshold, ContingencyCounts};
pub use thesaurus::{Descriptor, DescriptorId, Thesaurus};
pub use trainer::{train, train_with_summary, AssociateList, Model, TrainingConfig, TrainingParams};
