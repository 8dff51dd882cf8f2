//! Cross-lingual summary mining: embedding alignment, component graphs,
//! leakage-safe splits, language-pair sampling and LaSE scoring.

pub mod aligner;
pub mod corpus_io;
pub mod dataset_builder;
pub mod embedding_store;
pub mod error;
pub mod langid_baseline;
pub mod lase_metric;
pub mod pair_graph;
pub mod sampler;
pub mod synthetic;
mod union_find;

pub use aligner::{align_all, align_language_pair, AlignConfig, MatchedPair, PairKind, DEFAULT_TAU};
pub use corpus_io::{Corpus, CorpusManifest, Document, LangCode};
pub use dataset_builder::{
    assign_splits, materialize, semantic_dedup_all, CrossSample, DedupMap, Split, SplitManifest, SplitRatios,
};
pub use embedding_store::{EmbeddingStore, EmbeddingVector, NearestNeighbor, XembFile};
pub use error::{Error, Result};
pub use langid_baseline::LangIdModel;
pub use lase_metric::{evaluate_run, lase, LangIdDistribution, LaseScore};
pub use pair_graph::{build_graph, cap_components, induced_pairs, CapConfig, ComponentGraph, ComponentPair};
pub use sampler::{compute_plan, training_feed, PairCounts, SamplingPlan};
