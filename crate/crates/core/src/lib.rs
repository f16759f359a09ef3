//! Core algorithms for constructing cross-lingual fact-to-text alignment data.
//!
//! Everything in this crate is a pure function over in-memory values and only
//! needs `alloc`: sentence splitting and pruning, fact verbalization, TF-IDF and
//! embedding similarity, candidate generation and selection, distant-supervision
//! pair construction, and the evaluation metrics. File formats, HTTP adapters,
//! the annotation service and the command line live in the `factalign` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod corpus;
pub mod facts;
pub mod filter;
pub mod hashing;
pub mod lang;
pub mod metrics;
pub mod providers;
pub mod stage1;
pub mod stage2;
pub mod text;
pub mod tfidf;
pub mod wikitext;

pub use corpus::{EntityBundle, Sentence, WikiPage};
pub use facts::{Entity, Fact, FactError, FactKey, Predicate, Qualifier, Value};
pub use filter::{filter_sentences, FilterReport, LengthBounds, RejectReason};
pub use lang::Language;
pub use providers::{
    AlignmentClassifierProvider, ContentTagger, EmbeddingProvider, EntailmentProvider,
    LanguageDetector, NliLabel, NliVerdict, ProviderError, TranslationProvider,
};
pub use stage1::{CandidateSet, Components, ScoredCandidate, Stage1Config};
pub use stage2::{AlignedInstance, DistantDataset, PairExample, PairLabel, SelectionMethod};
pub use tfidf::{Analyzer, TfidfIndex};
