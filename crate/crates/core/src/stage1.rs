//! Candidate generation.
//!
//! Every (fact, sentence) pair of a bundle is scored by a weighted mean of
//! four similarities:
//!
//! 1. embedding cosine of the English fact and the native sentence,
//! 2. TF-IDF cosine of the localized fact and the native sentence,
//! 3. TF-IDF cosine of the English fact and the sentence translated to English,
//! 4. embedding cosine of the localized fact and the translated sentence.
//!
//! Embedding cosines are mapped from [-1, 1] to [0, 1] by `(c + 1) / 2`.
//! A sentence survives only if its best fact scores strictly above `tau`;
//! survivors keep their `k` best facts.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{EntityBundle, Sentence};
use crate::facts::{localize_fact_text, Fact, FactError, FactKey};
use crate::lang::Language;
use crate::providers::{cosine, EmbeddingProvider, ProviderError, TranslationProvider};
use crate::tfidf::{Analyzer, TfidfError, TfidfIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Stage1Config {
    pub tau: f64,
    pub k: usize,
    /// Weights of the four components in [`Components`] order.
    pub weights: [f64; 4],
}

impl Default for Stage1Config {
    fn default() -> Self {
        Stage1Config {
            tau: 0.65,
            k: 10,
            weights: [0.25; 4],
        }
    }
}

impl Stage1Config {
    pub fn validate(&self) -> Result<(), Stage1Error> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Stage1Error::Config(alloc::format!(
                "tau must lie in [0, 1], got {}",
                self.tau
            )));
        }
        if self.k == 0 {
            return Err(Stage1Error::Config("k must be positive".into()));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Stage1Error::Config("weights must be non-negative".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Stage1Error::Config(alloc::format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Stage1Error {
    #[error("invalid stage-1 configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error("{component} failed: {source}")]
    Provider {
        component: &'static str,
        source: ProviderError,
    },
    #[error(transparent)]
    Index(#[from] TfidfError),
}

/// The four similarity signals of one pair, each in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub semantic_native: f64,
    pub tfidf_fact_to_lr: f64,
    pub tfidf_sentence_to_en: f64,
    pub semantic_translated: f64,
}

impl Components {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.semantic_native,
            self.tfidf_fact_to_lr,
            self.tfidf_sentence_to_en,
            self.semantic_translated,
        ]
    }

    /// Weighted mean under `weights`.
    pub fn combine(&self, weights: &[f64; 4]) -> f64 {
        let total: f64 = weights.iter().sum();
        let dot: f64 = self
            .as_array()
            .iter()
            .zip(weights)
            .map(|(c, w)| c * w)
            .sum();
        (dot / total).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub fact_ref: FactKey,
    pub fact: Fact,
    pub score: f64,
    pub components: Components,
}

/// A surviving sentence with its best-scoring facts, best first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub sentence: Sentence,
    pub candidates: Vec<ScoredCandidate>,
}

/// Orders candidates by score descending, then pid, then canonical object.
pub fn candidate_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.fact_ref.cmp(&b.fact_ref))
}

/// Maps an embedding cosine from [-1, 1] onto [0, 1].
pub fn rescale_cosine(c: f64) -> f64 {
    ((c + 1.0) / 2.0).clamp(0.0, 1.0)
}

/// The TF-IDF statistics for one language: a native-language index and an
/// English one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage1Indexes {
    pub lr: TfidfIndex,
    pub en: TfidfIndex,
}

#[derive(Clone, Copy)]
pub struct Stage1Providers<'a> {
    pub embedder: &'a dyn EmbeddingProvider,
    pub translator: &'a dyn TranslationProvider,
}

/// Texts and embeddings of one fact, computed once per bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct FactView {
    pub fact: Fact,
    pub key: FactKey,
    pub text_en: String,
    pub text_lr: String,
    emb_en: Vec<f64>,
    emb_lr: Vec<f64>,
}

/// Texts and embeddings of one sentence, computed once per bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceView {
    pub sentence: Sentence,
    pub text_en: String,
    emb_lr: Vec<f64>,
    emb_en: Vec<f64>,
}

fn provider<T>(component: &'static str, r: Result<T, ProviderError>) -> Result<T, Stage1Error> {
    r.map_err(|source| Stage1Error::Provider { component, source })
}

impl FactView {
    pub fn new(fact: &Fact, lang: Language, p: Stage1Providers<'_>) -> Result<Self, Stage1Error> {
        let text_en = fact.verbalize_en()?;
        let text_lr = localize_fact_text(fact, lang, p.translator)?;
        let emb_en = provider("fact embedding", p.embedder.embed(&text_en, Language::En))?;
        let emb_lr = provider("localized fact embedding", p.embedder.embed(&text_lr, lang))?;
        Ok(FactView {
            key: fact.key(),
            fact: fact.clone(),
            text_en,
            text_lr,
            emb_en,
            emb_lr,
        })
    }
}

impl SentenceView {
    pub fn new(sentence: &Sentence, p: Stage1Providers<'_>) -> Result<Self, Stage1Error> {
        let lang = sentence.language;
        let text_en = provider(
            "sentence translation",
            p.translator.translate(&sentence.text, lang, Language::En),
        )?;
        let emb_lr = provider("sentence embedding", p.embedder.embed(&sentence.text, lang))?;
        let emb_en = provider(
            "translated sentence embedding",
            p.embedder.embed(&text_en, Language::En),
        )?;
        Ok(SentenceView {
            sentence: sentence.clone(),
            text_en,
            emb_lr,
            emb_en,
        })
    }
}

/// A bundle with every provider call already made.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedBundle {
    pub language: Language,
    pub facts: Vec<FactView>,
    pub sentences: Vec<SentenceView>,
}

pub fn prepare_bundle(
    bundle: &EntityBundle,
    p: Stage1Providers<'_>,
) -> Result<PreparedBundle, Stage1Error> {
    let facts = bundle
        .facts
        .iter()
        .map(|f| FactView::new(f, bundle.language, p))
        .collect::<Result<_, _>>()?;
    let sentences = bundle
        .sentences
        .iter()
        .map(|s| SentenceView::new(s, p))
        .collect::<Result<_, _>>()?;
    Ok(PreparedBundle {
        language: bundle.language,
        facts,
        sentences,
    })
}

/// Builds the native and English indexes from the sentences and fact
/// renderings of the given bundles.
pub fn build_indexes(
    bundles: &[PreparedBundle],
    analyzer: Analyzer,
) -> Result<Stage1Indexes, Stage1Error> {
    let mut lr_docs: Vec<&str> = Vec::new();
    let mut en_docs: Vec<&str> = Vec::new();
    for b in bundles {
        for s in &b.sentences {
            lr_docs.push(&s.sentence.text);
            en_docs.push(&s.text_en);
        }
        for f in &b.facts {
            lr_docs.push(&f.text_lr);
            en_docs.push(&f.text_en);
        }
    }
    Ok(Stage1Indexes {
        lr: TfidfIndex::build(&lr_docs, analyzer)?,
        en: TfidfIndex::build(&en_docs, analyzer)?,
    })
}

/// Components of one prepared pair.
pub fn pair_components(f: &FactView, s: &SentenceView, idx: &Stage1Indexes) -> Components {
    Components {
        semantic_native: rescale_cosine(cosine(&f.emb_en, &s.emb_lr)),
        tfidf_fact_to_lr: idx.lr.cosine(&f.text_lr, &s.sentence.text),
        tfidf_sentence_to_en: idx.en.cosine(&f.text_en, &s.text_en),
        semantic_translated: rescale_cosine(cosine(&f.emb_lr, &s.emb_en)),
    }
}

fn scored(f: &FactView, s: &SentenceView, idx: &Stage1Indexes, cfg: &Stage1Config) -> ScoredCandidate {
    let components = pair_components(f, s, idx);
    ScoredCandidate {
        fact_ref: f.key.clone(),
        fact: f.fact.clone(),
        score: components.combine(&cfg.weights),
        components,
    }
}

/// Scores a single pair from scratch.
pub fn fact_sentence_similarity(
    fact: &Fact,
    sentence: &Sentence,
    idx: &Stage1Indexes,
    p: Stage1Providers<'_>,
    cfg: &Stage1Config,
) -> Result<ScoredCandidate, Stage1Error> {
    cfg.validate()?;
    let f = FactView::new(fact, sentence.language, p)?;
    let s = SentenceView::new(sentence, p)?;
    Ok(scored(&f, &s, idx, cfg))
}

/// Applies the gate and top-k cut to every sentence of a prepared bundle.
pub fn select_candidates(
    bundle: &PreparedBundle,
    idx: &Stage1Indexes,
    cfg: &Stage1Config,
) -> Result<Vec<CandidateSet>, Stage1Error> {
    cfg.validate()?;
    let mut out = Vec::new();
    for s in &bundle.sentences {
        let mut cands: Vec<ScoredCandidate> =
            bundle.facts.iter().map(|f| scored(f, s, idx, cfg)).collect();
        cands.sort_by(candidate_order);
        match cands.first() {
            Some(best) if best.score > cfg.tau => {
                cands.truncate(cfg.k);
                out.push(CandidateSet {
                    sentence: s.sentence.clone(),
                    candidates: cands,
                });
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Prepares and scores one bundle against precomputed indexes.
pub fn generate_candidates(
    bundle: &EntityBundle,
    cfg: &Stage1Config,
    idx: &Stage1Indexes,
    p: Stage1Providers<'_>,
) -> Result<Vec<CandidateSet>, Stage1Error> {
    cfg.validate()?;
    let prepared = prepare_bundle(bundle, p)?;
    select_candidates(&prepared, idx, cfg)
}
