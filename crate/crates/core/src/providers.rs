//! Interfaces to the external models the pipeline consults, plus deterministic
//! stand-ins that let every stage run offline.
//!
//! All traits require `Send + Sync`; callers may share one provider across
//! worker threads and treat every call as idempotent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hashing::{fnv1a64, splitmix64, unit_interval};
use crate::lang::{Language, Script};
use crate::text::{is_word_char, terms};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("provider request failed: {0}")]
    Request(String),
    #[error("malformed provider response: {0}")]
    Response(String),
}

/// Produces unit-norm sentence embeddings.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str, language: Language) -> Result<Vec<f64>, ProviderError>;
}

/// Machine translation between supported languages.
pub trait TranslationProvider: Send + Sync {
    fn translate(&self, text: &str, source: Language, target: Language)
        -> Result<String, ProviderError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliLabel {
    Entailment,
    Contradiction,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NliVerdict {
    pub label: NliLabel,
    /// Diagnostic only; selection uses `label` alone.
    pub confidence: f64,
}

/// Three-way natural language inference.
pub trait EntailmentProvider: Send + Sync {
    fn classify(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict, ProviderError>;
}

/// Probability that the fact in a formatted pair is expressed by its sentence.
pub trait AlignmentClassifierProvider: Send + Sync {
    fn score(&self, pair_text: &str) -> Result<f64, ProviderError>;
}

/// Decides whether text contains at least one noun, proper noun or verb.
pub trait ContentTagger: Send + Sync {
    fn has_content_word(&self, text: &str, language: Language) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub language: Language,
    pub confidence: f64,
}

pub trait LanguageDetector: Send + Sync {
    fn detect(&self, text: &str) -> Detection;
}

impl<T: EmbeddingProvider + ?Sized> EmbeddingProvider for &T {
    fn embed(&self, text: &str, language: Language) -> Result<Vec<f64>, ProviderError> {
        (**self).embed(text, language)
    }
}

impl<T: TranslationProvider + ?Sized> TranslationProvider for &T {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, ProviderError> {
        (**self).translate(text, source, target)
    }
}

/// Cosine similarity clamped to [-1, 1]; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(-1.0, 1.0)
}

pub const MIN_EMBEDDING_DIM: usize = 8;

/// Deterministic bag-of-tokens embedding.
///
/// Every term gets a pseudo-random vector seeded by the FNV-1a hash of its
/// bytes; the text vector is the mean over its terms, L2-normalized. Texts
/// sharing terms therefore have correlated vectors. Text without terms maps
/// to the reserved vector with all components equal to `1/sqrt(dim)`.
pub fn mock_embed(text: &str, dim: usize) -> Result<Vec<f64>, ProviderError> {
    if dim < MIN_EMBEDDING_DIM {
        return Err(ProviderError::Config(alloc::format!(
            "embedding dimension {dim} is below the minimum of {MIN_EMBEDDING_DIM}"
        )));
    }
    let mut acc = vec![0.0f64; dim];
    let toks = terms(text);
    for tok in &toks {
        let mut state = fnv1a64(tok.as_bytes());
        for slot in acc.iter_mut() {
            *slot += unit_interval(splitmix64(&mut state));
        }
    }
    let norm = libm::sqrt(acc.iter().map(|x| x * x).sum::<f64>());
    if toks.is_empty() || norm == 0.0 {
        let v = 1.0 / libm::sqrt(dim as f64);
        return Ok(vec![v; dim]);
    }
    acc.iter_mut().for_each(|x| *x /= norm);
    Ok(acc)
}

/// [`EmbeddingProvider`] backed by [`mock_embed`]; ignores the language.
#[derive(Clone, Copy, Debug)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Result<Self, ProviderError> {
        mock_embed("", dim)?;
        Ok(HashEmbedder { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, text: &str, _language: Language) -> Result<Vec<f64>, ProviderError> {
        mock_embed(text, self.dim)
    }
}

/// Translator that returns its input unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityTranslator;

impl TranslationProvider for IdentityTranslator {
    fn translate(&self, text: &str, _: Language, _: Language) -> Result<String, ProviderError> {
        Ok(text.into())
    }
}

/// Coarse part-of-speech tags understood by [`LexiconTagger`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Other,
}

/// True iff some whitespace token of `text` is tagged NOUN or VERB by the
/// lexicon. Tokens are looked up verbatim, then with surrounding punctuation
/// removed, then lowercased; unknown tokens count as OTHER.
pub fn lexicon_content_check(text: &str, lexicon: &BTreeMap<String, PosTag>) -> bool {
    text.split_whitespace().any(|tok| {
        let bare = tok.trim_matches(|c: char| !is_word_char(c));
        let tag = lexicon
            .get(tok)
            .or_else(|| lexicon.get(bare))
            .or_else(|| lexicon.get(bare.to_lowercase().as_str()));
        matches!(tag, Some(PosTag::Noun | PosTag::Verb))
    })
}

/// Dictionary-driven [`ContentTagger`], one lexicon per language.
#[derive(Clone, Debug, Default)]
pub struct LexiconTagger {
    lexicons: BTreeMap<Language, BTreeMap<String, PosTag>>,
}

impl LexiconTagger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, language: Language, word: impl Into<String>, tag: PosTag) {
        self.lexicons
            .entry(language)
            .or_default()
            .insert(word.into(), tag);
    }

    pub fn with_lexicon(mut self, language: Language, lexicon: BTreeMap<String, PosTag>) -> Self {
        self.lexicons.entry(language).or_default().extend(lexicon);
        self
    }
}

impl ContentTagger for LexiconTagger {
    fn has_content_word(&self, text: &str, language: Language) -> bool {
        match self.lexicons.get(&language) {
            Some(lex) => lexicon_content_check(text, lex),
            None => false,
        }
    }
}

/// Unicode-script voting detector.
///
/// Confidence is the fraction of alphabetic characters written in the winning
/// script. Devanagari text is reported as Hindi; text with no letters is
/// reported as English with confidence 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScriptDetector;

impl LanguageDetector for ScriptDetector {
    fn detect(&self, text: &str) -> Detection {
        let mut counts = [0usize; Script::ALL.len()];
        let mut letters = 0usize;
        for c in text.chars() {
            let script = Script::of(c);
            if !(c.is_alphabetic() || script.is_some_and(|s| s != Script::Latin)) {
                continue;
            }
            letters += 1;
            if let Some(s) = script {
                let idx = Script::ALL.iter().position(|x| *x == s).unwrap_or(0);
                counts[idx] += 1;
            }
        }
        let (best, &n) = counts
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, n)| **n)
            .unwrap_or((0, &0));
        if letters == 0 || n == 0 {
            return Detection {
                language: Language::En,
                confidence: 0.0,
            };
        }
        Detection {
            language: Script::ALL[best].default_language(),
            confidence: n as f64 / letters as f64,
        }
    }
}

/// Entailment mock that always answers with one label.
#[derive(Clone, Copy, Debug)]
pub struct ConstantEntailment(pub NliLabel);

impl EntailmentProvider for ConstantEntailment {
    fn classify(&self, _: &str, _: &str) -> Result<NliVerdict, ProviderError> {
        Ok(NliVerdict {
            label: self.0,
            confidence: 1.0,
        })
    }
}

/// Entailment mock driven by term overlap.
///
/// The hypothesis is read as a `subject | predicate | object` verbalization;
/// it is entailed iff every term of the object slot occurs in the premise.
/// Confidence is the fraction of all hypothesis terms found in the premise.
#[derive(Clone, Copy, Debug, Default)]
pub struct LexicalEntailment;

impl EntailmentProvider for LexicalEntailment {
    fn classify(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict, ProviderError> {
        let premise_terms = terms(premise);
        let object = hypothesis.split(" | ").nth(2).unwrap_or(hypothesis);
        let object_terms = terms(object);
        let entailed = !object_terms.is_empty()
            && object_terms.iter().all(|t| premise_terms.contains(t));
        let all = terms(hypothesis);
        let found = all.iter().filter(|t| premise_terms.contains(t)).count();
        let confidence = if all.is_empty() {
            0.0
        } else {
            found as f64 / all.len() as f64
        };
        Ok(NliVerdict {
            label: if entailed {
                NliLabel::Entailment
            } else {
                NliLabel::Neutral
            },
            confidence,
        })
    }
}

/// Classifier mock returning a fixed probability.
#[derive(Clone, Copy, Debug)]
pub struct ConstantClassifier(pub f64);

impl AlignmentClassifierProvider for ConstantClassifier {
    fn score(&self, _: &str) -> Result<f64, ProviderError> {
        Ok(self.0.clamp(0.0, 1.0))
    }
}

/// Classifier mock: fraction of the fact-side terms of a formatted pair that
/// also occur on the sentence side.
#[derive(Clone, Copy, Debug, Default)]
pub struct OverlapClassifier;

impl AlignmentClassifierProvider for OverlapClassifier {
    fn score(&self, pair_text: &str) -> Result<f64, ProviderError> {
        let (sentence, fact) = pair_text
            .split_once(crate::stage2::PAIR_SEPARATOR)
            .ok_or_else(|| ProviderError::Request("pair text lacks a separator".into()))?;
        let s = terms(sentence);
        let f = terms(fact);
        if f.is_empty() {
            return Ok(0.0);
        }
        Ok(f.iter().filter(|t| s.contains(t)).count() as f64 / f.len() as f64)
    }
}
