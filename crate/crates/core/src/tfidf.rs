//! TF-IDF statistics and cosine similarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::is_word_char;

/// Tokenizer settings shared by index construction and scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analyzer {
    pub lowercase: bool,
    /// Treat punctuation as a separator instead of part of a term.
    pub strip_punctuation: bool,
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

impl Analyzer {
    pub fn terms(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for raw in text.split_whitespace() {
            if self.strip_punctuation {
                let mut cur = String::new();
                for c in raw.chars() {
                    if is_word_char(c) {
                        cur.push(c);
                    } else if !cur.is_empty() {
                        out.push(core::mem::take(&mut cur));
                    }
                }
                if !cur.is_empty() {
                    out.push(cur);
                }
            } else {
                out.push(raw.into());
            }
        }
        if self.lowercase {
            for t in &mut out {
                *t = t.to_lowercase();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TfidfError {
    #[error("cannot build a TF-IDF index from an empty corpus")]
    EmptyCorpus,
}

/// Smoothed inverse document frequencies over a document collection:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfidfIndex {
    analyzer: Analyzer,
    vocabulary: BTreeMap<String, usize>,
    df: Vec<u32>,
    idf: Vec<f64>,
    doc_count: usize,
}

impl TfidfIndex {
    pub fn build<S: AsRef<str>>(documents: &[S], analyzer: Analyzer) -> Result<Self, TfidfError> {
        if documents.is_empty() {
            return Err(TfidfError::EmptyCorpus);
        }
        let mut df_map: BTreeMap<String, u32> = BTreeMap::new();
        for doc in documents {
            let mut terms = analyzer.terms(doc.as_ref());
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df_map.entry(t).or_default() += 1;
            }
        }
        let n = documents.len();
        let mut vocabulary = BTreeMap::new();
        let mut df = Vec::with_capacity(df_map.len());
        let mut idf = Vec::with_capacity(df_map.len());
        for (i, (term, count)) in df_map.into_iter().enumerate() {
            vocabulary.insert(term, i);
            idf.push(smoothed_idf(n, count as usize));
            df.push(count);
        }
        Ok(TfidfIndex {
            analyzer,
            vocabulary,
            df,
            idf,
            doc_count: n,
        })
    }

    pub fn analyzer(&self) -> Analyzer {
        self.analyzer
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    /// Document frequency; 0 for unseen terms.
    pub fn df(&self, term: &str) -> usize {
        self.vocabulary.get(term).map_or(0, |&i| self.df[i] as usize)
    }

    /// IDF of a term; unseen terms get the IDF of a zero-frequency term.
    pub fn idf(&self, term: &str) -> f64 {
        match self.vocabulary.get(term) {
            Some(&i) => self.idf[i],
            None => smoothed_idf(self.doc_count, 0),
        }
    }

    /// TF-IDF weights of `text`, keyed by term.
    pub fn vectorize(&self, text: &str) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in self.analyzer.terms(text) {
            *tf.entry(t).or_default() += 1.0;
        }
        for (t, w) in tf.iter_mut() {
            *w *= self.idf(t);
        }
        tf
    }

    /// Cosine between the TF-IDF vectors of `a` and `b`, in [0, 1].
    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        sparse_cosine(&self.vectorize(a), &self.vectorize(b))
    }
}

fn smoothed_idf(n: usize, df: usize) -> f64 {
    libm::log((1.0 + n as f64) / (1.0 + df as f64)) + 1.0
}

/// Cosine of two sparse non-negative vectors, clamped to [0, 1].
pub fn sparse_cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, x)| large.get(t).map(|y| x * y))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let na: f64 = a.values().map(|x| x * x).sum();
    let nb: f64 = b.values().map(|x| x * x).sum();
    (dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(0.0, 1.0)
}
