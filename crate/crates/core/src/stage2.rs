//! Candidate selection and distant-supervision pair construction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::facts::{Fact, FactError, FactKey, LabelFallback};
use crate::lang::Language;
use crate::hashing::{fnv1a64, splitmix64};
use crate::providers::{
    cosine, AlignmentClassifierProvider, EmbeddingProvider, EntailmentProvider, NliLabel,
    ProviderError,
};
use crate::stage1::CandidateSet;

/// Separator between the sentence and the fact in a formatted pair.
pub const PAIR_SEPARATOR: &str = "\u{27E8}SEP\u{27E9}";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Entailment,
    Classifier,
    Overlap,
    Gold,
}

/// A sentence with the subset of its candidate facts judged to be expressed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedInstance {
    pub sentence: Sentence,
    pub facts: Vec<Fact>,
    pub method: SelectionMethod,
    pub section: String,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Stage2Error {
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error("selection provider failed: {0}")]
    Provider(#[from] ProviderError),
    #[error("invalid stage-2 configuration: {0}")]
    Config(String),
}

/// `sentence⟨SEP⟩subject | predicate | object`, with the fact in English and
/// without qualifiers.
pub fn format_pair(sentence: &Sentence, fact: &Fact) -> Result<String, FactError> {
    let mut out = String::with_capacity(sentence.text.len() + 64);
    out.push_str(&sentence.text);
    out.push_str(PAIR_SEPARATOR);
    out.push_str(&fact.verbalize_en()?);
    Ok(out)
}

fn instance(cs: &CandidateSet, facts: Vec<Fact>, method: SelectionMethod) -> Option<AlignedInstance> {
    if facts.is_empty() {
        return None;
    }
    Some(AlignedInstance {
        section: cs.sentence.section.clone(),
        sentence: cs.sentence.clone(),
        facts,
        method,
    })
}

/// Keeps the candidates for which the provider labels the sentence (premise)
/// as entailing the verbalized fact (hypothesis).
pub fn select_by_entailment(
    cs: &CandidateSet,
    nli: &dyn EntailmentProvider,
) -> Result<Option<AlignedInstance>, Stage2Error> {
    let mut kept = Vec::new();
    for c in &cs.candidates {
        let hypothesis = c.fact.verbalize_en()?;
        let verdict = nli.classify(&cs.sentence.text, &hypothesis)?;
        if verdict.label == NliLabel::Entailment {
            kept.push(c.fact.clone());
        }
    }
    Ok(instance(cs, kept, SelectionMethod::Entailment))
}

/// Keeps the candidates whose `tfidf_sentence_to_en` component reaches
/// `threshold` (inclusive).
pub fn baseline_overlap_select(cs: &CandidateSet, threshold: f64) -> Option<AlignedInstance> {
    let kept = cs
        .candidates
        .iter()
        .filter(|c| c.components.tfidf_sentence_to_en >= threshold)
        .map(|c| c.fact.clone())
        .collect();
    instance(cs, kept, SelectionMethod::Overlap)
}

pub const DEFAULT_CLASSIFIER_CUTOFF: f64 = 0.5;

/// Keeps the candidates whose formatted pair scores at least `cutoff`.
pub fn select_by_classifier(
    cs: &CandidateSet,
    clf: &dyn AlignmentClassifierProvider,
    cutoff: f64,
) -> Result<Option<AlignedInstance>, Stage2Error> {
    if !(0.0..=1.0).contains(&cutoff) {
        return Err(Stage2Error::Config(alloc::format!(
            "classifier cutoff must lie in [0, 1], got {cutoff}"
        )));
    }
    let mut kept = Vec::new();
    for c in &cs.candidates {
        let p = clf.score(&format_pair(&cs.sentence, &c.fact)?)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ProviderError::Response(alloc::format!(
                "classifier probability {p} outside [0, 1]"
            ))
            .into());
        }
        if p >= cutoff {
            kept.push(c.fact.clone());
        }
    }
    Ok(instance(cs, kept, SelectionMethod::Classifier))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairExample {
    pub pair_text: String,
    pub label: PairLabel,
    pub source_page: String,
    pub sentence_ordinal: u32,
}

/// A sentence together with the facts aligned to it (it mentions both the
/// subject and the object).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistantSentence {
    pub sentence: Sentence,
    pub facts: Vec<Fact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistantPage {
    pub page_id: String,
    pub sentences: Vec<DistantSentence>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistantConfig {
    pub seed: u64,
    /// Most similar sentences never used as negative donors.
    pub skip_top: usize,
    /// Number of ranked sentences after the skipped ones to sample from.
    pub pool_size: usize,
    pub train_fraction: f64,
}

impl DistantConfig {
    pub fn with_seed(seed: u64) -> Self {
        DistantConfig {
            seed,
            skip_top: 2,
            pool_size: 10,
            train_fraction: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistantCounts {
    pub positives: usize,
    pub negatives: usize,
    /// Positives for which no eligible donor sentence existed.
    pub missing_negatives: usize,
    pub train: usize,
    pub validation: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistantDataset {
    pub train: Vec<PairExample>,
    pub validation: Vec<PairExample>,
    pub seed: u64,
    pub counts: DistantCounts,
}

/// Examples produced from one page, in generation order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PageExamples {
    pub examples: Vec<PairExample>,
    pub positives: usize,
    pub negatives: usize,
    pub missing_negatives: usize,
}

/// Seed of the per-page generator, so pages can be processed independently.
pub fn page_seed(seed: u64, page_id: &str) -> u64 {
    let mut s = seed ^ fnv1a64(page_id.as_bytes());
    splitmix64(&mut s)
}

/// Indices of the other sentences ordered by decreasing similarity to
/// `anchor`; ties go to the lower index.
pub fn rank_by_similarity(anchor: usize, embeddings: &[Vec<f64>]) -> Vec<usize> {
    let mut others: Vec<(usize, f64)> = (0..embeddings.len())
        .filter(|&j| j != anchor)
        .map(|j| (j, cosine(&embeddings[anchor], &embeddings[j])))
        .collect();
    others.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    others.into_iter().map(|(j, _)| j).collect()
}

/// The donor window: skip the `skip_top` most similar sentences and take the
/// next `pool_size`.
pub fn donor_window(ranked: &[usize], skip_top: usize, pool_size: usize) -> &[usize] {
    let start = skip_top.min(ranked.len());
    let end = (start + pool_size).min(ranked.len());
    &ranked[start..end]
}

fn sorted_page(page: &DistantPage) -> Vec<DistantSentence> {
    let mut sentences = page.sentences.clone();
    sentences.sort_by_key(|s| s.sentence.ordinal);
    for s in &mut sentences {
        let mut seen = BTreeSet::new();
        s.facts.retain(|f| seen.insert(f.key()));
    }
    sentences
}

/// Positive and negative examples of one page.
///
/// Sentences are visited by ordinal and facts in order. Each positive is
/// followed by its negative: a donor sentence is drawn uniformly from the
/// donor window restricted to sentences owning at least one fact not aligned
/// to the anchor, then one such fact is drawn uniformly. Both draws come from
/// a generator seeded by [`page_seed`].
pub fn page_examples(
    page: &DistantPage,
    embedder: &dyn EmbeddingProvider,
    cfg: &DistantConfig,
) -> Result<PageExamples, Stage2Error> {
    let sentences = sorted_page(page);
    let embeddings = sentences
        .iter()
        .map(|s| embedder.embed(&s.sentence.text, s.sentence.language))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(page_seed(cfg.seed, &page.page_id));
    let mut out = PageExamples::default();
    for (i, anchor) in sentences.iter().enumerate() {
        if anchor.facts.is_empty() {
            continue;
        }
        let own: BTreeSet<FactKey> = anchor.facts.iter().map(Fact::key).collect();
        let foreign = |j: usize| -> Vec<&Fact> {
            sentences[j]
                .facts
                .iter()
                .filter(|f| !own.contains(&f.key()))
                .collect()
        };
        let ranked = rank_by_similarity(i, &embeddings);
        let eligible: Vec<usize> = donor_window(&ranked, cfg.skip_top, cfg.pool_size)
            .iter()
            .copied()
            .filter(|&j| !foreign(j).is_empty())
            .collect();
        for fact in &anchor.facts {
            out.examples.push(PairExample {
                pair_text: format_pair(&anchor.sentence, fact)?,
                label: PairLabel::Positive,
                source_page: page.page_id.clone(),
                sentence_ordinal: anchor.sentence.ordinal,
            });
            out.positives += 1;
            if eligible.is_empty() {
                out.missing_negatives += 1;
                continue;
            }
            let donor = eligible[rng.random_range(0..eligible.len())];
            let candidates = foreign(donor);
            let negative = candidates[rng.random_range(0..candidates.len())];
            out.examples.push(PairExample {
                pair_text: format_pair(&anchor.sentence, negative)?,
                label: PairLabel::Negative,
                source_page: page.page_id.clone(),
                sentence_ordinal: anchor.sentence.ordinal,
            });
            out.negatives += 1;
        }
    }
    Ok(out)
}

/// Number of training examples out of `n` for the given fraction.
pub fn train_size(n: usize, train_fraction: f64) -> usize {
    (libm::round(n as f64 * train_fraction) as usize).min(n)
}

/// Merges per-page results in page-id order, shuffles with the dataset seed
/// and splits into train and validation.
pub fn assemble_distant_dataset(
    mut pages: Vec<(String, PageExamples)>,
    cfg: &DistantConfig,
) -> DistantDataset {
    pages.sort_by(|a, b| a.0.cmp(&b.0));
    let mut counts = DistantCounts::default();
    let mut all = Vec::new();
    for (_, p) in pages {
        counts.positives += p.positives;
        counts.negatives += p.negatives;
        counts.missing_negatives += p.missing_negatives;
        all.extend(p.examples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    all.shuffle(&mut rng);
    let validation = all.split_off(train_size(all.len(), cfg.train_fraction));
    counts.train = all.len();
    counts.validation = validation.len();
    DistantDataset {
        train: all,
        validation,
        seed: cfg.seed,
        counts,
    }
}

fn mentions(haystack: &str, needle: &str) -> bool {
    !needle.trim().is_empty() && haystack.to_lowercase().contains(&needle.to_lowercase())
}

/// Groups sentences into pages and aligns to each sentence every fact of its
/// entity whose subject and object surfaces both occur in the text. Labels
/// in the sentence language are tried first, then English. Pages come out
/// sorted by id.
pub fn mention_alignment(sentences: &[Sentence], facts: &[Fact]) -> Vec<DistantPage> {
    let mut by_subject: BTreeMap<&str, Vec<&Fact>> = BTreeMap::new();
    for f in facts {
        by_subject.entry(f.subject.qid.as_str()).or_default().push(f);
    }
    let surfaces = |f: &Fact, lang| -> Vec<(String, String)> {
        let mut out = Vec::new();
        for fallback in [LabelFallback::Disabled, LabelFallback::English] {
            let subj = f
                .subject
                .label(lang)
                .or_else(|| match fallback {
                    LabelFallback::English => f.subject.label(Language::En),
                    LabelFallback::Disabled => None,
                })
                .map(String::from);
            if let (Some(s), Ok(o)) = (subj, f.object.surface(lang, fallback)) {
                out.push((s, o));
            }
        }
        out
    };
    let mut pages: BTreeMap<&str, Vec<DistantSentence>> = BTreeMap::new();
    for s in sentences {
        let facts = by_subject
            .get(s.entity_id.as_str())
            .map(|fs| {
                fs.iter()
                    .filter(|f| {
                        surfaces(f, s.language)
                            .iter()
                            .any(|(subj, obj)| mentions(&s.text, subj) && mentions(&s.text, obj))
                    })
                    .map(|f| (*f).clone())
                    .collect()
            })
            .unwrap_or_default();
        pages.entry(s.page_id.as_str()).or_default().push(DistantSentence {
            sentence: s.clone(),
            facts,
        });
    }
    pages
        .into_iter()
        .map(|(id, mut sentences)| {
            sentences.sort_by_key(|s| s.sentence.ordinal);
            DistantPage {
                page_id: id.into(),
                sentences,
            }
        })
        .collect()
}

/// Builds the full distant-supervision dataset sequentially.
pub fn build_distant_dataset(
    pages: &[DistantPage],
    embedder: &dyn EmbeddingProvider,
    cfg: &DistantConfig,
) -> Result<DistantDataset, Stage2Error> {
    if !(0.0..=1.0).contains(&cfg.train_fraction) {
        return Err(Stage2Error::Config("train fraction must lie in [0, 1]".into()));
    }
    let per_page = pages
        .iter()
        .map(|p| Ok((p.page_id.clone(), page_examples(p, embedder, cfg)?)))
        .collect::<Result<Vec<_>, Stage2Error>>()?;
    Ok(assemble_distant_dataset(per_page, cfg))
}
