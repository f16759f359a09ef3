//! Evaluation metrics: selection F1, Cohen's kappa, corpus BLEU and dataset
//! statistics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::facts::FactKey;
use crate::lang::Language;
use crate::stage2::AlignedInstance;
use crate::text::is_word_char;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("empty input")]
    Empty,
    #[error("instance in {found} passed to statistics for {expected}")]
    WrongLanguage { expected: Language, found: Language },
    #[error("at least two annotators are required")]
    TooFewAnnotators,
}

/// Precision, recall and F1 with the number of gold facts behind them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    /// Scores from counts. A ratio with an empty denominator is 1 when the
    /// other error count is also zero (nothing to find, nothing wrongly
    /// found) and 0 otherwise.
    pub fn prf(&self) -> Prf {
        let precision = if self.tp + self.fp == 0 {
            if self.fn_ == 0 { 1.0 } else { 0.0 }
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let recall = if self.tp + self.fn_ == 0 {
            if self.fp == 0 { 1.0 } else { 0.0 }
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
            support: self.tp + self.fn_,
        }
    }

    fn add(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub per_language: BTreeMap<Language, Prf>,
    /// Pooled over every instance of every language.
    pub micro: Prf,
    /// Unweighted mean over languages.
    pub macro_avg: Prf,
}

/// Fact-level selection scores, micro-averaged within each language.
pub fn selection_f1(
    predicted: &[BTreeSet<FactKey>],
    gold: &[BTreeSet<FactKey>],
    languages: &[Language],
) -> Result<F1Report, MetricError> {
    if predicted.len() != gold.len() || gold.len() != languages.len() {
        return Err(MetricError::LengthMismatch(alloc::format!(
            "{} predictions, {} gold sets, {} language tags",
            predicted.len(),
            gold.len(),
            languages.len()
        )));
    }
    let mut per: BTreeMap<Language, Confusion> = BTreeMap::new();
    for ((p, g), lang) in predicted.iter().zip(gold).zip(languages) {
        let tp = p.intersection(g).count();
        per.entry(*lang).or_default().add(Confusion {
            tp,
            fp: p.len() - tp,
            fn_: g.len() - tp,
        });
    }
    let mut all = Confusion::default();
    for c in per.values() {
        all.add(*c);
    }
    let per_language: BTreeMap<Language, Prf> = per.iter().map(|(l, c)| (*l, c.prf())).collect();
    let n = per_language.len().max(1) as f64;
    let macro_avg = Prf {
        precision: per_language.values().map(|p| p.precision).sum::<f64>() / n,
        recall: per_language.values().map(|p| p.recall).sum::<f64>() / n,
        f1: per_language.values().map(|p| p.f1).sum::<f64>() / n,
        support: all.tp + all.fn_,
    };
    Ok(F1Report {
        per_language,
        micro: all.prf(),
        macro_avg,
    })
}

/// Cohen's kappa for two binary raters: `(po - pe) / (1 - pe)` with chance
/// agreement from the product of marginals. When `pe = 1` both raters used a
/// single identical label throughout, so the result is 1.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(alloc::format!(
            "{} vs {} marks",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(MetricError::Empty);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let a1 = a.iter().filter(|x| **x).count() as f64 / n;
    let b1 = b.iter().filter(|x| **x).count() as f64 / n;
    let po = agree / n;
    let pe = a1 * b1 + (1.0 - a1) * (1.0 - b1);
    if pe >= 1.0 {
        return Ok(1.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Keyed by `(a, b)` with `a < b`.
    pub pairwise_kappa: BTreeMap<(String, String), f64>,
    pub average_kappa: f64,
    pub item_count: usize,
}

/// Mean Cohen's kappa over all unordered annotator pairs. Every annotator's
/// marks must cover the same items in the same order.
pub fn average_pairwise_kappa(
    marks: &BTreeMap<String, Vec<bool>>,
) -> Result<AgreementReport, MetricError> {
    if marks.len() < 2 {
        return Err(MetricError::TooFewAnnotators);
    }
    let entries: Vec<(&String, &Vec<bool>)> = marks.iter().collect();
    let mut pairwise = BTreeMap::new();
    for (i, (a, ma)) in entries.iter().enumerate() {
        for (b, mb) in &entries[i + 1..] {
            pairwise.insert(((*a).clone(), (*b).clone()), cohen_kappa(ma, mb)?);
        }
    }
    let average = pairwise.values().sum::<f64>() / pairwise.len() as f64;
    Ok(AgreementReport {
        pairwise_kappa: pairwise,
        average_kappa: average,
        item_count: entries[0].1.len(),
    })
}

/// Tokenization used for BLEU; reported next to every score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuTokenizer {
    pub lowercase: bool,
    /// Emit every punctuation character as its own token.
    pub split_punctuation: bool,
}

impl Default for BleuTokenizer {
    fn default() -> Self {
        BleuTokenizer {
            lowercase: false,
            split_punctuation: true,
        }
    }
}

impl BleuTokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let text = if self.lowercase {
            text.to_lowercase()
        } else {
            text.into()
        };
        let mut out = Vec::new();
        for raw in text.split_whitespace() {
            if !self.split_punctuation {
                out.push(raw.into());
                continue;
            }
            let mut cur = String::new();
            for c in raw.chars() {
                if is_word_char(c) {
                    cur.push(c);
                } else {
                    if !cur.is_empty() {
                        out.push(core::mem::take(&mut cur));
                    }
                    out.push(c.into());
                }
            }
            if !cur.is_empty() {
                out.push(cur);
            }
        }
        out
    }
}

pub const BLEU_MAX_ORDER: usize = 4;
const BLEU_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// In [0, 1]; multiply by 100 for the conventional presentation.
    pub bleu: f64,
    pub precisions: [f64; BLEU_MAX_ORDER],
    pub matches: [usize; BLEU_MAX_ORDER],
    pub totals: [usize; BLEU_MAX_ORDER],
    pub brevity_penalty: f64,
    pub hypothesis_length: usize,
    pub reference_length: usize,
    pub tokenizer: BleuTokenizer,
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut m = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_default() += 1;
        }
    }
    m
}

/// Corpus-level BLEU-4 with a single reference per hypothesis.
///
/// Clipped n-gram matches and hypothesis n-gram totals are pooled over the
/// corpus. A zero match count is replaced by 1e-9. Orders for which the
/// hypotheses contain no n-grams at all are left out of the geometric mean.
/// The brevity penalty is `exp(1 - r/c)` when `c <= r`.
pub fn corpus_bleu<H: AsRef<str>, R: AsRef<str>>(
    hypotheses: &[H],
    references: &[R],
    tokenizer: BleuTokenizer,
) -> Result<BleuScore, MetricError> {
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch(alloc::format!(
            "{} hypotheses vs {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if hypotheses.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut matches = [0usize; BLEU_MAX_ORDER];
    let mut totals = [0usize; BLEU_MAX_ORDER];
    let mut hyp_len = 0;
    let mut ref_len = 0;
    for (h, r) in hypotheses.iter().zip(references) {
        let ht = tokenizer.tokenize(h.as_ref());
        let rt = tokenizer.tokenize(r.as_ref());
        hyp_len += ht.len();
        ref_len += rt.len();
        for n in 1..=BLEU_MAX_ORDER {
            let hc = ngram_counts(&ht, n);
            let rc = ngram_counts(&rt, n);
            for (g, c) in &hc {
                matches[n - 1] += (*c).min(rc.get(g).copied().unwrap_or(0));
                totals[n - 1] += c;
            }
        }
    }
    let mut precisions = [0.0; BLEU_MAX_ORDER];
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..BLEU_MAX_ORDER {
        if totals[n] == 0 {
            continue;
        }
        let m = if matches[n] == 0 {
            BLEU_EPSILON
        } else {
            matches[n] as f64
        };
        precisions[n] = m / totals[n] as f64;
        log_sum += libm::log(precisions[n]);
        orders += 1;
    }
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        libm::exp(1.0 - ref_len as f64 / hyp_len as f64)
    };
    let bleu = if orders == 0 {
        0.0
    } else {
        (brevity_penalty * libm::exp(log_sum / orders as f64)).clamp(0.0, 1.0)
    };
    Ok(BleuScore {
        bleu,
        precisions,
        matches,
        totals,
        brevity_penalty,
        hypothesis_length: hyp_len,
        reference_length: ref_len,
        tokenizer,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub avg: f64,
    pub min: usize,
    pub max: usize,
}

impl Summary {
    fn of(values: &[usize]) -> Summary {
        let sum: usize = values.iter().sum();
        Summary {
            avg: sum as f64 / values.len() as f64,
            min: values.iter().copied().min().unwrap_or(0),
            max: values.iter().copied().max().unwrap_or(0),
        }
    }
}

pub const TOP_PREDICATES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub language: Language,
    pub instance_count: usize,
    pub word_count: Summary,
    pub fact_count: Summary,
    pub vocabulary_size: usize,
    /// Fraction of instances having each fact count.
    pub fact_count_histogram: BTreeMap<usize, f64>,
    /// Most frequent predicate labels, by count then label.
    pub top_predicates: Vec<(String, usize)>,
}

/// Corpus statistics of aligned instances in one language.
pub fn dataset_stats(
    instances: &[AlignedInstance],
    language: Language,
) -> Result<StatsReport, MetricError> {
    if instances.is_empty() {
        return Err(MetricError::Empty);
    }
    if let Some(i) = instances.iter().find(|i| i.sentence.language != language) {
        return Err(MetricError::WrongLanguage {
            expected: language,
            found: i.sentence.language,
        });
    }
    let words: Vec<usize> = instances.iter().map(|i| i.sentence.token_count()).collect();
    let facts: Vec<usize> = instances.iter().map(|i| i.facts.len()).collect();
    let vocabulary: BTreeSet<&str> = instances
        .iter()
        .flat_map(|i| i.sentence.text.split_whitespace())
        .collect();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for f in &facts {
        *hist.entry(*f).or_default() += 1;
    }
    let n = instances.len() as f64;
    let mut preds: BTreeMap<&str, usize> = BTreeMap::new();
    for f in instances.iter().flat_map(|i| &i.facts) {
        *preds.entry(f.predicate.label.as_str()).or_default() += 1;
    }
    let mut top: Vec<(String, usize)> = preds.into_iter().map(|(l, c)| (l.into(), c)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(TOP_PREDICATES);
    Ok(StatsReport {
        language,
        instance_count: instances.len(),
        word_count: Summary::of(&words),
        fact_count: Summary::of(&facts),
        vocabulary_size: vocabulary.len(),
        fact_count_histogram: hist.into_iter().map(|(k, c)| (k, c as f64 / n)).collect(),
        top_predicates: top,
    })
}
