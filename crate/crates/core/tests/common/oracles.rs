//! Literal re-statements of the selection and sampling procedures.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use factalign_core::facts::FactKey;
use factalign_core::providers::EmbeddingProvider;
use factalign_core::stage1::{fact_sentence_similarity, Stage1Indexes, Stage1Providers};
use factalign_core::stage2::{
    AlignedInstance,
    format_pair, page_seed, DistantConfig, DistantDataset, DistantPage, DistantSentence, PairExample, PairLabel,
    PAIR_SEPARATOR,
};
use factalign_core::{EntityBundle, Fact, Language, Stage1Config};

use super::{labelled_fact, page_sentence, reference_cosine};

/// Selection written literally: score everything, test the best against
/// tau, then repeatedly extract the best remaining fact.
pub fn stage1_brute_force(
    bundle: &EntityBundle,
    cfg: &Stage1Config,
    idx: &Stage1Indexes,
    p: Stage1Providers<'_>,
) -> Vec<(u32, Vec<(FactKey, f64)>)> {
    let mut out = Vec::new();
    for s in &bundle.sentences {
        let mut remaining: Vec<(FactKey, f64)> = bundle
            .facts
            .iter()
            .map(|f| {
                let c = fact_sentence_similarity(f, s, idx, p, cfg).unwrap();
                (f.key(), c.score)
            })
            .collect();
        let best = remaining.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        if !(best > cfg.tau) {
            continue;
        }
        let mut chosen = Vec::new();
        while chosen.len() < cfg.k && !remaining.is_empty() {
            let mut bi = 0;
            for i in 1..remaining.len() {
                let (ref k, sc) = remaining[i];
                let (ref bk, bs) = remaining[bi];
                if sc > bs || (sc == bs && k < bk) {
                    bi = i;
                }
            }
            chosen.push(remaining.remove(bi));
        }
        out.push((s.ordinal, chosen));
    }
    out
}

/// Five sentences: s0 has two facts, s3 and s4 one each, s1 and s2 none.
/// s1 and s2 repeat the vocabulary of the others so they rank as the most
/// similar sentences for every anchor.
pub fn five_sentence_page() -> DistantPage {
    let birth = labelled_fact("P19", "place of birth", "Q1353", "Delhi");
    let job = labelled_fact("P106", "occupation", "Q36180", "writer");
    let award = labelled_fact("P166", "award received", "Q949193", "Padma Shri");
    let spouse = labelled_fact("P26", "spouse", "Q1004", "Rahul Desai");
    let texts = [
        "Asha Rao is a writer born in Delhi.",
        "Asha Rao, a writer born in Delhi, received the Padma Shri and married Rahul Desai.",
        "The writer Asha Rao from Delhi received the Padma Shri and married Rahul Desai.",
        "She received the Padma Shri in 2008.",
        "She married Rahul Desai in 1985.",
    ];
    let facts = [vec![birth, job], vec![], vec![], vec![award], vec![spouse]];
    DistantPage {
        page_id: "asha".into(),
        sentences: texts
            .iter()
            .zip(facts)
            .enumerate()
            .map(|(i, (t, f))| DistantSentence {
                sentence: page_sentence("asha", t, i as u32),
                facts: f,
            })
            .collect(),
    }
}

/// The sampling procedure written out step by step, used as the oracle.
pub fn distant_brute_force(pages: &[DistantPage], e: &dyn EmbeddingProvider, cfg: &DistantConfig) -> DistantDataset {
    let mut pages = pages.to_vec();
    pages.sort_by(|a, b| a.page_id.cmp(&b.page_id));
    let mut all: Vec<PairExample> = Vec::new();
    let (mut pos, mut neg, mut missing) = (0, 0, 0);
    for page in &pages {
        let mut sents = page.sentences.clone();
        sents.sort_by_key(|s| s.sentence.ordinal);
        for s in &mut sents {
            let mut seen = BTreeSet::new();
            s.facts.retain(|f| seen.insert(f.key()));
        }
        let emb: Vec<Vec<f64>> = sents.iter().map(|s| e.embed(&s.sentence.text, Language::En).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(page_seed(cfg.seed, &page.page_id));
        for i in 0..sents.len() {
            if sents[i].facts.is_empty() {
                continue;
            }
            let own: BTreeSet<_> = sents[i].facts.iter().map(Fact::key).collect();
            let mut ranked: Vec<(usize, f64)> =
                (0..sents.len()).filter(|&j| j != i).map(|j| (j, reference_cosine(&emb[i], &emb[j]))).collect();
            ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let donors: Vec<usize> = ranked
                .iter()
                .skip(cfg.skip_top)
                .take(cfg.pool_size)
                .map(|r| r.0)
                .filter(|&j| sents[j].facts.iter().any(|f| !own.contains(&f.key())))
                .collect();
            for f in &sents[i].facts {
                let mk = |fact: &Fact, label| PairExample {
                    pair_text: format!("{}{}{}", sents[i].sentence.text, PAIR_SEPARATOR, fact.verbalize_en().unwrap()),
                    label,
                    source_page: page.page_id.clone(),
                    sentence_ordinal: sents[i].sentence.ordinal,
                };
                all.push(mk(f, PairLabel::Positive));
                pos += 1;
                if donors.is_empty() {
                    missing += 1;
                    continue;
                }
                let d = donors[rng.random_range(0..donors.len())];
                let foreign: Vec<&Fact> = sents[d].facts.iter().filter(|g| !own.contains(&g.key())).collect();
                all.push(mk(foreign[rng.random_range(0..foreign.len())], PairLabel::Negative));
                neg += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    all.shuffle(&mut rng);
    let n_train = ((all.len() as f64) * cfg.train_fraction).round() as usize;
    let validation = all.split_off(n_train.min(all.len()));
    let mut ds = DistantDataset {
        seed: cfg.seed,
        counts: Default::default(),
        validation,
        train: all,
    };
    ds.counts.positives = pos;
    ds.counts.negatives = neg;
    ds.counts.missing_negatives = missing;
    ds.counts.train = ds.train.len();
    ds.counts.validation = ds.validation.len();
    ds
}

/// Every (anchor ordinal, pair text) a negative may take.
pub fn legal_negatives(page: &DistantPage, e: &dyn EmbeddingProvider, cfg: &DistantConfig) -> BTreeSet<(u32, String)> {
    let sents = &page.sentences;
    let emb: Vec<Vec<f64>> = sents.iter().map(|s| e.embed(&s.sentence.text, Language::En).unwrap()).collect();
    let mut out = BTreeSet::new();
    for (i, a) in sents.iter().enumerate() {
        if a.facts.is_empty() {
            continue;
        }
        let own: BTreeSet<_> = a.facts.iter().map(Fact::key).collect();
        let mut ranked: Vec<(usize, f64)> =
            (0..sents.len()).filter(|&j| j != i).map(|j| (j, reference_cosine(&emb[i], &emb[j]))).collect();
        ranked.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
        for (j, _) in ranked.iter().skip(cfg.skip_top).take(cfg.pool_size) {
            for f in &sents[*j].facts {
                if !own.contains(&f.key()) {
                    out.insert((a.sentence.ordinal, format_pair(&a.sentence, f).unwrap()));
                }
            }
        }
    }
    out
}

/// Independent recount of the statistics table.
pub struct Recount {
    pub instances: usize,
    pub vocabulary: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub histogram: BTreeMap<usize, f64>,
    pub top_predicates: Vec<(String, usize)>,
}

pub fn recount_stats(instances: &[AlignedInstance], top_n: usize) -> Recount {
    let mut vocab = BTreeSet::new();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    let mut preds: BTreeMap<String, usize> = BTreeMap::new();
    let mut words = Vec::new();
    for inst in instances {
        let toks: Vec<&str> = inst.sentence.text.split_whitespace().collect();
        words.push(toks.len());
        vocab.extend(toks);
        *hist.entry(inst.facts.len()).or_default() += 1;
        for f in &inst.facts {
            *preds.entry(f.predicate.label.clone()).or_default() += 1;
        }
    }
    let mut top: Vec<(String, usize)> = preds.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(top_n);
    Recount {
        instances: instances.len(),
        vocabulary: vocab.len(),
        min_words: words.iter().copied().min().unwrap_or(0),
        max_words: words.iter().copied().max().unwrap_or(0),
        histogram: hist
            .into_iter()
            .map(|(k, c)| (k, c as f64 / instances.len() as f64))
            .collect(),
        top_predicates: top,
    }
}
