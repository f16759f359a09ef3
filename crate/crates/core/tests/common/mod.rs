#![allow(dead_code)]

pub mod oracles;

use proptest::prelude::*;
use factalign_core::facts::{Entity, Fact, Predicate, Value};
use factalign_core::stage2::{DistantPage, DistantSentence};
use factalign_core::{Language, Sentence};

pub const WORDS: [&str; 16] = [
    "born", "delhi", "actor", "film", "married", "singer", "award", "mumbai", "played", "cricket",
    "captain", "india", "wrote", "novel", "elected", "minister",
];

pub const PREDICATES: [(&str, &str); 6] = [
    ("P19", "place of birth"),
    ("P106", "occupation"),
    ("P26", "spouse"),
    ("P166", "award received"),
    ("P27", "country of citizenship"),
    ("P800", "notable work"),
];

pub fn subject() -> Entity {
    Entity::new("Q100")
        .with_label("en", "Asha Rao")
        .with_label("hi", "आशा राव")
}

pub fn item_fact(pred: usize, object_words: &[usize]) -> Fact {
    // the object id is a function of its label so equal ids never carry different labels
    let qid = object_words.iter().fold(1000u64, |acc, w| acc * 17 + (w % WORDS.len()) as u64 + 1);
    let (pid, label) = PREDICATES[pred % PREDICATES.len()];
    let label_text: Vec<&str> = object_words.iter().map(|w| WORDS[w % WORDS.len()]).collect();
    Fact {
        subject: subject(),
        predicate: Predicate {
            pid: pid.into(),
            label: label.into(),
        },
        object: Value::Item {
            entity: Entity::new(format!("Q{qid}")).with_label("en", label_text.join(" ")),
        },
        qualifiers: vec![],
    }
}

pub fn sentence(words: &[usize], ordinal: u32, lang: Language) -> Sentence {
    let text: Vec<&str> = words.iter().map(|w| WORDS[w % WORDS.len()]).collect();
    Sentence {
        text: format!("Asha Rao {}.", text.join(" ")),
        language: lang,
        section: String::new(),
        page_id: "page-1".into(),
        entity_id: "Q100".into(),
        ordinal,
    }
}

/// Plain tf-idf cosine written directly from the definition, for checking
/// the index: tf = raw count, idf = ln((1+N)/(1+df)) + 1.
pub fn reference_tfidf_cosine(docs: &[&str], a: &str, b: &str) -> f64 {
    use std::collections::{BTreeMap, BTreeSet};
    let tok = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
            .filter(|t| !t.is_empty())
            .map(|t| t.to_lowercase())
            .collect()
    };
    let n = docs.len() as f64;
    let mut df: BTreeMap<String, f64> = BTreeMap::new();
    for d in docs {
        for t in tok(d).into_iter().collect::<BTreeSet<_>>() {
            *df.entry(t).or_default() += 1.0;
        }
    }
    let vec = |s: &str| -> BTreeMap<String, f64> {
        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for t in tok(s) {
            *m.entry(t).or_default() += 1.0;
        }
        for (t, w) in m.iter_mut() {
            let d = df.get(t).copied().unwrap_or(0.0);
            *w *= ((1.0 + n) / (1.0 + d)).ln() + 1.0;
        }
        m
    };
    let (va, vb) = (vec(a), vec(b));
    let dot: f64 = va.iter().map(|(t, x)| x * vb.get(t).copied().unwrap_or(0.0)).sum();
    let na: f64 = va.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = vb.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn reference_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Fact about the common subject with a fixed object label.
pub fn labelled_fact(pid: &str, label: &str, qid: &str, object: &str) -> Fact {
    Fact {
        subject: subject(),
        predicate: Predicate {
            pid: pid.into(),
            label: label.into(),
        },
        object: Value::Item {
            entity: Entity::new(qid).with_label("en", object),
        },
        qualifiers: vec![],
    }
}

pub fn page_sentence(page: &str, text: &str, ordinal: u32) -> Sentence {
    Sentence {
        text: text.into(),
        language: Language::En,
        section: String::new(),
        page_id: page.into(),
        entity_id: "Q100".into(),
        ordinal,
    }
}

/// Up to twenty facts and twenty Hindi sentences over the shared vocabulary.
pub fn bundle_strategy() -> impl Strategy<Value = (Vec<Fact>, Vec<Sentence>)> {
    let fact = (0usize..6, prop::collection::vec(0usize..16, 1..3))
        .prop_map(|(p, w)| item_fact(p, &w));
    let sent = prop::collection::vec(0usize..16, 1..8);
    (
        prop::collection::vec(fact, 1..=20),
        prop::collection::vec(sent, 1..=20),
    )
        .prop_map(|(facts, sents)| {
            let sentences = sents
                .iter()
                .enumerate()
                .map(|(i, w)| sentence(w, i as u32, Language::Hi))
                .collect();
            (facts, sentences)
        })
}

/// One to three pages of up to ten English sentences with random facts.
pub fn page_strategy() -> impl Strategy<Value = Vec<DistantPage>> {
    let sent = (prop::collection::vec(0usize..16, 3..8), prop::collection::vec((0usize..6, 0usize..16), 0..3));
    let page = prop::collection::vec(sent, 1..=10);
    prop::collection::vec(page, 1..4).prop_map(|pages| {
        pages
            .into_iter()
            .enumerate()
            .map(|(p, sents)| {
                let id = format!("page-{p}");
                DistantPage {
                    page_id: id.clone(),
                    sentences: sents
                        .into_iter()
                        .enumerate()
                        .map(|(i, (words, facts))| {
                            let mut s = sentence(&words, i as u32, Language::En);
                            s.page_id = id.clone();
                            DistantSentence {
                                sentence: s,
                                facts: facts.iter().map(|&(pr, w)| item_fact(pr, &[w])).collect(),
                            }
                        })
                        .collect(),
                }
            })
            .collect()
    })
}
