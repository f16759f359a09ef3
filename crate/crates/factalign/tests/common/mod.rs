#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use factalign::annotation::{create_tasks, AnnotationTask};
use factalign_core::facts::{Entity, Fact, Predicate, Value};
use factalign_core::stage1::{Components, ScoredCandidate};
use factalign_core::{CandidateSet, Language, Sentence};

pub const OBJECTS: [(&str, &str, &str); 4] = [
    ("P19", "place of birth", "Delhi"),
    ("P106", "occupation", "writer"),
    ("P166", "award received", "Padma Shri"),
    ("P26", "spouse", "Rahul Desai"),
];

pub fn fact(i: usize) -> Fact {
    let (pid, label, object) = OBJECTS[i % OBJECTS.len()];
    Fact {
        subject: Entity::new("Q1001").with_label("en", "Asha Rao"),
        predicate: Predicate {
            pid: pid.into(),
            label: label.into(),
        },
        object: Value::Item {
            entity: Entity::new(format!("Q{}", 2000 + i)).with_label("en", object),
        },
        qualifiers: vec![],
    }
}

pub fn candidate_set(page: &str, ordinal: u32, language: Language) -> CandidateSet {
    let text = match language {
        Language::En => format!("Asha Rao sentence number {ordinal} about her life."),
        _ => format!("आशा राव के जीवन के बारे में वाक्य {ordinal} है।"),
    };
    CandidateSet {
        sentence: Sentence {
            text,
            language,
            section: String::new(),
            page_id: page.into(),
            entity_id: "Q1001".into(),
            ordinal,
        },
        candidates: (0..OBJECTS.len())
            .map(|i| {
                let f = fact(i);
                ScoredCandidate {
                    fact_ref: f.key(),
                    fact: f,
                    score: 0.9 - i as f64 * 0.05,
                    components: Components {
                        semantic_native: 0.9,
                        tfidf_fact_to_lr: 0.9,
                        tfidf_sentence_to_en: 0.9,
                        semantic_translated: 0.9,
                    },
                }
            })
            .collect(),
    }
}

/// Gold answer of golden task `i`: a varying non-empty prefix of the facts.
pub fn gold_for(task: &AnnotationTask, i: usize) -> BTreeSet<String> {
    task.facts.iter().take(1 + i % 3).map(|f| f.fact_id.clone()).collect()
}

/// `golden` golden and `regular` regular tasks, with the golden ones spread
/// over the creation order.
pub fn tasks(language: Language, golden: usize, regular: usize) -> Vec<AnnotationTask> {
    let total = golden + regular;
    let sets: Vec<CandidateSet> = (0..total)
        .map(|i| candidate_set(&format!("page-{}", i % 7), i as u32, language))
        .collect();
    let translations: BTreeMap<_, _> = sets
        .iter()
        .map(|s| ((s.sentence.page_id.clone(), s.sentence.ordinal), format!("translation {}", s.sentence.ordinal)))
        .collect();
    let plain = create_tasks(&sets, &translations, &BTreeMap::new()).unwrap();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by_key(|i| (i * 7919) % total.max(1));
    let gold: BTreeMap<_, _> = order[..golden]
        .iter()
        .map(|&i| {
            let t = &plain[i];
            ((t.sentence.page_id.clone(), t.sentence.ordinal), gold_for(t, i))
        })
        .collect();
    create_tasks(&sets, &translations, &gold).unwrap()
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Copies the bundled fixture inputs into `dir` and returns the config path.
pub fn copy_fixture(dir: &Path) -> PathBuf {
    for name in ["config.toml", "enwiki.xml", "hiwiki.xml", "entities.jsonl", "lexicon.tsv", "glossary.tsv"] {
        std::fs::copy(fixture_dir().join(name), dir.join(name)).unwrap();
    }
    dir.join("config.toml")
}

/// Every regular file under `dir`, relative path to contents.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                out.insert(p.strip_prefix(base).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
