//! Human annotation of candidate sets: task model, the append-only service
//! and its HTTP front end.

pub mod http;
pub mod service;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use factalign_core::facts::{verbalize_fact, LabelFallback};
use factalign_core::{CandidateSet, Fact, Language, Sentence};

pub use service::{system_clock, AnnotationService, Clock, ServiceConfig};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("unknown annotator {0}")]
    UnknownAnnotator(String),
    #[error("annotator {0} is already registered for another language")]
    AnnotatorConflict(String),
    #[error("task {task_id} was never served to {annotator_id}")]
    NotServed { task_id: String, annotator_id: String },
    #[error("{annotator_id} already submitted task {task_id}")]
    Duplicate { task_id: String, annotator_id: String },
    #[error("duplicate task {0}")]
    DuplicateTask(String),
    #[error("invalid submission: {0}")]
    Invalid(String),
    #[error("event log: {0}")]
    Log(String),
}

/// A candidate fact as shown to annotators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskFact {
    pub fact_id: String,
    pub display: String,
}

/// Server-side task. Golden status and the gold answer never leave the
/// service; annotators see [`TaskPayload`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub task_id: String,
    pub sentence: Sentence,
    pub reference_translation: String,
    pub facts: Vec<TaskFact>,
    pub is_golden: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<BTreeSet<String>>,
    pub language: Language,
    /// The facts behind `facts`, in the same order.
    pub source_facts: Vec<Fact>,
}

/// What an annotator receives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskPayload {
    pub task_id: String,
    pub sentence: Sentence,
    pub reference_translation: String,
    pub facts: Vec<TaskFact>,
    pub language: Language,
}

impl AnnotationTask {
    pub fn payload(&self) -> TaskPayload {
        TaskPayload {
            task_id: self.task_id.clone(),
            sentence: self.sentence.clone(),
            reference_translation: self.reference_translation.clone(),
            facts: self.facts.clone(),
            language: self.language,
        }
    }

    pub fn fact_ids(&self) -> impl Iterator<Item = &str> {
        self.facts.iter().map(|f| f.fact_id.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    Partial,
    Complete,
}

/// Body of a submission request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator_id: Option<String>,
    pub marked_fact_ids: Vec<String>,
    #[serde(default)]
    pub coverage: Option<Coverage>,
    #[serde(default)]
    pub issue_text: String,
}

/// A stored, immutable submission.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSubmission {
    pub record_id: String,
    pub task_id: String,
    pub annotator_id: String,
    pub marked_fact_ids: BTreeSet<String>,
    pub coverage: Option<Coverage>,
    pub issue_text: String,
    /// Seconds since the Unix epoch, from the service clock.
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorProfile {
    pub annotator_id: String,
    pub language: Language,
    pub golden_kappa: Option<f64>,
    pub qualified: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Majority,
    Intersection,
    Union,
}

impl std::str::FromStr for Aggregation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "majority" => Ok(Aggregation::Majority),
            "intersection" => Ok(Aggregation::Intersection),
            "union" => Ok(Aggregation::Union),
            other => Err(format!("unknown aggregation rule {other:?}")),
        }
    }
}

/// Combines marked fact sets. Majority keeps facts marked by strictly more
/// than half of the sets.
pub fn aggregate(sets: &[&BTreeSet<String>], rule: Aggregation) -> BTreeSet<String> {
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for s in sets {
        for id in *s {
            *votes.entry(id.as_str()).or_default() += 1;
        }
    }
    let n = sets.len();
    votes
        .into_iter()
        .filter(|&(_, v)| match rule {
            Aggregation::Majority => 2 * v > n,
            Aggregation::Intersection => v == n,
            Aggregation::Union => v > 0,
        })
        .map(|(id, _)| id.to_string())
        .collect()
}

/// Identity of a sentence across inputs.
pub type SentenceKey = (String, u32);

pub fn sentence_key(s: &Sentence) -> SentenceKey {
    (s.page_id.clone(), s.ordinal)
}

/// Content hash of a sentence, used as its task id.
pub fn task_id_for(sentence: &Sentence) -> String {
    let mut h = Sha256::new();
    for part in [
        sentence.language.code(),
        sentence.page_id.as_str(),
        &sentence.ordinal.to_string(),
        sentence.text.as_str(),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..8])
}

/// One task per candidate set. Sentences with a gold entry become golden
/// tasks.
pub fn create_tasks(
    sets: &[CandidateSet],
    translations: &BTreeMap<SentenceKey, String>,
    golden: &BTreeMap<SentenceKey, BTreeSet<String>>,
) -> Result<Vec<AnnotationTask>, AnnotationError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(sets.len());
    for cs in sets {
        let key = sentence_key(&cs.sentence);
        let task_id = task_id_for(&cs.sentence);
        if !seen.insert(task_id.clone()) {
            return Err(AnnotationError::DuplicateTask(task_id));
        }
        if cs.candidates.is_empty() {
            return Err(AnnotationError::Invalid(format!("task {task_id} has no facts")));
        }
        let translation = translations.get(&key).ok_or_else(|| {
            AnnotationError::Invalid(format!("no reference translation for {}#{}", key.0, key.1))
        })?;
        let facts: Vec<TaskFact> = cs
            .candidates
            .iter()
            .map(|c| {
                let display = verbalize_fact(&c.fact, true, Language::En, LabelFallback::English)
                    .map_err(|e| AnnotationError::Invalid(e.to_string()))?;
                Ok(TaskFact {
                    fact_id: c.fact_ref.to_string(),
                    display,
                })
            })
            .collect::<Result<_, AnnotationError>>()?;
        let gold = golden.get(&key).cloned();
        if let Some(g) = &gold {
            if let Some(bad) = g.iter().find(|id| !facts.iter().any(|f| &f.fact_id == *id)) {
                return Err(AnnotationError::Invalid(format!(
                    "gold fact {bad} of task {task_id} is not a candidate"
                )));
            }
        }
        out.push(AnnotationTask {
            task_id,
            language: cs.sentence.language,
            sentence: cs.sentence.clone(),
            reference_translation: translation.clone(),
            facts,
            is_golden: gold.is_some(),
            gold,
            source_facts: cs.candidates.iter().map(|c| c.fact.clone()).collect(),
        });
    }
    Ok(out)
}
