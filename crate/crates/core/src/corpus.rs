use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::facts::{dedup_facts, Entity, Fact};
use crate::lang::Language;
use crate::text::{token_count, SentenceSplitter};

/// One article page extracted from a dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiPage {
    pub page_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_id: Option<String>,
    pub language: Language,
    pub title: String,
    /// `(heading, plain body)` pairs in document order.
    pub sections: Vec<(String, String)>,
}

/// A single sentence with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub language: Language,
    pub section: String,
    pub page_id: String,
    pub entity_id: String,
    /// Position of the sentence within its page, starting at 0.
    pub ordinal: u32,
}

impl Sentence {
    pub fn token_count(&self) -> usize {
        token_count(&self.text)
    }
}

impl WikiPage {
    /// Splits every section body into sentences, numbering them in page order.
    pub fn sentences(&self, splitter: &SentenceSplitter) -> Vec<Sentence> {
        let entity_id = self.entity_id.clone().unwrap_or_default();
        let mut out = Vec::new();
        for (section, body) in &self.sections {
            for text in splitter.split(body, self.language) {
                out.push(Sentence {
                    text,
                    language: self.language,
                    section: section.clone(),
                    page_id: self.page_id.clone(),
                    entity_id: entity_id.clone(),
                    ordinal: out.len() as u32,
                });
            }
        }
        out
    }
}

/// All facts and sentences known for one entity in one language.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityBundle {
    pub entity: Entity,
    pub language: Language,
    pub facts: Vec<Fact>,
    pub sentences: Vec<Sentence>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BundleError {
    #[error("sentence {ordinal} of page {page_id} is in {found}, bundle language is {expected}")]
    LanguageMismatch {
        page_id: String,
        ordinal: u32,
        found: Language,
        expected: Language,
    },
}

impl EntityBundle {
    /// Builds a bundle, deduplicating facts and ordering sentences by
    /// `(page_id, ordinal)`.
    pub fn new(
        entity: Entity,
        language: Language,
        facts: Vec<Fact>,
        mut sentences: Vec<Sentence>,
    ) -> Result<Self, BundleError> {
        if let Some(s) = sentences.iter().find(|s| s.language != language) {
            return Err(BundleError::LanguageMismatch {
                page_id: s.page_id.clone(),
                ordinal: s.ordinal,
                found: s.language,
                expected: language,
            });
        }
        sentences.sort_by(|a, b| (&a.page_id, a.ordinal).cmp(&(&b.page_id, b.ordinal)));
        Ok(EntityBundle {
            entity,
            language,
            facts: dedup_facts(facts),
            sentences,
        })
    }
}
