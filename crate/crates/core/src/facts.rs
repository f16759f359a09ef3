//! Fact triples, their textual renderings and deduplication keys.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lang::Language;
use crate::providers::{ProviderError, TranslationProvider};

/// A knowledge-base item with its multilingual labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub qid: String,
    /// Labels keyed by language code. Codes outside the supported set are kept.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl Entity {
    pub fn new(qid: impl Into<String>) -> Self {
        Entity {
            qid: qid.into(),
            labels: BTreeMap::new(),
        }
    }

    pub fn with_label(mut self, lang: &str, label: impl Into<String>) -> Self {
        self.labels.insert(lang.into(), label.into());
        self
    }

    pub fn label(&self, lang: Language) -> Option<&str> {
        self.labels.get(lang.code()).map(String::as_str)
    }

    pub fn is_valid_qid(qid: &str) -> bool {
        qid.strip_prefix('Q')
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub pid: String,
    /// English label of the property.
    pub label: String,
}

/// The four property datatypes a fact object may have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Datatype {
    WikibaseItem,
    Time,
    Quantity,
    Monolingualtext,
}

impl Datatype {
    pub const ALL: [Datatype; 4] = [
        Datatype::WikibaseItem,
        Datatype::Time,
        Datatype::Quantity,
        Datatype::Monolingualtext,
    ];

    /// Maps the datatype names used in entity dumps.
    pub fn from_dump_name(name: &str) -> Option<Datatype> {
        match name {
            "wikibase-item" | "WikibaseItem" => Some(Datatype::WikibaseItem),
            "time" | "Time" => Some(Datatype::Time),
            "quantity" | "Quantity" => Some(Datatype::Quantity),
            "monolingualtext" | "Monolingualtext" => Some(Datatype::Monolingualtext),
            _ => None,
        }
    }
}

/// Typed object or qualifier value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Value {
    Item {
        entity: Entity,
    },
    Time {
        /// Dump-style timestamp, e.g. `+1955-02-11T00:00:00Z`.
        time: String,
        /// 11 = day, 10 = month, 9 = year, 8 = decade, 7 = century, 6 = millennium.
        precision: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calendar: Option<String>,
    },
    Quantity {
        /// Decimal amount as written in the dump, e.g. `+2.02`.
        amount: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<Entity>,
    },
    Monotext {
        text: String,
        language: String,
    },
}

impl Value {
    pub fn datatype(&self) -> Datatype {
        match self {
            Value::Item { .. } => Datatype::WikibaseItem,
            Value::Time { .. } => Datatype::Time,
            Value::Quantity { .. } => Datatype::Quantity,
            Value::Monotext { .. } => Datatype::Monolingualtext,
        }
    }

    /// Canonical string identifying the value. Time values keep only the
    /// components covered by their precision, and the calendar model is
    /// ignored.
    pub fn canonical(&self) -> String {
        match self {
            Value::Item { entity } => entity.qid.clone(),
            Value::Time {
                time, precision, ..
            } => match parse_time(time) {
                Some(t) => {
                    let sign = if t.negative { "-" } else { "+" };
                    match precision {
                        11.. => format!("{sign}{:04}-{:02}-{:02}", t.year, t.month, t.day),
                        10 => format!("{sign}{:04}-{:02}", t.year, t.month),
                        _ => format!("{sign}{:04}/{precision}", t.year),
                    }
                }
                None => time.clone(),
            },
            Value::Quantity { amount, unit } => {
                let amount = amount.trim_start_matches('+');
                match unit {
                    Some(u) => format!("{amount} {}", u.qid),
                    None => amount.to_string(),
                }
            }
            Value::Monotext { text, language } => format!("{language}:{text}"),
        }
    }

    /// Surface text of the value. Labels are taken in `lang`, falling back to
    /// English when `fallback` allows it.
    pub fn surface(&self, lang: Language, fallback: LabelFallback) -> Result<String, FactError> {
        match self {
            Value::Item { entity } => label_of(entity, lang, fallback).map(ToString::to_string),
            Value::Time {
                time, precision, ..
            } => Ok(format_time(time, *precision)),
            Value::Quantity { amount, unit } => {
                let amount = amount.trim_start_matches('+');
                match unit {
                    Some(u) => Ok(format!("{amount} {}", label_of(u, lang, fallback)?)),
                    None => Ok(amount.to_string()),
                }
            }
            Value::Monotext { text, .. } => Ok(text.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qualifier {
    pub predicate: Predicate,
    pub value: Value,
}

/// One subject-predicate-object statement with optional qualifiers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub subject: Entity,
    pub predicate: Predicate,
    pub object: Value,
    #[serde(default)]
    pub qualifiers: Vec<Qualifier>,
}

/// Identity of a fact within an entity bundle: property id plus canonical
/// object. Written as `P569=+1955-02-11`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FactKey {
    pub pid: String,
    pub object: String,
}

impl fmt::Display for FactKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.pid, self.object)
    }
}

impl From<FactKey> for String {
    fn from(k: FactKey) -> String {
        k.to_string()
    }
}

impl FromStr for FactKey {
    type Err = FactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('=') {
            Some((pid, object)) if !pid.is_empty() => Ok(FactKey {
                pid: pid.into(),
                object: object.into(),
            }),
            _ => Err(FactError::BadKey(s.into())),
        }
    }
}

impl TryFrom<String> for FactKey {
    type Error = FactError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FactError {
    #[error("no label for {qid} in {language} and fallback is disabled")]
    MissingLabel { qid: String, language: Language },
    #[error("translating the {slot} slot failed: {source}")]
    Translation {
        slot: &'static str,
        source: ProviderError,
    },
    #[error("malformed fact key {0:?}")]
    BadKey(String),
}

/// Whether a missing label in the requested language may be replaced by the
/// English one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LabelFallback {
    #[default]
    English,
    Disabled,
}

fn label_of(entity: &Entity, lang: Language, fallback: LabelFallback) -> Result<&str, FactError> {
    entity
        .label(lang)
        .or_else(|| match fallback {
            LabelFallback::English => entity.label(Language::En),
            LabelFallback::Disabled => None,
        })
        .ok_or_else(|| FactError::MissingLabel {
            qid: entity.qid.clone(),
            language: lang,
        })
}

impl Fact {
    pub fn key(&self) -> FactKey {
        FactKey {
            pid: self.predicate.pid.clone(),
            object: self.object.canonical(),
        }
    }

    /// English verbalization without qualifiers.
    pub fn verbalize_en(&self) -> Result<String, FactError> {
        verbalize_fact(self, false, Language::En, LabelFallback::Disabled)
    }
}

/// Renders `subject | predicate | object`, appending
/// ` | qualifier: value` per qualifier when requested.
pub fn verbalize_fact(
    fact: &Fact,
    include_qualifiers: bool,
    lang: Language,
    fallback: LabelFallback,
) -> Result<String, FactError> {
    let mut out = format!(
        "{} | {} | {}",
        label_of(&fact.subject, lang, fallback)?,
        fact.predicate.label,
        fact.object.surface(lang, fallback)?
    );
    if include_qualifiers {
        for q in &fact.qualifiers {
            out.push_str(" | ");
            out.push_str(&q.predicate.label);
            out.push_str(": ");
            out.push_str(&q.value.surface(lang, fallback)?);
        }
    }
    Ok(out)
}

/// Renders the fact for language `target`: entity slots use their
/// `target`-language label when one exists and are translated from English
/// otherwise; the predicate and non-item objects are always translated.
pub fn localize_fact_text(
    fact: &Fact,
    target: Language,
    translator: &dyn TranslationProvider,
) -> Result<String, FactError> {
    let slot = |slot: &'static str, text: &str| {
        translator
            .translate(text, Language::En, target)
            .map_err(|source| FactError::Translation { slot, source })
    };
    let entity_slot = |name: &'static str, e: &Entity| -> Result<String, FactError> {
        match e.label(target) {
            Some(l) => Ok(l.to_string()),
            None => slot(name, label_of(e, Language::En, LabelFallback::Disabled)?),
        }
    };
    let subject = entity_slot("subject", &fact.subject)?;
    let predicate = slot("predicate", &fact.predicate.label)?;
    let object = match &fact.object {
        Value::Item { entity } => entity_slot("object", entity)?,
        other => slot(
            "object",
            &other.surface(Language::En, LabelFallback::Disabled)?,
        )?,
    };
    Ok(format!("{subject} | {predicate} | {object}"))
}

/// Removes repeated facts, keeping the first occurrence of every
/// `(subject, pid, canonical object)` combination.
pub fn dedup_facts(facts: Vec<Fact>) -> Vec<Fact> {
    let mut seen = BTreeSet::new();
    facts
        .into_iter()
        .filter(|f| seen.insert((f.subject.qid.clone(), f.key())))
        .collect()
}

struct ParsedTime {
    negative: bool,
    year: u64,
    month: u32,
    day: u32,
}

fn parse_time(time: &str) -> Option<ParsedTime> {
    let (negative, rest) = match time.as_bytes().first()? {
        b'-' => (true, &time[1..]),
        b'+' => (false, &time[1..]),
        _ => (false, time),
    };
    let date = rest.split('T').next()?;
    let mut parts = date.split('-');
    let year = parts.next()?.parse().ok()?;
    let month = parts.next().map_or(Some(0), |m| m.parse().ok())?;
    let day = parts.next().map_or(Some(0), |d| d.parse().ok())?;
    Some(ParsedTime {
        negative,
        year,
        month,
        day,
    })
}

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

fn ordinal_suffix(n: u64) -> &'static str {
    match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

/// Formats a dump timestamp at the given precision, e.g. `11 February 1955`,
/// `February 1955`, `1955`, `1950s`, `20th century`.
pub fn format_time(time: &str, precision: u8) -> String {
    let Some(t) = parse_time(time) else {
        return time.to_string();
    };
    let era = if t.negative { " BCE" } else { "" };
    let month = (1..=12).contains(&t.month).then(|| MONTHS[t.month as usize - 1]);
    match (precision, month) {
        (11.., Some(m)) if t.day >= 1 => format!("{} {m} {}{era}", t.day, t.year),
        (10.., Some(m)) => format!("{m} {}{era}", t.year),
        (8, _) => format!("{}s{era}", t.year - t.year % 10),
        (7, _) => {
            let c = t.year.div_ceil(100).max(1);
            format!("{c}{} century{era}", ordinal_suffix(c))
        }
        (6, _) => {
            let m = t.year.div_ceil(1000).max(1);
            format!("{m}{} millennium{era}", ordinal_suffix(m))
        }
        _ => format!("{}{era}", t.year),
    }
}
