//! Parser for entity dumps in the standard JSON schema (one entity per line).
//!
//! Claims are turned into typed facts. The dump is read twice: once to
//! collect labels of items and properties, and once to build facts whose
//! item objects, units and predicates carry those labels.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use factalign_core::facts::{Datatype, Entity, Fact, Predicate, Qualifier, Value};

#[derive(Debug, thiserror::Error)]
pub enum EntityDumpError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: entity has no id")]
    MissingId { line: usize },
    #[error("{entity}, claim on {pid}: {message}")]
    Schema {
        entity: String,
        pid: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Why claims were not turned into facts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseCounts {
    pub claims: usize,
    pub facts: usize,
    /// Datatype known but outside the allowlist, keyed by dump name.
    pub disallowed: BTreeMap<String, usize>,
    /// Datatype not recognised at all.
    pub unknown_datatype: usize,
    pub deprecated: usize,
    pub no_value: usize,
    pub dropped_qualifiers: usize,
}

impl ParseCounts {
    pub fn merge(&mut self, other: &ParseCounts) {
        self.claims += other.claims;
        self.facts += other.facts;
        for (k, v) in &other.disallowed {
            *self.disallowed.entry(k.clone()).or_default() += v;
        }
        self.unknown_datatype += other.unknown_datatype;
        self.deprecated += other.deprecated;
        self.no_value += other.no_value;
        self.dropped_qualifiers += other.dropped_qualifiers;
    }
}

/// Labels of items and properties, keyed by id then language code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelIndex {
    pub labels: BTreeMap<String, BTreeMap<String, String>>,
}

impl LabelIndex {
    pub fn insert_doc(&mut self, doc: &Json) {
        if let Some(id) = doc.get("id").and_then(Json::as_str) {
            let labels = doc_labels(doc);
            if !labels.is_empty() {
                self.labels.insert(id.to_string(), labels);
            }
        }
    }

    pub fn entity(&self, qid: &str) -> Entity {
        Entity {
            qid: qid.to_string(),
            labels: self.labels.get(qid).cloned().unwrap_or_default(),
        }
    }

    /// English label of a property, falling back to its id.
    pub fn property_label(&self, pid: &str) -> String {
        self.labels
            .get(pid)
            .and_then(|l| l.get("en"))
            .cloned()
            .unwrap_or_else(|| pid.to_string())
    }
}

fn doc_labels(doc: &Json) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if let Some(map) = doc.get("labels").and_then(Json::as_object) {
        for (code, v) in map {
            let text = v.get("value").and_then(Json::as_str).or_else(|| v.as_str());
            if let Some(t) = text {
                out.insert(code.clone(), t.to_string());
            }
        }
    }
    out
}

/// Site link titles of an entity, keyed by site id (`hiwiki`, ...).
pub fn doc_sitelinks(doc: &Json) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if let Some(map) = doc.get("sitelinks").and_then(Json::as_object) {
        for (site, v) in map {
            let title = v.get("title").and_then(Json::as_str).or_else(|| v.as_str());
            if let Some(t) = title {
                out.insert(site.clone(), t.to_string());
            }
        }
    }
    out
}

/// Strips the array brackets and trailing commas used by full dumps.
fn entity_line(line: &str) -> Option<&str> {
    let t = line.trim();
    let t = t.strip_suffix(',').unwrap_or(t);
    if t.is_empty() || t == "[" || t == "]" {
        None
    } else {
        Some(t)
    }
}

/// Parses every entity document of a dump stream.
pub fn read_entity_docs(input: impl BufRead) -> Result<Vec<Json>, EntityDumpError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if let Some(t) = entity_line(&line) {
            let doc: Json = serde_json::from_str(t).map_err(|source| EntityDumpError::Json {
                line: i + 1,
                source,
            })?;
            if doc.get("id").and_then(Json::as_str).is_none() {
                return Err(EntityDumpError::MissingId { line: i + 1 });
            }
            out.push(doc);
        }
    }
    Ok(out)
}

fn schema(entity: &str, pid: &str, message: impl Into<String>) -> EntityDumpError {
    EntityDumpError::Schema {
        entity: entity.to_string(),
        pid: pid.to_string(),
        message: message.into(),
    }
}

enum SnakOutcome {
    Value(Value),
    NoValue,
    Unknown,
    Disallowed(String),
}

fn entity_id_from_url(url: &str) -> Option<&str> {
    let id = url.rsplit('/').next()?;
    Entity::is_valid_qid(id).then_some(id)
}

fn parse_snak(
    snak: &Json,
    entity: &str,
    pid: &str,
    allowlist: &BTreeSet<Datatype>,
    labels: &LabelIndex,
) -> Result<SnakOutcome, EntityDumpError> {
    let obj = snak
        .as_object()
        .ok_or_else(|| schema(entity, pid, "snak is not an object"))?;
    match obj.get("snaktype").and_then(Json::as_str) {
        Some("value") => {}
        Some("somevalue") | Some("novalue") => return Ok(SnakOutcome::NoValue),
        other => return Err(schema(entity, pid, format!("bad snaktype {other:?}"))),
    }
    let dtname = obj
        .get("datatype")
        .and_then(Json::as_str)
        .ok_or_else(|| schema(entity, pid, "snak has no datatype"))?;
    let Some(dt) = Datatype::from_dump_name(dtname) else {
        return Ok(if KNOWN_OTHER_DATATYPES.contains(&dtname) {
            SnakOutcome::Disallowed(dtname.to_string())
        } else {
            SnakOutcome::Unknown
        });
    };
    if !allowlist.contains(&dt) {
        return Ok(SnakOutcome::Disallowed(dtname.to_string()));
    }
    let value = obj
        .get("datavalue")
        .and_then(|d| d.get("value"))
        .ok_or_else(|| schema(entity, pid, "snak has no datavalue"))?;
    let field = |name: &str| -> Result<&str, EntityDumpError> {
        value
            .get(name)
            .and_then(Json::as_str)
            .ok_or_else(|| schema(entity, pid, format!("{dtname} value lacks {name}")))
    };
    let v = match dt {
        Datatype::WikibaseItem => {
            let id = match value.get("id").and_then(Json::as_str) {
                Some(id) => id.to_string(),
                None => value
                    .get("numeric-id")
                    .and_then(Json::as_u64)
                    .map(|n| format!("Q{n}"))
                    .ok_or_else(|| schema(entity, pid, "item value lacks id"))?,
            };
            if !Entity::is_valid_qid(&id) {
                return Err(schema(entity, pid, format!("bad item id {id:?}")));
            }
            Value::Item {
                entity: labels.entity(&id),
            }
        }
        Datatype::Time => {
            let precision = value
                .get("precision")
                .and_then(Json::as_u64)
                .and_then(|p| u8::try_from(p).ok())
                .ok_or_else(|| schema(entity, pid, "time value lacks precision"))?;
            Value::Time {
                time: field("time")?.to_string(),
                precision,
                calendar: value
                    .get("calendarmodel")
                    .and_then(Json::as_str)
                    .and_then(entity_id_from_url)
                    .map(String::from),
            }
        }
        Datatype::Quantity => {
            let unit = value
                .get("unit")
                .and_then(Json::as_str)
                .and_then(entity_id_from_url)
                .map(|q| labels.entity(q));
            Value::Quantity {
                amount: field("amount")?.to_string(),
                unit,
            }
        }
        Datatype::Monolingualtext => Value::Monotext {
            text: field("text")?.to_string(),
            language: field("language")?.to_string(),
        },
    };
    Ok(SnakOutcome::Value(v))
}

/// Datatype names that exist in dumps but have no representation here.
const KNOWN_OTHER_DATATYPES: [&str; 12] = [
    "external-id",
    "string",
    "url",
    "commonsMedia",
    "globe-coordinate",
    "wikibase-property",
    "wikibase-lexeme",
    "wikibase-form",
    "wikibase-sense",
    "math",
    "musical-notation",
    "geo-shape",
];

/// Facts of one entity document, in claim order (properties sorted by id).
///
/// Qualifiers are kept when their value is one of the four representable
/// types, whatever the allowlist says; others are dropped and counted.
pub fn parse_entity_facts(
    doc: &Json,
    allowlist: &BTreeSet<Datatype>,
    labels: &LabelIndex,
) -> Result<(Vec<Fact>, ParseCounts), EntityDumpError> {
    let qid = doc.get("id").and_then(Json::as_str).unwrap_or_default();
    let mut counts = ParseCounts::default();
    let mut facts = Vec::new();
    let subject = Entity {
        qid: qid.to_string(),
        labels: doc_labels(doc),
    };
    let Some(claims) = doc.get("claims") else {
        return Ok((facts, counts));
    };
    let claims = claims
        .as_object()
        .ok_or_else(|| schema(qid, "-", "claims is not an object"))?;
    let every_type: BTreeSet<Datatype> = Datatype::ALL.into_iter().collect();
    for (pid, list) in claims {
        let list = list
            .as_array()
            .ok_or_else(|| schema(qid, pid, "claim list is not an array"))?;
        for claim in list {
            counts.claims += 1;
            if claim.get("rank").and_then(Json::as_str) == Some("deprecated") {
                counts.deprecated += 1;
                continue;
            }
            let snak = claim
                .get("mainsnak")
                .ok_or_else(|| schema(qid, pid, "claim has no mainsnak"))?;
            let object = match parse_snak(snak, qid, pid, allowlist, labels)? {
                SnakOutcome::Value(v) => v,
                SnakOutcome::NoValue => {
                    counts.no_value += 1;
                    continue;
                }
                SnakOutcome::Unknown => {
                    counts.unknown_datatype += 1;
                    continue;
                }
                SnakOutcome::Disallowed(name) => {
                    *counts.disallowed.entry(name).or_default() += 1;
                    continue;
                }
            };
            let mut qualifiers = Vec::new();
            if let Some(qmap) = claim.get("qualifiers").and_then(Json::as_object) {
                for (qpid, snaks) in qmap {
                    let snaks = snaks
                        .as_array()
                        .ok_or_else(|| schema(qid, qpid, "qualifier list is not an array"))?;
                    for qs in snaks {
                        match parse_snak(qs, qid, qpid, &every_type, labels)? {
                            SnakOutcome::Value(value) => qualifiers.push(Qualifier {
                                predicate: Predicate {
                                    pid: qpid.clone(),
                                    label: labels.property_label(qpid),
                                },
                                value,
                            }),
                            _ => {
                                log::warn!("{qid} {pid}: dropping qualifier {qpid}");
                                counts.dropped_qualifiers += 1;
                            }
                        }
                    }
                }
            }
            facts.push(Fact {
                subject: subject.clone(),
                predicate: Predicate {
                    pid: pid.clone(),
                    label: labels.property_label(pid),
                },
                object,
                qualifiers,
            });
            counts.facts += 1;
        }
    }
    Ok((facts, counts))
}

/// Everything extracted from an entity dump.
#[derive(Clone, Debug, Default)]
pub struct FactStore {
    pub facts: Vec<Fact>,
    pub counts: ParseCounts,
    /// `(site, title)` to Q-id, from the sitelinks of every item.
    pub sitelinks: BTreeMap<(String, String), String>,
    pub labels: LabelIndex,
}

impl FactStore {
    /// Title to Q-id map for one wiki (`enwiki`, `hiwiki`, ...).
    pub fn titles_for(&self, site: &str) -> BTreeMap<String, String> {
        self.sitelinks
            .iter()
            .filter(|((s, _), _)| s == site)
            .map(|((_, t), q)| (t.clone(), q.clone()))
            .collect()
    }
}

/// Builds facts for every item of the dump. When `subjects` is given, only
/// those items contribute facts (all entities still contribute labels).
pub fn build_fact_store(
    docs: &[Json],
    allowlist: &BTreeSet<Datatype>,
    subjects: Option<&BTreeSet<String>>,
) -> Result<FactStore, EntityDumpError> {
    let mut store = FactStore::default();
    for d in docs {
        store.labels.insert_doc(d);
    }
    for d in docs {
        let id = d.get("id").and_then(Json::as_str).unwrap_or_default();
        if !Entity::is_valid_qid(id) {
            continue;
        }
        for (site, title) in doc_sitelinks(d) {
            store.sitelinks.insert((site, title), id.to_string());
        }
        if subjects.is_some_and(|s| !s.contains(id)) {
            continue;
        }
        let (facts, counts) = parse_entity_facts(d, allowlist, &store.labels)?;
        store.facts.extend(facts);
        store.counts.merge(&counts);
    }
    Ok(store)
}
