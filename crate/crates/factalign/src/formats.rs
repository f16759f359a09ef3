//! JSON-lines readers and writers for every pipeline artifact.
//!
//! Writers check each record by parsing the serialized line back into the
//! record type before emitting it; readers report the failing line number.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use factalign_core::facts::{Entity, Fact, Predicate, Qualifier, Value};
use factalign_core::filter::RejectReason;
use factalign_core::stage2::PairLabel;
use factalign_core::{Language, Sentence};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record does not survive a serialization round trip: {0}")]
    RoundTrip(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Opens a file for reading, transparently decompressing `.bz2` and `.gz`.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead + Send>, FormatError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader: Box<dyn Read + Send> = match path.extension().and_then(|e| e.to_str()) {
        Some("bz2") => Box::new(bzip2::read::MultiBzDecoder::new(file)),
        Some("gz") => Box::new(flate2::read::MultiGzDecoder::new(file)),
        _ => Box::new(file),
    };
    Ok(Box::new(BufReader::with_capacity(1 << 16, reader)))
}

/// Serializes one record to a single JSON line, verifying that the line
/// parses back to an equal record.
pub fn to_line<T>(record: &T) -> Result<String, FormatError>
where
    T: Serialize + DeserializeOwned + PartialEq,
{
    let line = serde_json::to_string(record).map_err(|e| FormatError::RoundTrip(e.to_string()))?;
    let back: T = serde_json::from_str(&line).map_err(|e| FormatError::RoundTrip(e.to_string()))?;
    if &back != record {
        return Err(FormatError::RoundTrip(line));
    }
    Ok(line)
}

pub fn write_jsonl<T, W>(mut out: W, records: &[T]) -> Result<(), FormatError>
where
    T: Serialize + DeserializeOwned + PartialEq,
    W: Write,
{
    for r in records {
        let line = to_line(r)?;
        writeln!(out, "{line}").map_err(io_err(Path::new("<output>")))?;
    }
    out.flush().map_err(io_err(Path::new("<output>")))
}

pub fn write_jsonl_file<T>(path: &Path, records: &[T]) -> Result<(), FormatError>
where
    T: Serialize + DeserializeOwned + PartialEq,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    write_jsonl(BufWriter::new(file), records).map_err(|e| match e {
        FormatError::Io { source, .. } => FormatError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead, name: &str) -> Result<Vec<T>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| FormatError::Io {
            path: name.into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| FormatError::Json {
            path: name.into(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    read_jsonl(open_input(path)?, &path.display().to_string())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| FormatError::RoundTrip(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// A rejected sentence and the rule that rejected it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRecord {
    #[serde(flatten)]
    pub sentence: Sentence,
    pub reason: RejectReason,
}

/// Flat on-disk form of a [`Fact`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactRecord {
    pub subject_qid: String,
    pub pid: String,
    pub predicate_label: String,
    pub object: Value,
    #[serde(default)]
    pub qualifiers: Vec<Qualifier>,
    /// Subject labels keyed by language code.
    #[serde(default)]
    pub labels: std::collections::BTreeMap<String, String>,
}

impl From<&Fact> for FactRecord {
    fn from(f: &Fact) -> Self {
        FactRecord {
            subject_qid: f.subject.qid.clone(),
            pid: f.predicate.pid.clone(),
            predicate_label: f.predicate.label.clone(),
            object: f.object.clone(),
            qualifiers: f.qualifiers.clone(),
            labels: f.subject.labels.clone(),
        }
    }
}

impl From<FactRecord> for Fact {
    fn from(r: FactRecord) -> Self {
        Fact {
            subject: Entity {
                qid: r.subject_qid,
                labels: r.labels,
            },
            predicate: Predicate {
                pid: r.pid,
                label: r.predicate_label,
            },
            object: r.object,
            qualifiers: r.qualifiers,
        }
    }
}

/// One training or validation line of the distant-supervision dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair_text: String,
    pub label: PairLabel,
}

/// Reference translation of one sentence, used when creating annotation tasks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub page_id: String,
    pub ordinal: u32,
    pub translation: String,
}

/// Expert answer for one sentence: the fact ids it expresses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub page_id: String,
    pub ordinal: u32,
    pub facts: Vec<String>,
}

/// Predicted or gold fact ids of one instance, for `eval f1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactSetRecord {
    pub id: String,
    pub language: Language,
    pub facts: Vec<String>,
}
