//! Provider adapters speaking JSON over HTTP to user-run inference servers.
//!
//! | route          | request                        | response                 |
//! |----------------|--------------------------------|--------------------------|
//! | `/embed`       | `{text, language}`             | `{vector}`               |
//! | `/translate`   | `{text, source, target}`       | `{text}`                 |
//! | `/nli`         | `{premise, hypothesis, pair}`  | `{label, confidence}`    |
//! | `/align-score` | `{pair}`                       | `{probability}`          |
//!
//! `pair` is `premise⟨SEP⟩hypothesis`, for servers trained on that single-string form.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use ureq::Agent;
use factalign_core::providers::{
    AlignmentClassifierProvider, EmbeddingProvider, EntailmentProvider, NliLabel, NliVerdict,
    ProviderError, TranslationProvider,
};
use factalign_core::stage2::PAIR_SEPARATOR;
use factalign_core::Language;

/// Shared HTTP client bound to one base URL.
#[derive(Clone)]
pub struct HttpClient {
    agent: Agent,
    base: String,
}

impl HttpClient {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self, ProviderError> {
        if !(base_url.starts_with("http://") || base_url.starts_with("https://")) {
            return Err(ProviderError::Config(format!(
                "endpoint {base_url:?} is not an http(s) URL"
            )));
        }
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Ok(HttpClient {
            agent,
            base: base_url.trim_end_matches('/').to_string(),
        })
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, route: &str, body: &B) -> Result<T, ProviderError> {
        let url = format!("{}{}", self.base, route);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| ProviderError::Request(format!("POST {url}: {e}")))?;
        resp.body_mut()
            .read_json()
            .map_err(|e| ProviderError::Response(format!("POST {url}: {e}")))
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
    language: Language,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
}

pub struct HttpEmbedder(pub HttpClient);

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, text: &str, language: Language) -> Result<Vec<f64>, ProviderError> {
        let r: EmbedResponse = self.0.post("/embed", &EmbedRequest { text, language })?;
        let norm = r.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r.vector.len() < factalign_core::providers::MIN_EMBEDDING_DIM || norm == 0.0 || !norm.is_finite() {
            return Err(ProviderError::Response(format!(
                "unusable embedding of dimension {} and norm {norm}",
                r.vector.len()
            )));
        }
        Ok(r.vector.into_iter().map(|x| x / norm).collect())
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    text: &'a str,
    source: Language,
    target: Language,
}

#[derive(Deserialize)]
struct TranslateResponse {
    text: String,
}

pub struct HttpTranslator(pub HttpClient);

impl TranslationProvider for HttpTranslator {
    fn translate(&self, text: &str, source: Language, target: Language) -> Result<String, ProviderError> {
        if source == target {
            return Ok(text.to_string());
        }
        let r: TranslateResponse = self.0.post("/translate", &TranslateRequest { text, source, target })?;
        Ok(r.text)
    }
}

#[derive(Serialize)]
struct NliRequest<'a> {
    premise: &'a str,
    hypothesis: &'a str,
    pair: String,
}

#[derive(Deserialize)]
struct NliResponse {
    label: NliLabel,
    confidence: f64,
}

pub struct HttpEntailment(pub HttpClient);

impl EntailmentProvider for HttpEntailment {
    fn classify(&self, premise: &str, hypothesis: &str) -> Result<NliVerdict, ProviderError> {
        let pair = format!("{premise}{PAIR_SEPARATOR}{hypothesis}");
        let r: NliResponse = self.0.post("/nli", &NliRequest { premise, hypothesis, pair })?;
        if !(0.0..=1.0).contains(&r.confidence) {
            return Err(ProviderError::Response(format!("confidence {} outside [0, 1]", r.confidence)));
        }
        Ok(NliVerdict {
            label: r.label,
            confidence: r.confidence,
        })
    }
}

#[derive(Serialize)]
struct AlignRequest<'a> {
    pair: &'a str,
}

#[derive(Deserialize)]
struct AlignResponse {
    probability: f64,
}

pub struct HttpClassifier(pub HttpClient);

impl AlignmentClassifierProvider for HttpClassifier {
    fn score(&self, pair_text: &str) -> Result<f64, ProviderError> {
        let r: AlignResponse = self.0.post("/align-score", &AlignRequest { pair: pair_text })?;
        if !(0.0..=1.0).contains(&r.probability) {
            return Err(ProviderError::Response(format!(
                "probability {} outside [0, 1]",
                r.probability
            )));
        }
        Ok(r.probability)
    }
}
