//! Declarative pipeline configuration (TOML) with environment overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use factalign_core::filter::LengthBounds;
use factalign_core::stage2::{DistantConfig, DEFAULT_CLASSIFIER_CUTOFF};
use factalign_core::{Language, Stage1Config};

use crate::annotation::ServiceConfig;

/// Environment variables that override provider endpoints and the admin token.
pub const ENV_OVERRIDES: [(&str, &str); 5] = [
    ("FACTALIGN_EMBEDDING_URL", "providers.embedding"),
    ("FACTALIGN_TRANSLATION_URL", "providers.translation"),
    ("FACTALIGN_NLI_URL", "providers.entailment"),
    ("FACTALIGN_CLASSIFIER_URL", "providers.classifier"),
    ("FACTALIGN_ADMIN_TOKEN", "annotation.admin_token"),
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub languages: Vec<Language>,
    /// Required by commands that sample.
    #[serde(default)]
    pub seed: Option<u64>,
    pub paths: Paths,
    #[serde(default)]
    pub stage1: Stage1Config,
    #[serde(default)]
    pub stage2: Stage2Settings,
    #[serde(default)]
    pub filter: FilterSettings,
    #[serde(default)]
    pub distant: DistantSettings,
    #[serde(default)]
    pub providers: ProviderSettings,
    #[serde(default)]
    pub annotation: AnnotationSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// XML dump per language.
    #[serde(default)]
    pub dumps: BTreeMap<Language, PathBuf>,
    #[serde(default)]
    pub entity_dump: Option<PathBuf>,
    /// Tab-separated `language word TAG` lines for the content filter.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    /// Phrase table used when `providers.translation = "glossary"`.
    #[serde(default)]
    pub glossary: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    #[default]
    Entailment,
    Classifier,
    Overlap,
}

impl std::str::FromStr for Selector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "entailment" => Ok(Selector::Entailment),
            "classifier" => Ok(Selector::Classifier),
            "overlap" => Ok(Selector::Overlap),
            other => Err(format!("unknown selector {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage2Settings {
    pub selector: Selector,
    /// Probability cutoff for the classifier, overlap threshold for the
    /// overlap baseline.
    pub cutoff: f64,
}

impl Default for Stage2Settings {
    fn default() -> Self {
        Stage2Settings {
            selector: Selector::Entailment,
            cutoff: DEFAULT_CLASSIFIER_CUTOFF,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSettings {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for FilterSettings {
    fn default() -> Self {
        let b = LengthBounds::default();
        FilterSettings {
            min_tokens: b.min_tokens,
            max_tokens: b.max_tokens,
        }
    }
}

impl FilterSettings {
    pub fn bounds(&self) -> LengthBounds {
        LengthBounds {
            min_tokens: self.min_tokens,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistantSettings {
    pub skip_top: usize,
    pub pool_size: usize,
    pub train_fraction: f64,
}

impl Default for DistantSettings {
    fn default() -> Self {
        let d = DistantConfig::with_seed(0);
        DistantSettings {
            skip_top: d.skip_top,
            pool_size: d.pool_size,
            train_fraction: d.train_fraction,
        }
    }
}

impl DistantSettings {
    pub fn with_seed(&self, seed: u64) -> DistantConfig {
        DistantConfig {
            seed,
            skip_top: self.skip_top,
            pool_size: self.pool_size,
            train_fraction: self.train_fraction,
        }
    }
}

/// `"mock"` or an http(s) base URL per provider; translation also accepts
/// `"glossary"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSettings {
    pub embedding: String,
    pub embedding_dim: usize,
    pub translation: String,
    pub entailment: String,
    pub classifier: String,
    pub timeout_secs: u64,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            embedding: "mock".into(),
            embedding_dim: 64,
            translation: "mock".into(),
            entailment: "mock".into(),
            classifier: "mock".into(),
            timeout_secs: 30,
        }
    }
}

impl ProviderSettings {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationSettings {
    pub bind: String,
    #[serde(flatten)]
    pub service: ServiceConfig,
}

impl Default for AnnotationSettings {
    fn default() -> Self {
        AnnotationSettings {
            bind: "127.0.0.1:8080".into(),
            service: ServiceConfig::default(),
        }
    }
}

fn endpoint_ok(s: &str) -> bool {
    s == "mock" || s.starts_with("http://") || s.starts_with("https://")
}

impl PipelineConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.into(),
            source,
        })
    }

    /// Loads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in self.paths.dumps.values_mut() {
            fix(p);
        }
        if let Some(p) = self.paths.entity_dump.as_mut() {
            fix(p);
        }
        if let Some(p) = self.paths.lexicon.as_mut() {
            fix(p);
        }
        if let Some(p) = self.paths.glossary.as_mut() {
            fix(p);
        }
        fix(&mut self.paths.output_dir);
        if let Some(p) = self.annotation.service.event_log.as_mut() {
            fix(p);
        }
    }

    /// Applies overrides from a variable lookup (the process environment in
    /// production).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        for (var, _) in ENV_OVERRIDES {
            if let Some(v) = lookup(var) {
                match var {
                    "FACTALIGN_EMBEDDING_URL" => self.providers.embedding = v,
                    "FACTALIGN_TRANSLATION_URL" => self.providers.translation = v,
                    "FACTALIGN_NLI_URL" => self.providers.entailment = v,
                    "FACTALIGN_CLASSIFIER_URL" => self.providers.classifier = v,
                    _ => self.annotation.service.admin_token = Some(v),
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.languages.is_empty() {
            return bad("at least one language is required".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &self.languages {
            if !seen.insert(*l) {
                return bad(format!("language {l} listed twice"));
            }
        }
        self.stage1
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.stage2.cutoff) {
            return bad(format!("stage2 cutoff {} outside [0, 1]", self.stage2.cutoff));
        }
        if self.filter.min_tokens > self.filter.max_tokens {
            return bad("filter min_tokens exceeds max_tokens".into());
        }
        if !(0.0..=1.0).contains(&self.distant.train_fraction) {
            return bad("distant train_fraction outside [0, 1]".into());
        }
        if self.distant.pool_size == 0 {
            return bad("distant pool_size must be positive".into());
        }
        let p = &self.providers;
        for (name, v) in [
            ("embedding", &p.embedding),
            ("translation", &p.translation),
            ("entailment", &p.entailment),
            ("classifier", &p.classifier),
        ] {
            if name == "translation" && v == "glossary" {
                if self.paths.glossary.is_none() {
                    return bad("translation = \"glossary\" needs paths.glossary".into());
                }
                continue;
            }
            if !endpoint_ok(v) {
                return bad(format!("provider {name} must be \"mock\" or an http(s) URL, got {v:?}"));
            }
        }
        if p.embedding_dim < factalign_core::providers::MIN_EMBEDDING_DIM {
            return bad(format!("embedding_dim must be at least {}", factalign_core::providers::MIN_EMBEDDING_DIM));
        }
        if self.annotation.service.top_n == 0 {
            return bad("annotation top_n must be positive".into());
        }
        Ok(())
    }

    /// Digest of the settings that influence outputs. Paths are reduced to
    /// file names and the admin token is left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        let name = |p: &mut PathBuf| {
            if let Some(n) = p.file_name() {
                *p = PathBuf::from(n);
            }
        };
        for p in c.paths.dumps.values_mut() {
            name(p);
        }
        if let Some(p) = c.paths.entity_dump.as_mut() {
            name(p);
        }
        if let Some(p) = c.paths.lexicon.as_mut() {
            name(p);
        }
        if let Some(p) = c.paths.glossary.as_mut() {
            name(p);
        }
        c.paths.output_dir = PathBuf::new();
        c.annotation = AnnotationSettings::default();
        let json = serde_json::to_vec(&c).expect("config serializes");
        crate::manifest::sha256_hex(&json)
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed
            .ok_or_else(|| ConfigError::Invalid("a seed is required for dataset construction".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
languages = ["hi", "en"]
seed = 3
[paths]
output_dir = "out"
dumps = { hi = "hi.xml" }
"#;

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::from_toml(MINIMAL, "t").unwrap();
        c.validate().unwrap();
        assert_eq!(c.stage1, Stage1Config::default());
        assert_eq!(c.stage2.selector, Selector::Entailment);
        assert_eq!(c.annotation.service.golden_quota, 60);
        assert_eq!(c.annotation.service.top_n, 4);
        assert_eq!(c.providers.embedding, "mock");
    }

    #[test]
    fn env_overrides_endpoints() {
        let mut c = PipelineConfig::from_toml(MINIMAL, "t").unwrap();
        c.apply_env(|k| (k == "FACTALIGN_NLI_URL").then(|| "http://nli:9000".to_string()));
        assert_eq!(c.providers.entailment, "http://nli:9000");
        assert_eq!(c.providers.embedding, "mock");
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = PipelineConfig::from_toml(MINIMAL, "t").unwrap();
        c.stage1.weights = [0.5, 0.5, 0.5, 0.5];
        assert!(c.validate().is_err());
        let bad_lang = MINIMAL.replace("\"en\"", "\"fr\"");
        assert!(PipelineConfig::from_toml(&bad_lang, "t").is_err());
        let unknown = format!("{MINIMAL}\n[stage3]\nx = 1\n");
        assert!(PipelineConfig::from_toml(&unknown, "t").is_err());
    }
}
