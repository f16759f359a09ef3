//! Offline phrase-table translator.
//!
//! Lines are `source<TAB>target<TAB>source phrase<TAB>target phrase`; `#`
//! starts a comment. Translation replaces the longest matching phrase at
//! each position, left to right, and keeps unmatched tokens as they are.
//! Matching ignores case and surrounding punctuation.

use std::collections::BTreeMap;
use std::path::Path;

use factalign_core::providers::{ProviderError, TranslationProvider};
use factalign_core::Language;

#[derive(Clone, Debug, Default)]
pub struct GlossaryTranslator {
    // (source, target) -> phrase tokens -> replacement
    tables: BTreeMap<(Language, Language), BTreeMap<Vec<String>, String>>,
    longest: usize,
}

fn norm(tok: &str) -> String {
    tok.trim_matches(|c: char| c.is_ascii_punctuation() || c == '।')
        .to_lowercase()
}

impl GlossaryTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: Language, target: Language, phrase: &str, translation: &str) {
        let key: Vec<String> = phrase.split_whitespace().map(norm).collect();
        if key.is_empty() {
            return;
        }
        self.longest = self.longest.max(key.len());
        self.tables
            .entry((source, target))
            .or_default()
            .insert(key, translation.to_string());
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut g = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').map(str::trim).collect();
            let err = || format!("line {}: expected four tab-separated fields", i + 1);
            if parts.len() != 4 {
                return Err(err());
            }
            let s: Language = parts[0].parse().map_err(|_| err())?;
            let t: Language = parts[1].parse().map_err(|_| err())?;
            g.insert(s, t, parts[2], parts[3]);
        }
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))
    }
}

impl TranslationProvider for GlossaryTranslator {
    fn translate(&self, text: &str, source: Language, target: Language) -> Result<String, ProviderError> {
        if source == target {
            return Ok(text.to_string());
        }
        let Some(table) = self.tables.get(&(source, target)) else {
            return Ok(text.to_string());
        };
        let toks: Vec<&str> = text.split_whitespace().collect();
        let keys: Vec<String> = toks.iter().map(|t| norm(t)).collect();
        let mut out: Vec<&str> = Vec::with_capacity(toks.len());
        let mut i = 0;
        while i < toks.len() {
            let mut hit = None;
            for n in (1..=self.longest.min(toks.len() - i)).rev() {
                if let Some(t) = table.get(&keys[i..i + n]) {
                    hit = Some((n, t.as_str()));
                    break;
                }
            }
            match hit {
                Some((n, t)) => {
                    out.push(t);
                    i += n;
                }
                None => {
                    out.push(toks[i]);
                    i += 1;
                }
            }
        }
        Ok(out.join(" "))
    }
}
