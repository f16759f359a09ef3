//! Identity translator that keeps a log of every request.

use std::sync::Mutex;

use factalign_core::providers::{ProviderError, TranslationProvider};
use factalign_core::Language;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationCall {
    pub text: String,
    pub source: Language,
    pub target: Language,
}

#[derive(Debug, Default)]
pub struct RecordingTranslator {
    calls: Mutex<Vec<TranslationCall>>,
}

impl RecordingTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls(&self) -> Vec<TranslationCall> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl TranslationProvider for RecordingTranslator {
    fn translate(&self, text: &str, source: Language, target: Language) -> Result<String, ProviderError> {
        self.calls
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(TranslationCall {
                text: text.to_string(),
                source,
                target,
            });
        Ok(text.to_string())
    }
}
