//! Sentence pruning: wrong language, bad length, no content word.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::lang::Language;
use crate::providers::{ContentTagger, LanguageDetector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RejectReason {
    WrongLanguage,
    TooShort,
    TooLong,
    NoContentWord,
}

/// Inclusive token-count range a sentence must fall in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for LengthBounds {
    fn default() -> Self {
        LengthBounds {
            min_tokens: 5,
            max_tokens: 100,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: Vec<Sentence>,
    pub rejected: Vec<(Sentence, RejectReason)>,
}

impl FilterReport {
    pub fn count(&self, reason: RejectReason) -> usize {
        self.rejected.iter().filter(|(_, r)| *r == reason).count()
    }
}

/// Whether the detected language is acceptable for a page in `expected`.
/// Languages sharing a script are not told apart here, so a Marathi page
/// accepts text the detector labels as Hindi.
fn language_matches(detected: Language, expected: Language) -> bool {
    detected == expected || detected.script() == expected.script()
}

/// First failing rule for one sentence, checked in the order language,
/// length, content.
pub fn check_sentence(
    sentence: &Sentence,
    expected: Language,
    bounds: LengthBounds,
    detector: &dyn LanguageDetector,
    tagger: &dyn ContentTagger,
) -> Option<RejectReason> {
    if !language_matches(detector.detect(&sentence.text).language, expected) {
        return Some(RejectReason::WrongLanguage);
    }
    let n = sentence.token_count();
    if n < bounds.min_tokens {
        return Some(RejectReason::TooShort);
    }
    if n > bounds.max_tokens {
        return Some(RejectReason::TooLong);
    }
    if !tagger.has_content_word(&sentence.text, expected) {
        return Some(RejectReason::NoContentWord);
    }
    None
}

/// Partitions `sentences` into kept and rejected, preserving input order in
/// both lists.
pub fn filter_sentences(
    sentences: Vec<Sentence>,
    expected: Language,
    bounds: LengthBounds,
    detector: &dyn LanguageDetector,
    tagger: &dyn ContentTagger,
) -> FilterReport {
    let mut report = FilterReport::default();
    for s in sentences {
        match check_sentence(&s, expected, bounds, detector, tagger) {
            None => report.kept.push(s),
            Some(r) => report.rejected.push((s, r)),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::ScriptDetector;
    use alloc::string::String;
    use alloc::vec;

    struct AnyWord;
    impl ContentTagger for AnyWord {
        fn has_content_word(&self, text: &str, _: Language) -> bool {
            !text.trim().is_empty()
        }
    }

    struct Never;
    impl ContentTagger for Never {
        fn has_content_word(&self, _: &str, _: Language) -> bool {
            false
        }
    }

    fn sent(text: String, lang: Language) -> Sentence {
        Sentence {
            text,
            language: lang,
            section: String::new(),
            page_id: "p".into(),
            entity_id: "Q1".into(),
            ordinal: 0,
        }
    }

    fn hi_tokens(n: usize) -> String {
        vec!["शब्द"; n].join(" ")
    }

    #[test]
    fn length_boundaries() {
        let input = vec![
            sent(hi_tokens(4), Language::Hi),
            sent(hi_tokens(5), Language::Hi),
            sent(hi_tokens(100), Language::Hi),
            sent(hi_tokens(101), Language::Hi),
        ];
        let r = filter_sentences(input, Language::Hi, LengthBounds::default(), &ScriptDetector, &AnyWord);
        assert_eq!(r.kept.len(), 2);
        assert_eq!(r.kept[0].token_count(), 5);
        assert_eq!(r.kept[1].token_count(), 100);
        assert_eq!(r.rejected[0].1, RejectReason::TooShort);
        assert_eq!(r.rejected[1].1, RejectReason::TooLong);
    }

    #[test]
    fn wrong_language_comes_first() {
        let input = vec![sent("He is here.".into(), Language::Hi)];
        let r = filter_sentences(input, Language::Hi, LengthBounds::default(), &ScriptDetector, &Never);
        assert_eq!(r.rejected[0].1, RejectReason::WrongLanguage);
    }

    #[test]
    fn devanagari_accepted_for_marathi() {
        let input = vec![sent(hi_tokens(6), Language::Mr)];
        let r = filter_sentences(input, Language::Mr, LengthBounds::default(), &ScriptDetector, &AnyWord);
        assert_eq!(r.kept.len(), 1);
    }

    #[test]
    fn content_rule() {
        let input = vec![sent(hi_tokens(6), Language::Hi)];
        let r = filter_sentences(input, Language::Hi, LengthBounds::default(), &ScriptDetector, &Never);
        assert_eq!(r.count(RejectReason::NoContentWord), 1);
    }
}
