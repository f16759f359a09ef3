//! Tokenization and sentence splitting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::lang::{Language, Script};

/// Number of whitespace-delimited tokens in `text`.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Characters that end a sentence unless a non-breaking prefix protects them.
pub const DEFAULT_TERMINATORS: [char; 5] = ['.', '?', '!', '\u{0964}', '\u{0965}'];

/// Closing punctuation that stays attached to the sentence it closes.
const CLOSERS: [char; 8] = ['"', '\'', ')', ']', '\u{201D}', '\u{2019}', '\u{00BB}', '}'];

const OPENERS: [char; 6] = ['"', '\'', '(', '[', '\u{201C}', '\u{2018}'];

/// True for characters that belong inside a word: alphanumerics plus every
/// code point of the supported Indic blocks except the danda marks, so that
/// viramas, nuktas and vowel signs do not break words apart.
pub fn is_word_char(c: char) -> bool {
    if c == '\u{0964}' || c == '\u{0965}' {
        return false;
    }
    c.is_alphanumeric() || Script::of(c).is_some_and(|s| s != Script::Latin)
}

/// Lowercased word terms of `text` with punctuation removed.
pub fn terms(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if is_word_char(c) {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn builtin_prefixes(lang: Language) -> &'static str {
    match lang {
        Language::En => include_str!("../data/nonbreaking_prefixes/en.txt"),
        Language::Hi => include_str!("../data/nonbreaking_prefixes/hi.txt"),
        Language::Mr => include_str!("../data/nonbreaking_prefixes/mr.txt"),
        Language::Bn => include_str!("../data/nonbreaking_prefixes/bn.txt"),
        Language::Te => include_str!("../data/nonbreaking_prefixes/te.txt"),
        Language::Ta => include_str!("../data/nonbreaking_prefixes/ta.txt"),
        Language::Gu => include_str!("../data/nonbreaking_prefixes/gu.txt"),
        Language::Kn => include_str!("../data/nonbreaking_prefixes/kn.txt"),
    }
}

/// Parses a prefix list: one entry per line, `#` starts a comment line.
pub fn parse_prefix_list(data: &str) -> impl Iterator<Item = &str> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Rule-based sentence splitter with per-language non-breaking prefixes.
///
/// A break happens after a run of terminators (plus any closing quotes or
/// brackets) that is followed by whitespace or the end of the text, unless the
/// token ending there is a registered non-breaking prefix such as `Dr.`.
/// Line breaks always end a segment.
#[derive(Clone, Debug)]
pub struct SentenceSplitter {
    terminators: Vec<char>,
    prefixes: BTreeMap<Language, BTreeSet<String>>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        let mut prefixes = BTreeMap::new();
        for lang in Language::ALL {
            let set = parse_prefix_list(builtin_prefixes(lang))
                .map(ToString::to_string)
                .collect();
            prefixes.insert(lang, set);
        }
        SentenceSplitter {
            terminators: DEFAULT_TERMINATORS.to_vec(),
            prefixes,
        }
    }
}

impl SentenceSplitter {
    /// A splitter with the given terminators and no prefixes at all.
    pub fn bare(terminators: impl IntoIterator<Item = char>) -> Self {
        SentenceSplitter {
            terminators: terminators.into_iter().collect(),
            prefixes: BTreeMap::new(),
        }
    }

    pub fn add_prefix(&mut self, lang: Language, prefix: impl Into<String>) {
        self.prefixes.entry(lang).or_default().insert(prefix.into());
    }

    pub fn add_terminator(&mut self, c: char) {
        if !self.terminators.contains(&c) {
            self.terminators.push(c);
        }
    }

    pub fn is_prefix(&self, lang: Language, token: &str) -> bool {
        self.prefixes.get(&lang).is_some_and(|s| s.contains(token))
    }

    /// Splits plain text into trimmed, non-empty sentences.
    pub fn split(&self, body: &str, lang: Language) -> Vec<String> {
        let mut out = Vec::new();
        for line in body.lines() {
            self.split_line(line, lang, &mut out);
        }
        out
    }

    fn split_line(&self, line: &str, lang: Language, out: &mut Vec<String>) {
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            let c = chars[i].1;
            if !self.terminators.contains(&c) {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < chars.len() && self.terminators.contains(&chars[j].1) {
                j += 1;
            }
            while j < chars.len() && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            let end = chars.get(j).map_or(line.len(), |&(b, _)| b);
            if at_boundary && !self.protected(&line[start..end], lang) {
                push_trimmed(out, &line[start..end]);
                start = end;
            }
            i = j;
        }
        push_trimmed(out, &line[start..]);
    }

    fn protected(&self, segment: &str, lang: Language) -> bool {
        let last = segment.split_whitespace().next_back().unwrap_or("");
        let token = last.trim_start_matches(|c| OPENERS.contains(&c));
        self.is_prefix(lang, token)
    }
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

/// Splits with the default splitter.
pub fn split_sentences(body: &str, lang: Language) -> Vec<String> {
    SentenceSplitter::default().split(body, lang)
}
