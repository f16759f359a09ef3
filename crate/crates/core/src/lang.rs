use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// The eight languages the pipeline handles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Hi,
    Mr,
    Bn,
    Te,
    Ta,
    Gu,
    Kn,
}

/// Writing systems used by [`Language`]s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Script {
    Latin,
    Devanagari,
    Bengali,
    Telugu,
    Tamil,
    Gujarati,
    Kannada,
}

impl Script {
    pub const ALL: [Script; 7] = [
        Script::Latin,
        Script::Devanagari,
        Script::Bengali,
        Script::Telugu,
        Script::Tamil,
        Script::Gujarati,
        Script::Kannada,
    ];

    /// Script of a single character, if it is a letter or combining mark of
    /// one of the supported scripts.
    pub fn of(c: char) -> Option<Script> {
        match c as u32 {
            0x0041..=0x005A | 0x0061..=0x007A | 0x00C0..=0x024F => Some(Script::Latin),
            0x0900..=0x097F | 0xA8E0..=0xA8FF => Some(Script::Devanagari),
            0x0980..=0x09FF => Some(Script::Bengali),
            0x0A80..=0x0AFF => Some(Script::Gujarati),
            0x0B80..=0x0BFF => Some(Script::Tamil),
            0x0C00..=0x0C7F => Some(Script::Telugu),
            0x0C80..=0x0CFF => Some(Script::Kannada),
            _ => None,
        }
    }

    /// Language reported for text written in this script. Devanagari maps to
    /// Hindi; telling Hindi from Marathi is left to the caller.
    pub fn default_language(self) -> Language {
        match self {
            Script::Latin => Language::En,
            Script::Devanagari => Language::Hi,
            Script::Bengali => Language::Bn,
            Script::Telugu => Language::Te,
            Script::Tamil => Language::Ta,
            Script::Gujarati => Language::Gu,
            Script::Kannada => Language::Kn,
        }
    }
}

impl Language {
    pub const ALL: [Language; 8] = [
        Language::En,
        Language::Hi,
        Language::Mr,
        Language::Bn,
        Language::Te,
        Language::Ta,
        Language::Gu,
        Language::Kn,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Hi => "hi",
            Language::Mr => "mr",
            Language::Bn => "bn",
            Language::Te => "te",
            Language::Ta => "ta",
            Language::Gu => "gu",
            Language::Kn => "kn",
        }
    }

    pub fn script(self) -> Script {
        match self {
            Language::En => Script::Latin,
            Language::Hi | Language::Mr => Script::Devanagari,
            Language::Bn => Script::Bengali,
            Language::Te => Script::Telugu,
            Language::Ta => Script::Tamil,
            Language::Gu => Script::Gujarati,
            Language::Kn => Script::Kannada,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unsupported language code {0:?}")]
pub struct UnknownLanguage(pub alloc::string::String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Language::ALL
            .into_iter()
            .find(|l| l.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownLanguage(s.into()))
    }
}
