//! Streaming reader for MediaWiki XML export dumps.

use std::collections::BTreeMap;
use std::io::BufRead;

use quick_xml::events::Event;
use quick_xml::Reader;
use factalign_core::wikitext::{split_sections, strip_markup};
use factalign_core::{Language, WikiPage};

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("page ending at byte {offset} has no {field}")]
    MissingField { offset: u64, field: &'static str },
}

/// Counters kept while streaming a dump.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DumpStats {
    pub pages_seen: usize,
    pub redirects: usize,
    pub other_namespace: usize,
    pub markup_failures: usize,
    pub emitted: usize,
}

#[derive(Default)]
struct RawPage {
    title: Option<String>,
    ns: Option<String>,
    id: Option<String>,
    redirect: bool,
    text: String,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    None,
    Title,
    Ns,
    Id,
    Text,
}

/// Iterator over the article pages of a dump.
///
/// Redirects and pages outside the main namespace are skipped. Pages whose
/// markup cannot be stripped are skipped with a warning. An XML error ends
/// the stream after being yielded once.
pub struct PageReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    language: Language,
    titles: Option<BTreeMap<String, String>>,
    stats: DumpStats,
    done: bool,
}

pub fn extract_pages<R: BufRead>(input: R, language: Language) -> PageReader<R> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(false);
    PageReader {
        reader,
        buf: Vec::with_capacity(1 << 14),
        language,
        titles: None,
        stats: DumpStats::default(),
        done: false,
    }
}

impl<R: BufRead> PageReader<R> {
    /// Attaches entity ids to pages through a title to Q-id map.
    pub fn with_titles(mut self, titles: BTreeMap<String, String>) -> Self {
        self.titles = Some(titles);
        self
    }

    pub fn stats(&self) -> DumpStats {
        self.stats
    }

    fn xml_error(&self, message: impl ToString) -> DumpError {
        DumpError::Xml {
            offset: self.reader.error_position(),
            message: message.to_string(),
        }
    }

    fn next_raw(&mut self) -> Result<Option<RawPage>, DumpError> {
        let mut page: Option<RawPage> = None;
        let mut field = Field::None;
        // depth inside <page>: 1 for direct children, 2 inside <revision>
        let mut depth = 0usize;
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(e) => e,
                Err(e) => {
                    return Err(DumpError::Xml {
                        offset: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            };
            match event {
                Event::Start(e) => {
                    let name = e.local_name();
                    let name = name.as_ref();
                    if name == b"page" {
                        page = Some(RawPage::default());
                        depth = 0;
                        continue;
                    }
                    if page.is_none() {
                        continue;
                    }
                    depth += 1;
                    field = match (depth, name) {
                        (1, b"title") => Field::Title,
                        (1, b"ns") => Field::Ns,
                        (1, b"id") => Field::Id,
                        (2, b"text") => Field::Text,
                        _ => Field::None,
                    };
                }
                Event::Empty(e) => {
                    if let Some(p) = page.as_mut() {
                        if e.local_name().as_ref() == b"redirect" {
                            p.redirect = true;
                        }
                    }
                }
                Event::End(e) => {
                    if e.local_name().as_ref() == b"page" {
                        if let Some(p) = page.take() {
                            return Ok(Some(p));
                        }
                        continue;
                    }
                    if page.is_some() {
                        depth = depth.saturating_sub(1);
                        field = Field::None;
                    }
                }
                Event::Text(t) => {
                    if let Some(p) = page.as_mut() {
                        if field != Field::None {
                            match t.unescape() {
                                Ok(text) => p.push(field, &text),
                                Err(e) => {
                                    let message = e.to_string();
                                    return Err(DumpError::Xml {
                                        offset: self.reader.buffer_position(),
                                        message,
                                    });
                                }
                            }
                        }
                    }
                }
                Event::CData(t) => {
                    if let Some(p) = page.as_mut() {
                        if field != Field::None {
                            let text = String::from_utf8_lossy(&t).into_owned();
                            p.push(field, &text);
                        }
                    }
                }
                Event::Eof => {
                    if page.is_some() {
                        return Err(self.xml_error("unexpected end of input inside <page>"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }

    fn build(&mut self, raw: RawPage) -> Result<Option<WikiPage>, DumpError> {
        let offset = self.reader.buffer_position();
        self.stats.pages_seen += 1;
        let title = raw.title.ok_or(DumpError::MissingField {
            offset,
            field: "title",
        })?;
        if raw.redirect {
            self.stats.redirects += 1;
            return Ok(None);
        }
        if raw.ns.as_deref().map(str::trim).unwrap_or("0") != "0" {
            self.stats.other_namespace += 1;
            return Ok(None);
        }
        let page_id = raw.id.ok_or(DumpError::MissingField { offset, field: "id" })?;
        let plain = match strip_markup(&raw.text) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("skipping page {page_id} ({title}): {e}");
                self.stats.markup_failures += 1;
                return Ok(None);
            }
        };
        let entity_id = self.titles.as_ref().and_then(|t| t.get(&title).cloned());
        self.stats.emitted += 1;
        Ok(Some(WikiPage {
            page_id: page_id.trim().to_string(),
            entity_id,
            language: self.language,
            title,
            sections: split_sections(&plain),
        }))
    }
}

impl RawPage {
    fn push(&mut self, field: Field, text: &str) {
        let slot = match field {
            Field::Title => self.title.get_or_insert_with(String::new),
            Field::Ns => self.ns.get_or_insert_with(String::new),
            Field::Id => self.id.get_or_insert_with(String::new),
            Field::Text => &mut self.text,
            Field::None => return,
        };
        slot.push_str(text);
    }
}

impl<R: BufRead> Iterator for PageReader<R> {
    type Item = Result<WikiPage, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let raw = match self.next_raw() {
                Ok(Some(r)) => r,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            match self.build(raw) {
                Ok(Some(p)) => return Some(Ok(p)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
        None
    }
}
