//! Best-effort conversion of wiki markup to plain text.
//!
//! Templates, tables, references, comments, file and category links are
//! dropped; internal and external links are replaced by their visible label.
//! Section headings (`== Heading ==`) are kept in the output so that
//! [`split_sections`] can attribute text to sections afterwards.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MarkupError {
    #[error("unterminated {construct} starting at byte {offset}")]
    Unterminated {
        construct: &'static str,
        offset: usize,
    },
}

/// Tags whose whole content is discarded.
const DROP_CONTENT_TAGS: [&str; 9] = [
    "ref",
    "gallery",
    "math",
    "timeline",
    "syntaxhighlight",
    "score",
    "references",
    "imagemap",
    "nowiki",
];

/// Link namespaces that never contribute text.
const DROP_NAMESPACES: [&str; 10] = [
    "file",
    "image",
    "media",
    "category",
    "चित्र",
    "श्रेणी",
    "वर्ग",
    "संचिका",
    "template",
    "wikipedia",
];

const ENTITIES: [(&str, &str); 9] = [
    ("&nbsp;", " "),
    ("&amp;", "&"),
    ("&lt;", "<"),
    ("&gt;", ">"),
    ("&quot;", "\""),
    ("&ndash;", "\u{2013}"),
    ("&mdash;", "\u{2014}"),
    ("&#39;", "'"),
    ("&apos;", "'"),
];

/// Strips markup from one page body.
pub fn strip_markup(src: &str) -> Result<String, MarkupError> {
    let no_comments = strip_comments(src)?;
    let no_tags = strip_tags(&no_comments);
    let no_blocks = strip_blocks(&no_tags)?;
    let linked = strip_links(&no_blocks)?;
    let mut out = String::with_capacity(linked.len());
    for line in linked.lines() {
        let line = clean_line(line);
        if !line.is_empty() {
            out.push_str(&line);
            out.push('\n');
        }
    }
    Ok(out)
}

fn strip_comments(src: &str) -> Result<String, MarkupError> {
    let mut out = String::with_capacity(src.len());
    let mut rest = src;
    let mut consumed = 0;
    while let Some(p) = rest.find("<!--") {
        out.push_str(&rest[..p]);
        match rest[p..].find("-->") {
            Some(q) => {
                consumed += p + q + 3;
                rest = &rest[p + q + 3..];
            }
            None => {
                return Err(MarkupError::Unterminated {
                    construct: "comment",
                    offset: consumed + p,
                })
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Name of the tag at the start of `s` (which begins with `<`), lowercased,
/// along with whether it is a closing tag.
fn tag_name(s: &str) -> Option<(String, bool)> {
    let inner = s.strip_prefix('<')?;
    let (closing, inner) = match inner.strip_prefix('/') {
        Some(r) => (true, r),
        None => (false, inner),
    };
    let name: String = inner
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect();
    if name.is_empty() {
        None
    } else {
        Some((name.to_ascii_lowercase(), closing))
    }
}

fn strip_tags(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    while i < src.len() {
        let rest = &src[i..];
        if !rest.starts_with('<') {
            let next = rest.find('<').unwrap_or(rest.len());
            out.push_str(&rest[..next]);
            i += next;
            continue;
        }
        let Some((name, closing)) = tag_name(rest) else {
            out.push('<');
            i += 1;
            continue;
        };
        let Some(gt) = rest.find('>') else {
            out.push_str(rest);
            break;
        };
        let self_closing = rest[..gt].ends_with('/');
        i += gt + 1;
        if !closing && !self_closing && DROP_CONTENT_TAGS.contains(&name.as_str()) {
            let close = alloc::format!("</{name}");
            let lower = src[i..].to_ascii_lowercase();
            match lower.find(&close) {
                Some(p) => {
                    let after = &src[i + p..];
                    i += p + after.find('>').map_or(after.len(), |g| g + 1);
                }
                None => i = src.len(),
            }
        }
    }
    out
}

/// Removes `{{templates}}` and `{| tables |}`, both of which may nest.
fn strip_blocks(src: &str) -> Result<String, MarkupError> {
    let bytes = src.as_bytes();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    let mut copied = 0;
    while i + 1 < bytes.len() {
        let pair = &bytes[i..i + 2];
        if pair == b"{{" || pair == b"{|" {
            out.push_str(&src[copied..i]);
            let start = i;
            let mut stack: Vec<u8> = Vec::new();
            loop {
                if i + 1 >= bytes.len() {
                    let construct = if bytes[start + 1] == b'{' {
                        "template"
                    } else {
                        "table"
                    };
                    return Err(MarkupError::Unterminated {
                        construct,
                        offset: start,
                    });
                }
                match &bytes[i..i + 2] {
                    b"{{" => {
                        stack.push(b'}');
                        i += 2;
                    }
                    b"{|" => {
                        stack.push(b'|');
                        i += 2;
                    }
                    b"}}" if stack.last() == Some(&b'}') => {
                        stack.pop();
                        i += 2;
                    }
                    b"|}" if stack.last() == Some(&b'|') => {
                        stack.pop();
                        i += 2;
                    }
                    _ => i += 1,
                }
                if stack.is_empty() {
                    break;
                }
            }
            copied = i;
        } else {
            i += 1;
        }
    }
    out.push_str(&src[copied..]);
    Ok(out)
}

fn strip_links(src: &str) -> Result<String, MarkupError> {
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    while i < src.len() {
        let rest = &src[i..];
        if rest.starts_with("[[") {
            let end = matching_close(rest).ok_or(MarkupError::Unterminated {
                construct: "link",
                offset: i,
            })?;
            out.push_str(&render_internal_link(&rest[2..end])?);
            i += end + 2;
        } else if rest.starts_with('[') && is_external(&rest[1..]) {
            match rest.find(']') {
                Some(end) => {
                    let inner = &rest[1..end];
                    if let Some((_, label)) = inner.split_once(' ') {
                        out.push_str(label.trim());
                    }
                    i += end + 1;
                }
                None => {
                    out.push('[');
                    i += 1;
                }
            }
        } else {
            let c = rest.chars().next().unwrap_or(' ');
            out.push(c);
            i += c.len_utf8();
        }
    }
    Ok(out)
}

fn is_external(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://") || s.starts_with("//")
}

/// Byte offset of the `]]` closing the `[[` at the start of `s`.
fn matching_close(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    let mut depth = 0usize;
    let mut i = 0;
    while i + 1 < b.len() {
        match &b[i..i + 2] {
            b"[[" => {
                depth += 1;
                i += 2;
            }
            b"]]" => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
                i += 2;
            }
            _ => i += 1,
        }
    }
    None
}

fn render_internal_link(inner: &str) -> Result<String, MarkupError> {
    let target = inner.split('|').next().unwrap_or("");
    if let Some((ns, _)) = target.split_once(':') {
        let ns = ns.trim().to_lowercase();
        if DROP_NAMESPACES.contains(&ns.as_str()) || is_interlanguage(&ns) {
            return Ok(String::new());
        }
    }
    match inner.split_once('|') {
        Some((_, label)) => strip_links(label),
        None => Ok(target.trim().to_string()),
    }
}

fn is_interlanguage(ns: &str) -> bool {
    (2..=3).contains(&ns.len()) && ns.chars().all(|c| c.is_ascii_lowercase())
}

fn clean_line(line: &str) -> String {
    let mut s = line.trim();
    let is_heading = s.starts_with("==");
    if !is_heading {
        s = s.trim_start_matches(['*', '#', ':', ';']);
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while !rest.is_empty() {
        if rest.starts_with("''") {
            rest = rest.trim_start_matches('\'');
            continue;
        }
        if rest.starts_with("__") {
            if let Some(end) = rest[2..].find("__") {
                let word = &rest[2..2 + end];
                if !word.is_empty() && word.chars().all(|c| c.is_ascii_uppercase()) {
                    rest = &rest[end + 4..];
                    continue;
                }
            }
        }
        if rest.starts_with('&') {
            if let Some((ent, rep)) = ENTITIES.iter().find(|(e, _)| rest.starts_with(e)) {
                out.push_str(rep);
                rest = &rest[ent.len()..];
                continue;
            }
        }
        let c = rest.chars().next().unwrap_or(' ');
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    collapse_spaces(&out)
}

fn collapse_spaces(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for (i, w) in s.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

/// Splits plain text into `(heading, body)` sections in document order.
///
/// Headings use `== Heading ==` syntax with two or more equals signs and may
/// appear inline. Text before the first heading belongs to the section with
/// an empty heading. Sections whose body is empty are omitted.
pub fn split_sections(text: &str) -> Vec<(String, String)> {
    let mut sections = Vec::new();
    let mut header = String::new();
    let mut body_start = 0;
    let mut i = 0;
    while let Some(off) = text[i..].find("==") {
        let p = i + off;
        if p > 0 && text.as_bytes()[p - 1] == b'=' {
            i = p + 1;
            continue;
        }
        let run = text[p..].bytes().take_while(|&b| b == b'=').count();
        let after = p + run;
        match heading_close(&text[after..], run) {
            Some((title, len)) => {
                push_section(&mut sections, &header, &text[body_start..p]);
                header = title.trim().to_string();
                body_start = after + len;
                i = body_start;
            }
            None => i = after,
        }
    }
    push_section(&mut sections, &header, &text[body_start..]);
    sections
}

/// Finds the closing run of exactly `run` equals signs on the same line.
/// Returns the heading text and the byte length through the closing run.
fn heading_close(s: &str, run: usize) -> Option<(&str, usize)> {
    let line_end = s.find('\n').unwrap_or(s.len());
    let line = &s[..line_end];
    let close = line.find('=')?;
    let title = &line[..close];
    if title.trim().is_empty() {
        return None;
    }
    let closing = line[close..].bytes().take_while(|&b| b == b'=').count();
    (closing == run).then_some((title, close + closing))
}

fn push_section(out: &mut Vec<(String, String)>, header: &str, body: &str) {
    let body = body.trim();
    if !body.is_empty() {
        out.push((header.to_string(), body.to_string()));
    }
}
