//! Markdown essays with embedded interpretation states.
//!
//! A paragraph that consists of nothing but one link into the
//! interpretation view (`.../txt/` or `.../txt/index.html`, with a
//! non-empty fragment) becomes an embed. Everything else is prose; runs of
//! consecutive prose blocks are merged into one section.

mod site;

use std::collections::BTreeSet;
use std::ops::Range;

use pulldown_cmark::{html, Event, HeadingLevel, Options, Parser, Tag, TagEnd};
use serde::Serialize;

use crate::state::{Fragment, ParseError};
use crate::text::Fingerprint;

pub use site::{compile_site, ArgumentManifest, CompileError, ManifestBlock, SiteOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Prose,
    Embed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockContent {
    /// Rendered HTML.
    Prose { html: String },
    /// A standalone interpretation link; `label` is the link text.
    Embed { url: String, label: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub ordinal: usize,
    /// The Markdown this block was parsed from, without trailing whitespace.
    pub source: String,
    pub content: BlockContent,
}

impl Block {
    pub fn kind(&self) -> BlockKind {
        match self.content {
            BlockContent::Prose { .. } => BlockKind::Prose,
            BlockContent::Embed { .. } => BlockKind::Embed,
        }
    }

    pub fn embed_url(&self) -> Option<&str> {
        match &self.content {
            BlockContent::Embed { url, .. } => Some(url),
            BlockContent::Prose { .. } => None,
        }
    }
}

/// An interpretation link that looked like an embed but whose fragment
/// does not parse. It is kept as an ordinary hyperlink inside the prose
/// block at `ordinal`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWarning {
    pub ordinal: usize,
    pub url: String,
    pub error: ParseError,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgumentDocument {
    pub source: String,
    /// Text of the first level-one heading, if any.
    pub title: Option<String>,
    pub blocks: Vec<Block>,
    pub warnings: Vec<ParseWarning>,
}

impl ArgumentDocument {
    pub fn embeds(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.kind() == BlockKind::Embed)
    }

    /// Re-serializes the blocks as Markdown. Embeds are written as inline
    /// links so they survive without their original reference definitions.
    pub fn to_markdown(&self) -> String {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| match &b.content {
                BlockContent::Prose { .. } => b.source.clone(),
                BlockContent::Embed { url, label } => {
                    format!("[{}](<{}>)", escape_markdown(label), escape_destination(url))
                }
            })
            .collect();
        parts.join("\n\n")
    }
}

fn escape_markdown(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_ascii_punctuation() {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn escape_destination(url: &str) -> String {
    let mut out = String::with_capacity(url.len());
    for c in url.chars() {
        if matches!(c, '<' | '>' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Returns the fragment (without `#`) if `url` points at the interpretation
/// view and carries a non-empty fragment.
pub fn interpretation_fragment(url: &str) -> Option<&str> {
    let (before, fragment) = url.split_once('#')?;
    if fragment.is_empty() {
        return None;
    }
    let path = before.split_once('?').map_or(before, |(p, _)| p);
    let targets_view = ["txt/", "txt/index.html", "./txt/", "./txt/index.html"].contains(&path)
        || path.ends_with("/txt/")
        || path.ends_with("/txt/index.html");
    targets_view.then_some(fragment)
}

struct TopBlock<'a> {
    range: Range<usize>,
    events: Vec<Event<'a>>,
}

fn top_level_blocks(markdown: &str) -> Vec<TopBlock<'_>> {
    let mut blocks = Vec::new();
    let mut depth = 0usize;
    let mut current: Option<TopBlock> = None;
    for (event, range) in Parser::new_ext(markdown, Options::empty()).into_offset_iter() {
        match &event {
            Event::Start(_) => {
                if depth == 0 {
                    current = Some(TopBlock { range: range.clone(), events: Vec::new() });
                }
                depth += 1;
            }
            Event::End(_) => depth -= 1,
            _ => {}
        }
        match current.as_mut() {
            Some(block) => {
                block.range.end = block.range.end.max(range.end);
                block.events.push(event);
            }
            None => blocks.push(TopBlock { range, events: vec![event] }),
        }
        if depth == 0 {
            if let Some(block) = current.take() {
                blocks.push(block);
            }
        }
    }
    blocks
}

/// If the block is a paragraph holding exactly one link, returns the link
/// destination and its text.
fn standalone_link(events: &[Event<'_>]) -> Option<(String, String)> {
    let [Event::Start(Tag::Paragraph), Event::Start(Tag::Link { dest_url, .. }), inner @ .., Event::End(TagEnd::Link), Event::End(TagEnd::Paragraph)] =
        events
    else {
        return None;
    };
    // A second link inside the paragraph would show up as a nested end tag.
    if inner.iter().any(|e| matches!(e, Event::End(TagEnd::Link) | Event::Start(Tag::Link { .. }))) {
        return None;
    }
    Some((dest_url.to_string(), plain_text(inner)))
}

fn plain_text(events: &[Event<'_>]) -> String {
    let mut out = String::new();
    for e in events {
        match e {
            Event::Text(t) | Event::Code(t) => out.push_str(t),
            Event::SoftBreak | Event::HardBreak => out.push(' '),
            _ => {}
        }
    }
    out
}

fn first_title(blocks: &[TopBlock<'_>]) -> Option<String> {
    blocks.iter().find_map(|b| match b.events.first() {
        Some(Event::Start(Tag::Heading { level: HeadingLevel::H1, .. })) => {
            Some(plain_text(&b.events).trim().to_string())
        }
        _ => None,
    })
}

/// Splits a Markdown essay into prose and embed blocks.
pub fn parse_argument(markdown: &str) -> ArgumentDocument {
    let top = top_level_blocks(markdown);
    let title = first_title(&top);

    let mut blocks: Vec<Block> = Vec::new();
    let mut warnings = Vec::new();
    let mut prose: Option<(Range<usize>, Vec<Event>)> = None;

    fn flush(markdown: &str, blocks: &mut Vec<Block>, prose: &mut Option<(Range<usize>, Vec<Event>)>) {
        if let Some((range, events)) = prose.take() {
            let mut html = String::new();
            html::push_html(&mut html, events.into_iter());
            blocks.push(Block {
                ordinal: blocks.len(),
                source: markdown[range].trim_end().to_string(),
                content: BlockContent::Prose { html },
            });
        }
    }

    for block in top {
        if let Some((url, label)) = standalone_link(&block.events) {
            if let Some(fragment) = interpretation_fragment(&url) {
                match Fragment::parse(&format!("#{fragment}")) {
                    Ok(_) => {
                        flush(markdown, &mut blocks, &mut prose);
                        blocks.push(Block {
                            ordinal: blocks.len(),
                            source: markdown[block.range].trim_end().to_string(),
                            content: BlockContent::Embed { url, label },
                        });
                        continue;
                    }
                    Err(mut error) => {
                        // Report positions relative to the whole URL.
                        error.position += url.split('#').next().unwrap_or("").chars().count();
                        let ordinal = blocks.len();
                        warnings.push(ParseWarning { ordinal, url, error });
                    }
                }
            }
        }
        match prose.as_mut() {
            Some((range, events)) => {
                range.end = block.range.end;
                events.extend(block.events);
            }
            None => prose = Some((block.range, block.events)),
        }
    }
    flush(markdown, &mut blocks, &mut prose);

    ArgumentDocument { source: markdown.to_string(), title, blocks, warnings }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticClass {
    Syntax,
    UnknownDocument,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub ordinal: usize,
    pub url: String,
    pub class: DiagnosticClass,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let class = match self.class {
            DiagnosticClass::Syntax => "syntax",
            DiagnosticClass::UnknownDocument => "unknown-document",
        };
        write!(f, "block {}: {class}: {} ({})", self.ordinal, self.message, self.url)
    }
}

/// Checks every embed against the known document fingerprints. Malformed
/// embed fragments found during parsing are reported as syntax problems.
pub fn validate_embeds(doc: &ArgumentDocument, known: &BTreeSet<Fingerprint>) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = doc
        .warnings
        .iter()
        .map(|w| Diagnostic {
            ordinal: w.ordinal,
            url: w.url.clone(),
            class: DiagnosticClass::Syntax,
            message: w.error.to_string(),
        })
        .collect();

    for block in doc.embeds() {
        let url = block.embed_url().expect("embed block");
        let fragment = interpretation_fragment(url).expect("embed urls target the view");
        let message = match Fragment::parse(&format!("#{fragment}")) {
            Ok(f) => match f.doc {
                Some(fp) if known.contains(&fp) => continue,
                Some(fp) => format!("no imported document has fingerprint {fp}"),
                None => "embed does not name a document (missing d=)".to_string(),
            },
            // parse_argument only creates embeds for parseable fragments.
            Err(e) => e.to_string(),
        };
        out.push(Diagnostic {
            ordinal: block.ordinal,
            url: url.to_string(),
            class: DiagnosticClass::UnknownDocument,
            message,
        });
    }
    out.sort_by_key(|d| d.ordinal);
    out
}
