//! The human-readable fragment grammar:
//!
//! ```text
//! fragment   := "#" pair ("&" pair)*
//! pair       := "d=" hex16 | "a=" annot ("," annot)* | "g=" group (";" group)*
//!             | "o=" int ("+" int)* | "f=" int
//! annot      := encodedText "@" int [ "-" int ]
//! group      := encodedText ":" int ("+" int)*
//! ```
//!
//! Keys are written in the order d, a, g, o, f. `o` is left out when the
//! pane order is the identity and `f` when there is no focus token. When
//! parsing, keys may come in any order and unknown keys are skipped.
//! Group members and the pane order refer to annotations by their position
//! in the `a` list.

use std::fmt::Write as _;

use crate::error::RangeError;
use crate::text::{Document, Fingerprint};

use super::{
    canonical_difference, canonicalize, AbstractionGroup, Annotation, InterpretationState, TokenSpan, ValidationError,
};

const RESERVED: &[char] = &['#', '&', '=', ',', '@', ':', '+', ';', '-', '%'];

fn needs_escape(c: char) -> bool {
    RESERVED.contains(&c) || c.is_control() || c.is_whitespace() || matches!(c, '"' | '<' | '>' | '`')
}

/// Percent-encodes reserved characters, whitespace and controls; every
/// other character, including non-ASCII letters, is kept verbatim.
pub fn encode_component(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if needs_escape(c) {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                write!(out, "%{b:02X}").unwrap();
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Syntax error in a fragment; `position` counts characters from the start
/// of the fragment as given.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed fragment at character {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("fragment refers to document {found}, but the loaded document is {expected}")]
    DocumentMismatch { expected: Fingerprint, found: Fingerprint },
    #[error("fragment has content but no d= document fingerprint")]
    MissingFingerprint,
    #[error("stale state: annotation {annotation} records {recorded:?} but the document reads {actual:?}")]
    Stale { annotation: usize, recorded: String, actual: String },
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentAnnotation {
    pub text: String,
    pub span: TokenSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentGroup {
    pub name: String,
    pub members: Vec<usize>,
}

/// A syntactically valid fragment that has not yet been checked against a
/// document.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fragment {
    pub doc: Option<Fingerprint>,
    pub annotations: Vec<FragmentAnnotation>,
    pub groups: Vec<FragmentGroup>,
    pub order: Option<Vec<usize>>,
    pub focus: Option<usize>,
    /// Keys that were present but are not part of the grammar.
    pub ignored_keys: Vec<String>,
}

/// Encodes a canonical state.
pub fn encode(state: &InterpretationState) -> Result<String, ValidationError> {
    let canonical = canonicalize(state)?;
    if let Some(rule) = canonical_difference(state, &canonical) {
        return Err(ValidationError::NotCanonical(rule));
    }

    let mut out = format!("#d={}", state.doc_fingerprint);
    if !state.annotations.is_empty() {
        out.push_str("&a=");
        for (i, a) in state.annotations.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&encode_component(&a.surface));
            write!(out, "@{}", a.span.start).unwrap();
            if a.span.end != a.span.start {
                write!(out, "-{}", a.span.end).unwrap();
            }
        }
    }
    if !state.groups.is_empty() {
        out.push_str("&g=");
        for (i, g) in state.groups.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(&encode_component(&g.name));
            out.push(':');
            push_ints(&mut out, &g.member_ids);
        }
    }
    if state.pane_order.iter().enumerate().any(|(i, &id)| i != id) {
        out.push_str("&o=");
        push_ints(&mut out, &state.pane_order);
    }
    if let Some(f) = state.focus_token {
        write!(out, "&f={f}").unwrap();
    }
    Ok(out)
}

fn push_ints(out: &mut String, ints: &[usize]) {
    for (i, n) in ints.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        write!(out, "{n}").unwrap();
    }
}

/// Parses `fragment` and resolves it against `doc`.
pub fn decode(fragment: &str, doc: &Document) -> Result<InterpretationState, DecodeError> {
    Fragment::parse(fragment)?.resolve(doc)
}

/// Cursor over a slice of the fragment that remembers where the slice
/// starts, so errors can point into the original text.
#[derive(Clone, Copy)]
struct Piece<'a> {
    full: &'a str,
    offset: usize,
    text: &'a str,
}

impl<'a> Piece<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError { position: self.full[..self.offset + at].chars().count(), message: message.into() }
    }

    fn sub(&self, start: usize, end: usize) -> Piece<'a> {
        Piece { full: self.full, offset: self.offset + start, text: &self.text[start..end] }
    }

    fn split(&self, sep: char) -> impl Iterator<Item = Piece<'a>> + '_ {
        let mut start = 0;
        self.text.match_indices(sep).map(|(i, _)| i).chain(std::iter::once(self.text.len())).map(move |end| {
            let p = self.sub(start, end);
            start = end + 1;
            p
        })
    }

    /// Splits at the first `sep`.
    fn split_once(&self, sep: char) -> Option<(Piece<'a>, Piece<'a>)> {
        let i = self.text.find(sep)?;
        Some((self.sub(0, i), self.sub(i + sep.len_utf8(), self.text.len())))
    }

    fn int(&self) -> Result<usize, ParseError> {
        let t = self.text;
        if t.is_empty() {
            return Err(self.error(0, "expected an integer"));
        }
        if let Some(i) = t.find(|c: char| !c.is_ascii_digit()) {
            return Err(self.error(i, "expected a decimal digit"));
        }
        if t.len() > 1 && t.starts_with('0') {
            return Err(self.error(0, "integer has a leading zero"));
        }
        t.parse().map_err(|_| self.error(0, "integer is too large"))
    }

    fn ints(&self) -> Result<Vec<usize>, ParseError> {
        self.split('+').map(|p| p.int()).collect()
    }

    /// Percent-decodes a non-empty text component.
    fn text(&self) -> Result<String, ParseError> {
        let t = self.text;
        if t.is_empty() {
            return Err(self.error(0, "expected text"));
        }
        let mut bytes = Vec::with_capacity(t.len());
        let mut iter = t.char_indices();
        while let Some((i, c)) = iter.next() {
            if c == '%' {
                let hex = t.get(i + 1..i + 3).filter(|h| h.bytes().all(|b| b.is_ascii_hexdigit()));
                let Some(hex) = hex else {
                    return Err(self.error(i, "'%' must be followed by two hex digits"));
                };
                bytes.push(u8::from_str_radix(hex, 16).expect("checked hex"));
                iter.next();
                iter.next();
            } else if RESERVED.contains(&c) {
                return Err(self.error(i, format!("reserved character {c:?} must be percent-encoded")));
            } else {
                let mut buf = [0u8; 4];
                bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
        }
        String::from_utf8(bytes).map_err(|_| self.error(0, "percent-encoded text is not valid UTF-8"))
    }
}

impl Fragment {
    /// Parses the syntax only. An empty string or a lone `#` is an empty
    /// fragment.
    pub fn parse(fragment: &str) -> Result<Fragment, ParseError> {
        let whole = Piece { full: fragment, offset: 0, text: fragment };
        let body = match fragment.strip_prefix('#') {
            Some(_) => whole.sub(1, fragment.len()),
            None if fragment.is_empty() => whole,
            None => return Err(whole.error(0, "fragment must start with '#'")),
        };

        let mut out = Fragment::default();
        if body.text.is_empty() {
            return Ok(out);
        }
        let mut seen = Vec::new();
        for pair in body.split('&') {
            let Some((key, value)) = pair.split_once('=') else {
                return Err(pair.error(0, "expected key=value"));
            };
            if key.text.is_empty() {
                return Err(pair.error(0, "empty key"));
            }
            if seen.contains(&key.text) {
                return Err(key.error(0, format!("duplicate key {:?}", key.text)));
            }
            seen.push(key.text);
            match key.text {
                "d" => {
                    let fp = value.text.parse().map_err(|_| value.error(0, "expected 16 lowercase hex digits"))?;
                    out.doc = Some(fp);
                }
                "a" => {
                    for annot in value.split(',') {
                        out.annotations.push(parse_annotation(annot)?);
                    }
                }
                "g" => {
                    for group in value.split(';') {
                        let Some((name, members)) = group.split_once(':') else {
                            return Err(group.error(group.text.len(), "expected ':' after group name"));
                        };
                        out.groups.push(FragmentGroup { name: name.text()?, members: members.ints()? });
                    }
                }
                "o" => out.order = Some(value.ints()?),
                "f" => out.focus = Some(value.int()?),
                other => out.ignored_keys.push(other.to_string()),
            }
        }
        Ok(out)
    }

    fn has_content(&self) -> bool {
        !self.annotations.is_empty() || !self.groups.is_empty() || self.order.is_some() || self.focus.is_some()
    }

    /// Checks the fragment against `doc` and builds the canonical state.
    pub fn resolve(&self, doc: &Document) -> Result<InterpretationState, DecodeError> {
        match self.doc {
            Some(found) if found != doc.fingerprint() => {
                return Err(DecodeError::DocumentMismatch { expected: doc.fingerprint(), found });
            }
            None if self.has_content() => return Err(DecodeError::MissingFingerprint),
            _ => {}
        }

        let mut annotations = Vec::with_capacity(self.annotations.len());
        for (id, a) in self.annotations.iter().enumerate() {
            let actual = doc.slice(a.span.start, a.span.end)?;
            if actual != a.text {
                return Err(DecodeError::Stale {
                    annotation: id,
                    recorded: a.text.clone(),
                    actual: actual.to_string(),
                });
            }
            annotations.push(Annotation::new(id, a.span, actual));
        }
        if let Some(f) = self.focus {
            if f >= doc.token_count() {
                return Err(RangeError::TokenIndex { index: f, count: doc.token_count() }.into());
            }
        }

        let state = InterpretationState {
            doc_fingerprint: doc.fingerprint(),
            annotations,
            groups: self
                .groups
                .iter()
                .map(|g| AbstractionGroup::new(g.name.clone(), g.members.iter().copied()))
                .collect(),
            pane_order: match &self.order {
                Some(order) => order.clone(),
                None => (0..self.annotations.len()).collect(),
            },
            focus_token: self.focus,
        };
        if state.annotations.is_empty() && !state.pane_order.is_empty() {
            return Err(ValidationError::PaneOrder.into());
        }
        Ok(canonicalize(&state)?)
    }
}

fn parse_annotation(p: Piece<'_>) -> Result<FragmentAnnotation, ParseError> {
    let Some((text, span)) = p.split_once('@') else {
        return Err(p.error(p.text.len(), "expected '@' and a token index"));
    };
    let text = text.text()?;
    let span = match span.split_once('-') {
        Some((start, end)) => {
            let (start_i, end_i) = (start.int()?, end.int()?);
            if end_i < start_i {
                return Err(end.error(0, "span end precedes its start"));
            }
            TokenSpan::new(start_i, end_i)
        }
        None => TokenSpan::single(span.int()?),
    };
    Ok(FragmentAnnotation { text, span })
}
