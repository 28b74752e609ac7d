//! Source documents and their word-token tables.
//!
//! Everything else in the crate anchors to token indices produced here, so
//! tokenization has to be deterministic and the offsets must always slice
//! back to the token surface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::RangeError;

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a hash of a text, shown as 16 lowercase hex digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(u64);

impl Fingerprint {
    pub const fn from_u64(value: u64) -> Self {
        Fingerprint(value)
    }

    pub const fn as_u64(self) -> u64 {
        self.0
    }

    /// Fingerprint of `raw` after line endings are normalized to LF.
    pub fn of(raw: &str) -> Self {
        Fingerprint(fnv1a(normalize_newlines(raw).as_bytes()))
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET_BASIS, |hash, &b| (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Convenience wrapper returning the hex form directly.
pub fn fingerprint(raw: &str) -> String {
    Fingerprint::of(raw).to_string()
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid fingerprint {0:?}: expected 16 lowercase hex digits")]
pub struct FingerprintParseError(pub String);

impl FromStr for Fingerprint {
    type Err = FingerprintParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let valid = s.len() == 16 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !valid {
            return Err(FingerprintParseError(s.to_string()));
        }
        u64::from_str_radix(s, 16).map(Fingerprint).map_err(|_| FingerprintParseError(s.to_string()))
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// CRLF and lone CR become LF.
pub fn normalize_newlines(raw: &str) -> std::borrow::Cow<'_, str> {
    if !raw.contains('\r') {
        return raw.into();
    }
    raw.replace("\r\n", "\n").replace('\r', "\n").into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub byte_start: usize,
    pub byte_end: usize,
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Splits `raw` into word tokens.
///
/// A token is a maximal run of letters and digits. An apostrophe (`'` or
/// `’`) or a hyphen stays inside the token when the characters on both sides
/// of it are letters, so `re-design` and `it’s` are single tokens while
/// `1-2` is two. Everything else separates tokens and is not indexed.
pub fn tokenize(raw: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;

    for (i, &(offset, c)) in chars.iter().enumerate() {
        let inside = if c.is_alphanumeric() {
            true
        } else if is_joiner(c) && start.is_some() {
            let prev_letter = i > 0 && chars[i - 1].1.is_alphabetic();
            let next_letter = chars.get(i + 1).is_some_and(|&(_, n)| n.is_alphabetic());
            prev_letter && next_letter
        } else {
            false
        };

        match (inside, start) {
            (true, None) => start = Some(offset),
            (false, Some(s)) => {
                push_token(&mut tokens, raw, s, offset);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_token(&mut tokens, raw, s, raw.len());
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, raw: &str, start: usize, end: usize) {
    tokens.push(Token { index: tokens.len(), surface: raw[start..end].to_string(), byte_start: start, byte_end: end });
}

/// An immutable source text with its token table.
///
/// The stored text has its byte-order mark stripped and line endings
/// normalized, and all token offsets refer to that stored text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DocumentRepr")]
pub struct Document {
    fingerprint: Fingerprint,
    title: String,
    raw: String,
    tokens: Vec<Token>,
}

impl Document {
    pub fn new(title: impl Into<String>, raw: &str) -> Self {
        let raw = raw.strip_prefix('\u{feff}').unwrap_or(raw);
        let raw = normalize_newlines(raw).into_owned();
        Document { fingerprint: Fingerprint::of(&raw), title: title.into(), tokens: tokenize(&raw), raw }
    }

    /// Decodes UTF-8 bytes, as read from a plain-text file.
    pub fn from_bytes(title: impl Into<String>, bytes: &[u8]) -> Result<Self, std::str::Utf8Error> {
        Ok(Document::new(title, std::str::from_utf8(bytes)?))
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    /// Raw text from the first byte of token `start` to the last byte of
    /// token `end`, inclusive of everything in between.
    pub fn slice(&self, start: usize, end: usize) -> Result<&str, RangeError> {
        let count = self.tokens.len();
        if start >= count {
            return Err(RangeError::TokenIndex { index: start, count });
        }
        if end >= count {
            return Err(RangeError::TokenIndex { index: end, count });
        }
        if start > end {
            return Err(RangeError::ReversedSpan { start, end });
        }
        Ok(&self.raw[self.tokens[start].byte_start..self.tokens[end].byte_end])
    }

    /// Serializes the document and token table with a fixed key order.
    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("document is always serializable");
        out.push('\n');
        out
    }
}

/// Wire form of a document; loading re-tokenizes `raw` and rejects files
/// whose fingerprint or token table disagree with it.
#[derive(Deserialize)]
struct DocumentRepr {
    fingerprint: Fingerprint,
    title: String,
    raw: String,
    tokens: Vec<Token>,
}

impl TryFrom<DocumentRepr> for Document {
    type Error = String;

    fn try_from(repr: DocumentRepr) -> Result<Self, Self::Error> {
        if repr.raw.contains('\r') {
            return Err("raw text is not normalized".into());
        }
        // Stored text is already normalized; a leading U+FEFF here is content.
        let doc = Document {
            fingerprint: Fingerprint::of(&repr.raw),
            title: repr.title,
            tokens: tokenize(&repr.raw),
            raw: repr.raw,
        };
        if doc.fingerprint != repr.fingerprint {
            return Err(format!("fingerprint {} does not match text ({})", repr.fingerprint, doc.fingerprint));
        }
        if doc.tokens != repr.tokens {
            return Err("token table does not match text".into());
        }
        Ok(doc)
    }
}
