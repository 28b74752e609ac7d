//! Small, explainable text analysis: stemming, edit-distance similarity,
//! regular-expression matching, related-token discovery and grouping
//! suggestions.

mod porter;
mod similarity;
mod suggest;

use std::fmt;

use regex::Regex;
use regex_syntax::ast::{self, Ast};
use serde::{Deserialize, Serialize};

use crate::text::Document;

pub use similarity::{levenshtein, similarity};
pub use suggest::{suggest_groups, Suggestion};

/// Threshold used by the interpretation view for similarity matches.
pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.80;
/// Threshold used for single-linkage grouping suggestions.
pub const DEFAULT_SUGGESTION_THRESHOLD: f64 = 0.75;

/// The stem of a word: always lowercase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stem(String);

impl Stem {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Stem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Porter stem of the lowercased word.
///
/// The algorithm is defined for English letters only: anything that is not
/// made of `a`-`z` after lowercasing (digits, hyphens, apostrophes, accented
/// letters, phrases) comes back lowercased and otherwise unchanged.
pub fn stem(word: &str) -> Stem {
    let lower = word.to_lowercase();
    if !lower.is_empty() && lower.bytes().all(|b| b.is_ascii_lowercase()) {
        Stem(porter::stem_ascii(&lower))
    } else {
        Stem(lower)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("invalid pattern at position {position}: {message}")]
    Pattern { position: usize, message: String },
    #[error("threshold {0} outside the allowed range")]
    Threshold(f64),
}

/// What `find_related` looks for.
#[derive(Clone, Debug)]
pub enum MatchSpec {
    Stem { needle: String },
    Similarity { needle: String, threshold: f64 },
    Regex { pattern: String, compiled: Regex },
}

impl MatchSpec {
    pub fn stem(needle: impl Into<String>) -> Self {
        MatchSpec::Stem { needle: needle.into() }
    }

    pub fn similarity(needle: impl Into<String>, threshold: f64) -> Result<Self, AnalysisError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(AnalysisError::Threshold(threshold));
        }
        Ok(MatchSpec::Similarity { needle: needle.into(), threshold })
    }

    /// Compiles a pattern that must match a whole token surface.
    pub fn regex(pattern: impl Into<String>) -> Result<Self, AnalysisError> {
        let pattern = pattern.into();
        check_pattern(&pattern)?;
        let compiled = Regex::new(&format!("^(?:{pattern})$"))
            .map_err(|e| AnalysisError::Pattern { position: 0, message: e.to_string() })?;
        Ok(MatchSpec::Regex { pattern, compiled })
    }

    pub fn needle(&self) -> &str {
        match self {
            MatchSpec::Stem { needle } | MatchSpec::Similarity { needle, .. } => needle,
            MatchSpec::Regex { pattern, .. } => pattern,
        }
    }

    /// Predicate form, shared with the oracle tests.
    pub fn matcher(&self) -> impl Fn(&str) -> bool + '_ {
        let target = match self {
            MatchSpec::Stem { needle } => Some(stem(needle)),
            _ => None,
        };
        move |surface: &str| match self {
            MatchSpec::Stem { .. } => target.as_ref() == Some(&stem(surface)),
            MatchSpec::Similarity { needle, threshold } => similarity(surface, needle) >= *threshold,
            MatchSpec::Regex { compiled, .. } => compiled.is_match(surface),
        }
    }
}

/// Restricts patterns to the subset both the core and a browser engine
/// interpret the same way: no inline flags, named groups or Unicode
/// property classes. Positions are character offsets into the pattern.
fn check_pattern(pattern: &str) -> Result<(), AnalysisError> {
    let char_pos = |byte: usize| pattern[..byte.min(pattern.len())].chars().count();
    let parsed = ast::parse::Parser::new().parse(pattern).map_err(|e| AnalysisError::Pattern {
        position: char_pos(e.span().start.offset),
        message: e.kind().to_string(),
    })?;
    let mut stack = vec![&parsed];
    while let Some(node) = stack.pop() {
        let unsupported = match node {
            Ast::Flags(f) => Some((f.span, "inline flags are not supported")),
            Ast::Group(g) => {
                stack.push(&g.ast);
                match g.kind {
                    ast::GroupKind::CaptureIndex(_) => None,
                    ast::GroupKind::NonCapturing(ref flags) if flags.items.is_empty() => None,
                    ast::GroupKind::NonCapturing(_) => Some((g.span, "inline flags are not supported")),
                    ast::GroupKind::CaptureName { .. } => Some((g.span, "named groups are not supported")),
                }
            }
            Ast::ClassUnicode(c) => Some((c.span, "unicode property classes are not supported")),
            Ast::Repetition(r) => {
                stack.push(&r.ast);
                None
            }
            Ast::Alternation(a) => {
                stack.extend(a.asts.iter());
                None
            }
            Ast::Concat(c) => {
                stack.extend(c.asts.iter());
                None
            }
            _ => None,
        };
        if let Some((span, message)) = unsupported {
            return Err(AnalysisError::Pattern { position: char_pos(span.start.offset), message: message.to_string() });
        }
    }
    Ok(())
}

/// Ascending indices of every token matching `spec`. Tokens that are
/// already annotated are included; the caller filters them for display.
pub fn find_related(doc: &Document, spec: &MatchSpec) -> Vec<usize> {
    let matches = spec.matcher();
    doc.tokens().iter().filter(|t| matches(&t.surface)).map(|t| t.index).collect()
}
