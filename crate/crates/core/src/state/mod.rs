//! Interpretation state and its URL-fragment form.
//!
//! A state is everything a reader did to one document: annotated spans,
//! the named groups they were merged into, the vertical order of the
//! extract pane and an optional scroll anchor. It is kept in canonical form
//! (annotations in document order, numbered from zero) so that a state and
//! its fragment correspond one to one.

mod fragment;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::RangeError;
use crate::text::{Document, Fingerprint};

pub use fragment::{
    decode, encode, encode_component, DecodeError, Fragment, FragmentAnnotation, FragmentGroup, ParseError,
};

/// IBM color-blind safe palette, cycled by annotation id.
pub const PALETTE: [&str; 5] = ["#648FFF", "#785EF0", "#DC267F", "#FE6100", "#FFB000"];

pub fn palette_color(color_index: usize) -> Result<&'static str, RangeError> {
    PALETTE.get(color_index).copied().ok_or(RangeError::PaletteIndex(color_index))
}

/// Inclusive token range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        TokenSpan { start, end }
    }

    pub fn single(index: usize) -> Self {
        TokenSpan { start: index, end: index }
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for TokenSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub id: usize,
    #[serde(flatten)]
    pub span: TokenSpan,
    pub surface: String,
    /// Always `id % 5`; recomputed by [`canonicalize`].
    #[serde(default)]
    pub color_index: usize,
}

impl Annotation {
    pub fn new(id: usize, span: TokenSpan, surface: impl Into<String>) -> Self {
        Annotation { id, span, surface: surface.into(), color_index: id % PALETTE.len() }
    }

    /// Builds an annotation whose surface is the document text under `span`.
    pub fn from_document(doc: &Document, id: usize, span: TokenSpan) -> Result<Self, RangeError> {
        Ok(Annotation::new(id, span, doc.slice(span.start, span.end)?))
    }

    pub fn color(&self) -> &'static str {
        PALETTE[self.id % PALETTE.len()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AbstractionGroup {
    pub name: String,
    pub member_ids: Vec<usize>,
}

impl AbstractionGroup {
    pub fn new(name: impl Into<String>, member_ids: impl IntoIterator<Item = usize>) -> Self {
        AbstractionGroup { name: name.into(), member_ids: member_ids.into_iter().collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InterpretationState {
    pub doc_fingerprint: Fingerprint,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    #[serde(default)]
    pub groups: Vec<AbstractionGroup>,
    /// Annotation ids from top to bottom of the extract pane.
    #[serde(default)]
    pub pane_order: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_token: Option<usize>,
}

impl InterpretationState {
    pub fn empty(doc_fingerprint: Fingerprint) -> Self {
        InterpretationState {
            doc_fingerprint,
            annotations: Vec::new(),
            groups: Vec::new(),
            pane_order: Vec::new(),
            focus_token: None,
        }
    }

    pub fn is_canonical(&self) -> bool {
        canonicalize(self).is_ok_and(|c| &c == self)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("state is always serializable")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("overlapping spans {first} and {second}")]
    OverlappingSpans { first: TokenSpan, second: TokenSpan },
    #[error("annotation {id} has reversed span {span}")]
    ReversedSpan { id: usize, span: TokenSpan },
    #[error("annotation id {0} appears more than once")]
    DuplicateAnnotationId(usize),
    #[error("annotation {0} has an empty surface")]
    EmptySurface(usize),
    #[error("group {group:?} references unknown annotation {id}")]
    UnknownMember { group: String, id: usize },
    #[error("group {0:?} has no members")]
    EmptyGroup(String),
    #[error("group names must not be empty")]
    EmptyGroupName,
    #[error("annotation {0} belongs to more than one group")]
    MultipleGroups(usize),
    #[error("pane order is not a permutation of the annotation ids")]
    PaneOrder,
    #[error("state is not canonical: {0}")]
    NotCanonical(&'static str),
}

/// Puts a state into canonical form.
///
/// Annotations are sorted by span start and renumbered from zero; group
/// members and the pane order are remapped to the new ids, members are
/// sorted and deduplicated, and groups are sorted by their smallest member.
/// An empty pane order on a non-empty state is read as the identity order.
pub fn canonicalize(state: &InterpretationState) -> Result<InterpretationState, ValidationError> {
    let mut seen = BTreeSet::new();
    for a in &state.annotations {
        if !seen.insert(a.id) {
            return Err(ValidationError::DuplicateAnnotationId(a.id));
        }
        if a.span.start > a.span.end {
            return Err(ValidationError::ReversedSpan { id: a.id, span: a.span });
        }
        if a.surface.is_empty() {
            return Err(ValidationError::EmptySurface(a.id));
        }
    }

    let mut sorted: Vec<&Annotation> = state.annotations.iter().collect();
    sorted.sort_by_key(|a| (a.span.start, a.span.end));
    for pair in sorted.windows(2) {
        if pair[0].span.overlaps(&pair[1].span) {
            return Err(ValidationError::OverlappingSpans { first: pair[0].span, second: pair[1].span });
        }
    }
    let remap: HashMap<usize, usize> = sorted.iter().enumerate().map(|(new, a)| (a.id, new)).collect();

    let annotations: Vec<Annotation> =
        sorted.iter().enumerate().map(|(new, a)| Annotation::new(new, a.span, a.surface.clone())).collect();

    let mut grouped = BTreeSet::new();
    let mut groups = Vec::with_capacity(state.groups.len());
    for g in &state.groups {
        if g.name.is_empty() {
            return Err(ValidationError::EmptyGroupName);
        }
        if g.member_ids.is_empty() {
            return Err(ValidationError::EmptyGroup(g.name.clone()));
        }
        let mut members = BTreeSet::new();
        for id in &g.member_ids {
            let new = remap.get(id).ok_or_else(|| ValidationError::UnknownMember { group: g.name.clone(), id: *id })?;
            members.insert(*new);
        }
        for &m in &members {
            if !grouped.insert(m) {
                return Err(ValidationError::MultipleGroups(sorted[m].id));
            }
        }
        groups.push(AbstractionGroup { name: g.name.clone(), member_ids: members.into_iter().collect() });
    }
    groups.sort_by_key(|g| g.member_ids[0]);

    let n = annotations.len();
    let pane_order = if state.pane_order.is_empty() {
        (0..n).collect()
    } else {
        let order: Vec<usize> = state
            .pane_order
            .iter()
            .map(|id| remap.get(id).copied().ok_or(ValidationError::PaneOrder))
            .collect::<Result<_, _>>()?;
        if order.len() != n || order.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(ValidationError::PaneOrder);
        }
        order
    };

    Ok(InterpretationState {
        doc_fingerprint: state.doc_fingerprint,
        annotations,
        groups,
        pane_order,
        focus_token: state.focus_token,
    })
}

/// Names the first canonical-form rule `state` breaks, if any, given that
/// it canonicalizes to `canonical`.
fn canonical_difference(state: &InterpretationState, canonical: &InterpretationState) -> Option<&'static str> {
    let spans = |s: &InterpretationState| s.annotations.iter().map(|a| (a.id, a.span)).collect::<Vec<_>>();
    if spans(state) != spans(canonical) {
        Some("annotations must be numbered from 0 in span order")
    } else if state.annotations != canonical.annotations {
        Some("color index must equal id mod 5")
    } else if state.groups != canonical.groups {
        Some("groups must be sorted by smallest member with ascending member ids")
    } else if state.pane_order != canonical.pane_order {
        Some("pane order must list every annotation id")
    } else {
        None
    }
}

/// Checks that a state satisfies every invariant and is already canonical.
pub fn validate(state: &InterpretationState) -> Result<(), ValidationError> {
    let canonical = canonicalize(state)?;
    match canonical_difference(state, &canonical) {
        Some(rule) => Err(ValidationError::NotCanonical(rule)),
        None => Ok(()),
    }
}
