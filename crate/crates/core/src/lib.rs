//! Textarium core: deterministic text interpretation and essay compilation.
//!
//! * [`text`] loads source texts and anchors everything to word tokens.
//! * [`analysis`] provides the legible helpers: Porter stemming, normalized
//!   edit-distance similarity, regex matching, related-token discovery and
//!   grouping suggestions.
//! * [`state`] holds the shareable interpretation state and its
//!   human-readable URL fragment.
//! * [`argument`] turns a Markdown essay into a static scrollytelling site.

pub mod analysis;
pub mod argument;
pub mod error;
pub mod state;
pub mod text;

pub use analysis::{find_related, similarity, stem, suggest_groups, MatchSpec, Stem, Suggestion};
pub use argument::{compile_site, parse_argument, validate_embeds, ArgumentDocument, ArgumentManifest};
pub use error::RangeError;
pub use state::{
    canonicalize, decode, encode, palette_color, AbstractionGroup, Annotation, InterpretationState, TokenSpan,
};
pub use text::{fingerprint, tokenize, Document, Fingerprint, Token};
