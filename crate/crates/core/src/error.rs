/// An index or span that falls outside a document's token table.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RangeError {
    #[error("token index {index} out of range (document has {count} tokens)")]
    TokenIndex { index: usize, count: usize },
    #[error("span {start}..{end} is reversed")]
    ReversedSpan { start: usize, end: usize },
    #[error("palette index {0} out of range (palette has 5 colors)")]
    PaletteIndex(usize),
}
