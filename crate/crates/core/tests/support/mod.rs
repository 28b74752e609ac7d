//! Fixtures and independent oracles shared by the integration tests and the
//! acceptance target.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use textarium_core::{canonicalize, AbstractionGroup, Annotation, Document, InterpretationState, TokenSpan};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests")
}

pub fn read(rel: &str) -> String {
    let path = data_dir().join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The published Porter vocabulary paired with the reference output.
pub fn porter_pairs() -> Vec<(String, String)> {
    let voc = read("data/porter_voc.txt");
    let out = read("data/porter_output.txt");
    let voc: Vec<&str> = voc.lines().filter(|l| !l.is_empty()).collect();
    let out: Vec<&str> = out.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(voc.len(), out.len(), "vocabulary and output differ in length");
    voc.into_iter().zip(out).map(|(w, s)| (w.to_string(), s.to_string())).collect()
}

pub fn hundred_words() -> Vec<String> {
    read("fixtures/words100.txt").lines().map(str::to_string).collect()
}

/// Textbook Wagner–Fischer with the full (m+1)×(n+1) table.
pub fn edit_distance_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn similarity_oracle(a: &str, b: &str) -> f64 {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance_oracle(&a, &b) as f64 / longest as f64
}

/// Word material for random documents: plain, accented, non-Latin and
/// hyphenated or apostrophized words.
const WORDS: &[&str] = &[
    "design",
    "designed",
    "designing",
    "tongue",
    "dialect",
    "care",
    "re-design",
    "it’s",
    "don't",
    "naïve",
    "café",
    "straße",
    "Übermaß",
    "año",
    "λόγος",
    "слово",
    "言葉",
    "x",
    "42",
    "h2o",
    "co-op",
    "well-being",
];

/// Separators, including every reserved fragment character.
const SEPARATORS: &[&str] = &[
    " ", " ", " ", ", ", "; ", " & ", " + ", " = ", " @ ", " # ", ": ", " % ", " - ", "\n", " — ", "\t", " \"", "\" ",
];

const NAME_PARTS: &[&str] =
    &["design", "care", "a&b", "x=y", "50%", "#tag", "one, two", "λ", "語", "re-do", "a+b;c", "@", ":", " "];

/// A random document together with a random canonical state over it.
pub fn random_state(rng: &mut impl Rng) -> (Document, InterpretationState) {
    let n_words = rng.random_range(1..=240);
    let mut raw = String::new();
    for i in 0..n_words {
        if i > 0 {
            raw.push_str(SEPARATORS.choose(rng).unwrap());
        }
        raw.push_str(WORDS.choose(rng).unwrap());
    }
    let doc = Document::new("random", &raw);
    let count = doc.token_count();

    // Non-overlapping spans: walk the tokens, occasionally opening one.
    let max_annotations = rng.random_range(0..=50);
    let mut spans = Vec::new();
    let mut t = 0;
    while t < count && spans.len() < max_annotations {
        if rng.random_bool(0.5) {
            let len = rng.random_range(0..4).min(count - 1 - t);
            spans.push(TokenSpan::new(t, t + len));
            t += len + 1;
        } else {
            t += 1;
        }
    }
    // Ids are a random relabelling so canonicalization has work to do.
    let n = spans.len();
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut annotations: Vec<Annotation> =
        spans.into_iter().zip(&labels).map(|(span, &id)| Annotation::from_document(&doc, id, span).unwrap()).collect();
    annotations.shuffle(rng);

    let mut ids = labels.clone();
    ids.shuffle(rng);
    let mut groups = Vec::new();
    let n_groups = if n == 0 { 0 } else { rng.random_range(0..=10.min(n)) };
    for g in 0..n_groups {
        let take = rng.random_range(1..=((ids.len() / (n_groups - g)).max(1)));
        if ids.is_empty() {
            break;
        }
        let members: Vec<usize> = ids.drain(..take.min(ids.len())).collect();
        let parts = rng.random_range(1..=3);
        let name: String = (0..parts).map(|_| *NAME_PARTS.choose(rng).unwrap()).collect();
        groups.push(AbstractionGroup::new(name, members));
    }

    // Half the time leave the order empty, which canonicalizes to identity.
    let mut pane_order = Vec::new();
    if rng.random_bool(0.5) {
        pane_order = labels;
        pane_order.shuffle(rng);
    }
    let focus_token = (count > 0 && rng.random_bool(0.3)).then(|| rng.random_range(0..count));

    let state =
        InterpretationState { doc_fingerprint: doc.fingerprint(), annotations, groups, pane_order, focus_token };
    let state = canonicalize(&state).expect("generator builds valid states");
    (doc, state)
}
