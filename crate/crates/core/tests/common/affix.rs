//! Span-correction strategies and hand-traced fixtures.

use ecac_core::correction::{correct_span, AffixVocabulary, CorrectionMode};
use proptest::prelude::*;

pub const MODES: [CorrectionMode; 2] = [CorrectionMode::Semantic, CorrectionMode::Literal];

pub fn vocab(prefixes: &[&str], suffixes: &[&str]) -> AffixVocabulary {
    let mut v = AffixVocabulary::new();
    for p in prefixes {
        v.insert_prefix(p).unwrap();
    }
    for s in suffixes {
        v.insert_suffix(s).unwrap();
    }
    v
}

pub struct Trace {
    pub name: &'static str,
    pub mode: CorrectionMode,
    pub prefixes: &'static [&'static str],
    pub suffixes: &'static [&'static str],
    pub input: &'static str,
    pub expected: &'static str,
}

pub const TRACES: &[Trace] = &[
    Trace {
        name: "repeated affix",
        mode: CorrectionMode::Semantic,
        prefixes: &["Oh,"],
        suffixes: &["!"],
        input: "Oh, Oh, great!!",
        expected: "great",
    },
    Trace {
        name: "repeated affix",
        mode: CorrectionMode::Literal,
        prefixes: &["Oh,"],
        suffixes: &["!"],
        input: "!! great Oh, Oh,",
        expected: "great",
    },
    Trace {
        name: "longest first",
        mode: CorrectionMode::Semantic,
        prefixes: &["Well,", "Well, you know,"],
        suffixes: &["."],
        input: "Well, you know, it rained.",
        expected: "it rained",
    },
    Trace {
        name: "longest first",
        mode: CorrectionMode::Literal,
        prefixes: &[],
        suffixes: &["?", "?! Oh no."],
        input: "?! Oh no. fine",
        expected: "fine",
    },
    Trace {
        name: "empty fallback",
        mode: CorrectionMode::Semantic,
        prefixes: &["Oh,"],
        suffixes: &["!"],
        input: "Oh, !",
        expected: "Oh, !",
    },
    Trace {
        name: "empty fallback",
        mode: CorrectionMode::Literal,
        prefixes: &["Oh,"],
        suffixes: &["!"],
        input: "! Oh,",
        expected: "! Oh,",
    },
];

impl Trace {
    pub fn run(&self) -> &'static str {
        correct_span(self.input, &vocab(self.prefixes, self.suffixes), self.mode)
    }
}

/// Nonempty, a slice of the input, and a fixpoint.
pub fn check_span(v: &AffixVocabulary, text: &str) -> Result<(), TestCaseError> {
    for mode in MODES {
        let out = correct_span(text, v, mode);
        prop_assert!(!out.is_empty());
        let start = out.as_ptr() as usize - text.as_ptr() as usize;
        prop_assert!(start + out.len() <= text.len());
        prop_assert_eq!(&text[start..start + out.len()], out);
        prop_assert_eq!(correct_span(out, v, mode), out);
    }
    Ok(())
}

pub fn word() -> impl Strategy<Value = String> {
    "[a-zA-Z]{1,4}"
}

pub fn punct() -> impl Strategy<Value = char> {
    proptest::sample::select("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~".chars().collect::<Vec<_>>())
}

pub fn prefix_entry() -> impl Strategy<Value = String> {
    (proptest::collection::vec(word(), 0..3), punct()).prop_map(|(w, p)| format!("{}{p}", w.join(" ")))
}

pub fn suffix_entry() -> impl Strategy<Value = String> {
    (punct(), proptest::collection::vec(word(), 0..3)).prop_map(|(p, w)| format!("{p}{}", w.join(" ")))
}

pub fn vocabulary() -> impl Strategy<Value = AffixVocabulary> {
    (proptest::collection::vec(prefix_entry(), 0..5), proptest::collection::vec(suffix_entry(), 0..5)).prop_map(
        |(ps, ss)| {
            let mut v = AffixVocabulary::new();
            for p in &ps {
                v.insert_prefix(p).unwrap();
            }
            for s in &ss {
                v.insert_suffix(s).unwrap();
            }
            v
        },
    )
}

/// Text built from vocabulary-like material so that stripping actually fires.
pub fn span_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![word(), prefix_entry(), suffix_entry()], 1..7)
        .prop_map(|parts| parts.join(" "))
        .prop_filter("non-blank", |s| !s.trim().is_empty())
}

