mod common;

use common::affix::{self, check_span, span_text, vocabulary, MODES, TRACES};
use ecac_core::correction::{build_vocabularies, correct_span, is_punct, AffixVocabulary, MAX_ENTRY_WORDS};
use proptest::prelude::*;

#[test]
fn hand_traces() {
    for t in TRACES {
        assert_eq!(t.run(), t.expected, "{} ({:?}) on {:?}", t.name, t.mode, t.input);
    }
}

#[test]
fn clean_spans_are_untouched() {
    let v = affix::vocab(&["Oh,"], &["!"]);
    for mode in MODES {
        assert_eq!(correct_span("the job", &v, mode), "the job");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn output_is_nonempty_idempotent_substring(v in vocabulary(), text in span_text()) {
        check_span(&v, &text)?;
    }

    #[test]
    fn harvested_entries_respect_limits(corpus in common::corpus(4, 5)) {
        let (v, _) = build_vocabularies(&corpus);
        for p in v.prefixes() {
            prop_assert!(p.split_whitespace().count() <= MAX_ENTRY_WORDS);
            prop_assert!(p.ends_with(is_punct));
        }
        for s in v.suffixes() {
            prop_assert!(s.split_whitespace().count() <= MAX_ENTRY_WORDS);
            prop_assert!(s.starts_with(is_punct));
        }
        prop_assert_eq!(AffixVocabulary::from_text(&v.to_text()).unwrap(), v);
    }
}
