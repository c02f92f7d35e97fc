#![allow(dead_code)]

use std::path::PathBuf;

use ecac_core::corpus::{CausePair, Conversation, ConversationId, Corpus, Utterance};
use ecac_core::EmotionLabel;
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn label() -> impl Strategy<Value = EmotionLabel> {
    proptest::sample::select(EmotionLabel::ALL.to_vec())
}

pub fn cause_label() -> impl Strategy<Value = EmotionLabel> {
    proptest::sample::select(EmotionLabel::CAUSES.to_vec())
}

fn text() -> impl Strategy<Value = String> {
    proptest::collection::vec("[a-z]{1,6}[,.!?]?", 1..6).prop_map(|w| w.join(" "))
}

/// One conversation with `1..=max_len` utterances over three speakers and
/// at most one annotated pair per (source, target).
pub fn conversation(id: u64, max_len: usize) -> impl Strategy<Value = Conversation> {
    (1..=max_len)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec((proptest::sample::select(vec!["A", "B", "C"]), text(), label()), n),
                proptest::collection::btree_map((1..=n as u32, 1..=n as u32), (cause_label(), any::<bool>()), 0..=n),
            )
        })
        .prop_map(move |(utts, pairs)| {
            let utterances: Vec<Utterance> = utts
                .into_iter()
                .enumerate()
                .map(|(i, (speaker, text, state))| Utterance {
                    id: i as u32 + 1,
                    speaker: speaker.to_string(),
                    text,
                    state: Some(state),
                })
                .collect();
            let pairs = pairs
                .into_iter()
                .map(|((src_id, tgt_id), (emotion, whole))| {
                    let source = &utterances[src_id as usize - 1].text;
                    let span = if whole {
                        source.clone()
                    } else {
                        source.split(' ').next().unwrap().to_string()
                    };
                    CausePair { src_id, tgt_id, emotion, span: Some(span) }
                })
                .collect();
            Conversation { id: ConversationId::Num(id), utterances, pairs }
        })
}

pub fn corpus(max_convs: usize, max_len: usize) -> impl Strategy<Value = Corpus> {
    (0..=max_convs)
        .prop_flat_map(move |n| (1..=n as u64).map(|id| conversation(id, max_len)).collect::<Vec<_>>())
        .prop_map(|convs| Corpus::new(convs).expect("generated corpus is valid"))
}

pub mod affix;
pub mod oracle;
