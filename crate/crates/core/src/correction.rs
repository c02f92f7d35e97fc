//! Rule-based trimming of utterance-level cause spans.
//!
//! Prefix and suffix vocabularies are harvested from the difference between
//! gold utterance texts and their annotated spans. A predicted span is then
//! trimmed by repeatedly stripping vocabulary entries from its edges.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const MAX_ENTRY_WORDS: usize = 5;

/// The 32 ASCII punctuation characters `!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~`.
pub fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
}

fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMode {
    /// Prefix entries are stripped from the start, suffix entries from the end.
    #[default]
    Semantic,
    /// Prefix entries are stripped from the end and suffix entries from the
    /// start, following the printed pseudo-code's `ends with` test.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Leading,
    Trailing,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AffixVocabulary {
    prefixes: BTreeSet<String>,
    suffixes: BTreeSet<String>,
}

/// Why a candidate entry was refused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    Empty,
    TooLong(usize),
    Boundary,
    Multiline,
}

fn admit(entry: &str, punct_at_end: bool) -> std::result::Result<(), Rejection> {
    if entry.trim().is_empty() {
        return Err(Rejection::Empty);
    }
    if entry.contains('\n') {
        return Err(Rejection::Multiline);
    }
    let words = word_count(entry);
    if words > MAX_ENTRY_WORDS {
        return Err(Rejection::TooLong(words));
    }
    let edge = if punct_at_end {
        entry.chars().next_back()
    } else {
        entry.chars().next()
    };
    if !edge.is_some_and(is_punct) {
        return Err(Rejection::Boundary);
    }
    Ok(())
}

impl AffixVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a prefix entry; it must end with punctuation and span at most five words.
    pub fn insert_prefix(&mut self, entry: &str) -> std::result::Result<bool, Rejection> {
        let entry = entry.trim();
        admit(entry, true)?;
        Ok(self.prefixes.insert(entry.to_string()))
    }

    /// Adds a suffix entry; it must start with punctuation and span at most five words.
    pub fn insert_suffix(&mut self, entry: &str) -> std::result::Result<bool, Rejection> {
        let entry = entry.trim();
        admit(entry, false)?;
        Ok(self.suffixes.insert(entry.to_string()))
    }

    pub fn prefixes(&self) -> &BTreeSet<String> {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &BTreeSet<String> {
        &self.suffixes
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty() && self.suffixes.is_empty()
    }

    /// Sorted plain-text form with `[prefixes]` / `[suffixes]` section headers.
    pub fn to_text(&self) -> String {
        let mut out = String::from("[prefixes]\n");
        for p in &self.prefixes {
            let _ = writeln!(out, "{p}");
        }
        out.push_str("[suffixes]\n");
        for s in &self.suffixes {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut vocab = AffixVocabulary::new();
        let mut section = None;
        for (lineno, line) in text.lines().enumerate() {
            match line {
                "[prefixes]" => section = Some(Side::Leading),
                "[suffixes]" => section = Some(Side::Trailing),
                "" => {}
                entry => {
                    let added = match section {
                        Some(Side::Leading) => vocab.insert_prefix(entry),
                        Some(Side::Trailing) => vocab.insert_suffix(entry),
                        None => {
                            return Err(Error::Validation(format!(
                                "vocabulary line {}: entry before any section header",
                                lineno + 1
                            )))
                        }
                    };
                    added.map_err(|why| {
                        Error::Validation(format!(
                            "vocabulary line {}: invalid entry {entry:?} ({why:?})",
                            lineno + 1
                        ))
                    })?;
                }
            }
        }
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Harvests affix candidates from every gold span.
///
/// Spans missing from their source utterance are logged and skipped; the
/// number skipped is returned alongside the vocabulary.
pub fn build_vocabularies(corpus: &Corpus) -> (AffixVocabulary, usize) {
    let mut vocab = AffixVocabulary::new();
    let mut skipped = 0;
    for conv in corpus.conversations() {
        for pair in &conv.pairs {
            let Some(span) = pair.span.as_deref() else { continue };
            let text = &conv.utterance(pair.src_id).expect("validated corpus").text;
            let Some(start) = text.find(span) else {
                warn!(
                    "conversation {}, utterance {}: span {:?} not found in text",
                    conv.id, pair.src_id, span
                );
                skipped += 1;
                continue;
            };
            let before = &text[..start];
            let after = &text[start + span.len()..];
            let _ = vocab.insert_prefix(before);
            let _ = vocab.insert_suffix(after);
        }
    }
    (vocab, skipped)
}

/// Entries ordered by word count, longest first; ties by byte length, then text.
fn longest_first(entries: &BTreeSet<String>) -> Vec<&str> {
    let mut sorted: Vec<&str> = entries.iter().map(String::as_str).collect();
    sorted.sort_by(|a, b| {
        word_count(b)
            .cmp(&word_count(a))
            .then(b.len().cmp(&a.len()))
            .then(a.cmp(b))
    });
    sorted
}

/// Strips entries from one side until none matches or the text is empty.
fn strip_to_fixpoint<'t>(mut text: &'t str, entries: &BTreeSet<String>, side: Side) -> &'t str {
    let ordered = longest_first(entries);
    let mut updated = true;
    while !text.is_empty() && updated {
        updated = false;
        for entry in &ordered {
            let rest = match side {
                Side::Leading => text.strip_prefix(entry).map(str::trim_start),
                Side::Trailing => text.strip_suffix(entry).map(str::trim_end),
            };
            if let Some(rest) = rest {
                text = rest;
                updated = true;
                break;
            }
        }
    }
    text
}

pub fn correct_prefixes<'t>(text: &'t str, prefixes: &BTreeSet<String>, mode: CorrectionMode) -> &'t str {
    let side = match mode {
        CorrectionMode::Semantic => Side::Leading,
        CorrectionMode::Literal => Side::Trailing,
    };
    strip_to_fixpoint(text, prefixes, side)
}

pub fn correct_suffixes<'t>(text: &'t str, suffixes: &BTreeSet<String>, mode: CorrectionMode) -> &'t str {
    let side = match mode {
        CorrectionMode::Semantic => Side::Trailing,
        CorrectionMode::Literal => Side::Leading,
    };
    strip_to_fixpoint(text, suffixes, side)
}

/// Prefix pass, then suffix pass. An empty result reverts to the input.
///
/// The output is always a non-empty substring of a non-empty input.
pub fn correct_span<'t>(text: &'t str, vocab: &AffixVocabulary, mode: CorrectionMode) -> &'t str {
    let trimmed = text.trim();
    let after_prefix = correct_prefixes(trimmed, &vocab.prefixes, mode);
    let corrected = correct_suffixes(after_prefix, &vocab.suffixes, mode);
    if corrected.is_empty() {
        text
    } else {
        corrected
    }
}

/// Strips punctuation and whitespace from both ends. May return an empty string.
pub fn default_punct_trim(text: &str) -> &str {
    text.trim_matches(|c: char| is_punct(c) || c.is_whitespace())
}
