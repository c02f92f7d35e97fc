//! Instruction datasets: one state entry per utterance, one cause entry per
//! candidate (source, target) pair inside a window of `k` utterances.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{render_context, Conversation, ConversationId, Corpus, Utterance};
use crate::error::{Error, Result};
use crate::label::EmotionLabel;

pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_SPLIT_RATIO: f64 = 0.9;

/// Utterances `u'` of `conv` with `0 <= anchor.id - u'.id <= k`, in id order.
fn window<'c>(conv: &'c Conversation, anchor: &Utterance, k: usize) -> &'c [Utterance] {
    let end = anchor.id as usize;
    let start = end.saturating_sub(k + 1);
    &conv.utterances[start..end]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateEntry<'c> {
    pub conversation: &'c ConversationId,
    pub target: &'c Utterance,
    /// Ends with `target`.
    pub context: &'c [Utterance],
    pub label: EmotionLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauseEntry<'c> {
    pub conversation: &'c ConversationId,
    pub source: &'c Utterance,
    pub target: &'c Utterance,
    /// Ends with `target`; always contains `source`.
    pub context: &'c [Utterance],
    pub source_state: Option<EmotionLabel>,
    /// Annotated pair emotion, or neutral when the pair is not annotated.
    pub cause: EmotionLabel,
}

pub fn build_state_dataset(corpus: &Corpus, k: usize) -> Result<Vec<StateEntry<'_>>> {
    if !corpus.is_annotated() {
        return Err(Error::Validation(
            "state dataset requires an annotated corpus".into(),
        ));
    }
    let mut entries = Vec::with_capacity(corpus.utterance_count());
    for conv in corpus.conversations() {
        for target in &conv.utterances {
            entries.push(StateEntry {
                conversation: &conv.id,
                target,
                context: window(conv, target, k),
                label: target.state.expect("annotated corpus"),
            });
        }
    }
    Ok(entries)
}

/// Enumerates every `(source, target)` with `0 <= target.id - source.id <= k`.
///
/// With `exclude_same_speaker_cross`, pairs whose two distinct utterances share
/// a speaker are dropped.
pub fn build_cause_dataset(
    corpus: &Corpus,
    k: usize,
    exclude_same_speaker_cross: bool,
) -> Vec<CauseEntry<'_>> {
    let mut entries = Vec::new();
    for conv in corpus.conversations() {
        for target in &conv.utterances {
            let context = window(conv, target, k);
            for source in context {
                if exclude_same_speaker_cross
                    && source.id != target.id
                    && source.speaker == target.speaker
                {
                    continue;
                }
                let cause = conv
                    .pairs
                    .iter()
                    .find(|p| p.src_id == source.id && p.tgt_id == target.id)
                    .map_or(EmotionLabel::Neutral, |p| p.emotion);
                entries.push(CauseEntry {
                    conversation: &conv.id,
                    source,
                    target,
                    context,
                    source_state: source.state,
                    cause,
                });
            }
        }
    }
    entries
}

/// Number of conversations that go to the training part: `ceil(ratio * n)`.
pub fn train_size(n: usize, ratio: f64) -> usize {
    // The epsilon keeps products like 0.9 * 10 from rounding up to 10.
    let raw = (ratio * n as f64 - 1e-9).ceil();
    (raw.max(0.0) as usize).min(n)
}

/// File-order prefix split at conversation granularity.
pub fn split_train_dev(corpus: &Corpus, ratio: f64) -> Result<(Corpus, Corpus)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Contract(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let cut = train_size(corpus.len(), ratio);
    let (train, dev) = corpus.conversations().split_at(cut);
    Ok((Corpus::new(train.to_vec())?, Corpus::new(dev.to_vec())?))
}

/// Flat, line-oriented form of a dataset entry.
///
/// Column order: `conversation_id, src_id, tgt_id, context, src_text,
/// tgt_text, labels`. Labels are `;`-separated lowercase words; an empty
/// slot marks an absent label. State entries use the target for both ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub conversation_id: String,
    pub src_id: u32,
    pub tgt_id: u32,
    pub context: String,
    pub src_text: String,
    pub tgt_text: String,
    #[serde(with = "label_list")]
    pub labels: Vec<Option<EmotionLabel>>,
}

impl DatasetRecord {
    /// The answer label: the last element of the label list.
    pub fn answer(&self) -> Option<EmotionLabel> {
        self.labels.last().copied().flatten()
    }
}

pub const RECORD_HEADER: [&str; 7] = [
    "conversation_id",
    "src_id",
    "tgt_id",
    "context",
    "src_text",
    "tgt_text",
    "labels",
];

mod label_list {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::label::EmotionLabel;

    pub fn serialize<S: Serializer>(labels: &[Option<EmotionLabel>], s: S) -> Result<S::Ok, S::Error> {
        let text = labels
            .iter()
            .map(|l| l.map_or("", EmotionLabel::as_str))
            .collect::<Vec<_>>()
            .join(";");
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<EmotionLabel>>, D::Error> {
        let text = String::deserialize(d)?;
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(';')
            .map(|part| match part {
                "" => Ok(None),
                word => word.parse().map(Some).map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

pub trait ToRecord {
    fn to_record(&self) -> DatasetRecord;
}

impl ToRecord for StateEntry<'_> {
    fn to_record(&self) -> DatasetRecord {
        DatasetRecord {
            conversation_id: self.conversation.to_string(),
            src_id: self.target.id,
            tgt_id: self.target.id,
            context: render_context(self.context).expect("window contains its target"),
            src_text: self.target.text.clone(),
            tgt_text: self.target.text.clone(),
            labels: vec![Some(self.label)],
        }
    }
}

impl ToRecord for CauseEntry<'_> {
    fn to_record(&self) -> DatasetRecord {
        DatasetRecord {
            conversation_id: self.conversation.to_string(),
            src_id: self.source.id,
            tgt_id: self.target.id,
            context: render_context(self.context).expect("window contains its target"),
            src_text: self.source.text.clone(),
            tgt_text: self.target.text.clone(),
            labels: vec![self.source_state, Some(self.cause)],
        }
    }
}

pub fn write_records<W: Write>(records: &[DatasetRecord], out: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(RECORD_HEADER)?;
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn export_entries(records: &[DatasetRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

pub fn import_entries(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(RECORD_HEADER) {
        return Err(Error::Record {
            path: path.into(),
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| csv_error(path, e)))
        .collect()
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Record {
            path: path.into(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Per-label answer counts of one dataset part.
pub fn label_counts(records: &[DatasetRecord]) -> BTreeMap<EmotionLabel, usize> {
    let mut counts: BTreeMap<EmotionLabel, usize> =
        EmotionLabel::ALL.iter().map(|l| (*l, 0)).collect();
    for label in records.iter().filter_map(DatasetRecord::answer) {
        *counts.get_mut(&label).expect("all labels present") += 1;
    }
    counts
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartSummary {
    pub total: usize,
    pub labels: BTreeMap<EmotionLabel, usize>,
}

impl PartSummary {
    pub fn of(records: &[DatasetRecord]) -> Self {
        PartSummary {
            total: records.len(),
            labels: label_counts(records),
        }
    }
}

/// Counts written next to the exported dataset files, keyed by dataset then part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub k: usize,
    pub split_ratio: f64,
    pub exclude_same_speaker_cross: bool,
    pub datasets: BTreeMap<String, BTreeMap<String, PartSummary>>,
}
