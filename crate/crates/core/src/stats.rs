//! Corpus-level analyses of cause pairs: counts, distances and
//! state/cause co-occurrence.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{Conversation, Corpus, Utterance};
use crate::error::{Error, Result};
use crate::eval::PredictedPair;
use crate::label::EmotionLabel;

/// Row order used when printing matrices.
pub const DISPLAY_ROWS: [EmotionLabel; 7] = [
    EmotionLabel::Joy,
    EmotionLabel::Surprise,
    EmotionLabel::Anger,
    EmotionLabel::Sadness,
    EmotionLabel::Disgust,
    EmotionLabel::Fear,
    EmotionLabel::Neutral,
];

pub const DISPLAY_COLS: [EmotionLabel; 6] = [
    EmotionLabel::Joy,
    EmotionLabel::Surprise,
    EmotionLabel::Anger,
    EmotionLabel::Sadness,
    EmotionLabel::Disgust,
    EmotionLabel::Fear,
];

struct PairView<'c> {
    source: &'c Utterance,
    target: &'c Utterance,
    emotion: EmotionLabel,
}

fn pairs_of(conv: &Conversation) -> impl Iterator<Item = PairView<'_>> {
    conv.pairs.iter().map(move |p| PairView {
        source: conv.utterance(p.src_id).expect("validated corpus"),
        target: conv.utterance(p.tgt_id).expect("validated corpus"),
        emotion: p.emotion,
    })
}

fn all_pairs(corpus: &Corpus) -> impl Iterator<Item = PairView<'_>> {
    corpus.conversations().iter().flat_map(pairs_of)
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn ratio(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantReport {
    pub conversations: usize,
    pub pairs_total: usize,
    pub pairs_per_conversation: f64,
    /// Pairs whose source and target are the same utterance.
    pub self_cause: usize,
    pub self_cause_pct: f64,
    /// Pairs between two different utterances of the same speaker.
    pub self_cause_diff_utterance: usize,
    pub self_cause_diff_utterance_pct: f64,
    /// All same-speaker pairs (`self_cause + self_cause_diff_utterance`).
    pub same_speaker: usize,
    pub same_speaker_pct: f64,
}

pub fn quantitative_stats(corpus: &Corpus) -> QuantReport {
    let conversations = corpus.len();
    let (mut total, mut self_cause, mut diff_utt) = (0, 0, 0);
    for pair in all_pairs(corpus) {
        total += 1;
        if pair.source.id == pair.target.id {
            self_cause += 1;
        } else if pair.source.speaker == pair.target.speaker {
            diff_utt += 1;
        }
    }
    QuantReport {
        conversations,
        pairs_total: total,
        pairs_per_conversation: ratio(total, conversations),
        self_cause,
        self_cause_pct: pct(self_cause, total),
        self_cause_diff_utterance: diff_utt,
        self_cause_diff_utterance_pct: pct(diff_utt, total),
        same_speaker: self_cause + diff_utt,
        same_speaker_pct: pct(self_cause + diff_utt, total),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaRow {
    pub delta: u32,
    pub count: usize,
    pub average: f64,
    /// Cumulative share of all pairs with `0 <= δ' <= delta`, in percent.
    pub coverage_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub conversations: usize,
    pub pairs_total: usize,
    pub future_count: usize,
    pub future_average: f64,
    pub per_delta: Vec<DeltaRow>,
    /// Pairs with `δ > max_delta`.
    pub beyond_max: usize,
}

pub fn distance_stats(corpus: &Corpus, max_delta: u32) -> DistanceReport {
    let conversations = corpus.len();
    let mut counts = vec![0usize; max_delta as usize + 1];
    let (mut total, mut future, mut beyond) = (0, 0, 0);
    for conv in corpus.conversations() {
        for pair in &conv.pairs {
            total += 1;
            match pair.delta() {
                d if d < 0 => future += 1,
                d if d as u64 > u64::from(max_delta) => beyond += 1,
                d => counts[d as usize] += 1,
            }
        }
    }
    let mut cumulative = 0;
    let per_delta = counts
        .iter()
        .enumerate()
        .map(|(delta, &count)| {
            cumulative += count;
            DeltaRow {
                delta: delta as u32,
                count,
                average: ratio(count, conversations),
                coverage_pct: pct(cumulative, total),
            }
        })
        .collect();
    DistanceReport {
        conversations,
        pairs_total: total,
        future_count: future,
        future_average: ratio(future, conversations),
        per_delta,
        beyond_max: beyond,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixDirection {
    /// Rows are the state of the causing (source) utterance.
    CausedBy,
    /// Rows are the state of the affected (target) utterance.
    CausedOn,
}

/// Seven state rows by six cause columns, indexed by [`EmotionLabel::index`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateCauseMatrix {
    pub direction: MatrixDirection,
    pub counts: [[usize; 6]; 7],
    /// Pairs skipped because the conditioning utterance has no state.
    pub unlabelled: usize,
}

impl StateCauseMatrix {
    pub fn row_support(&self, state: EmotionLabel) -> usize {
        self.counts[state.index()].iter().sum()
    }

    /// Row-normalized frequency; zero for rows without support.
    pub fn cell(&self, state: EmotionLabel, cause: EmotionLabel) -> f64 {
        assert!(cause.is_cause(), "neutral is not a cause column");
        ratio(self.counts[state.index()][cause.index()], self.row_support(state))
    }

    pub fn row(&self, state: EmotionLabel) -> [f64; 6] {
        EmotionLabel::CAUSES.map(|c| self.cell(state, c))
    }

    pub fn column_total(&self, cause: EmotionLabel) -> usize {
        self.counts.iter().map(|row| row[cause.index()]).sum()
    }

    /// Rows with zero support; they are emitted as all-zero.
    pub fn empty_rows(&self) -> Vec<EmotionLabel> {
        EmotionLabel::ALL
            .into_iter()
            .filter(|s| self.row_support(*s) == 0)
            .collect()
    }
}

pub fn state_cause_matrix(corpus: &Corpus, direction: MatrixDirection) -> StateCauseMatrix {
    let mut counts = [[0usize; 6]; 7];
    let mut unlabelled = 0;
    for pair in all_pairs(corpus) {
        let anchor = match direction {
            MatrixDirection::CausedBy => pair.source,
            MatrixDirection::CausedOn => pair.target,
        };
        match anchor.state {
            Some(state) => counts[state.index()][pair.emotion.index()] += 1,
            None => unlabelled += 1,
        }
    }
    StateCauseMatrix {
        direction,
        counts,
        unlabelled,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionReport {
    pub quantitative: QuantReport,
    pub distance: DistanceReport,
    pub caused_by: StateCauseMatrix,
    pub caused_on: StateCauseMatrix,
}

/// Runs the corpus analyses over predicted pairs resolved against `corpus`.
pub fn prediction_stats(
    predictions: &[PredictedPair],
    corpus: &Corpus,
    max_delta: u32,
) -> Result<PredictionReport> {
    let mut by_conv: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for p in predictions {
        if corpus.conversation(&p.conversation).is_none() {
            return Err(Error::Validation(format!(
                "prediction references unknown conversation {}",
                p.conversation
            )));
        }
        by_conv.entry(&p.conversation).or_default().push(p.to_cause_pair());
    }
    let resolved = corpus.with_pairs(|c| by_conv.remove(&c.id).unwrap_or_default())?;
    Ok(PredictionReport {
        quantitative: quantitative_stats(&resolved),
        distance: distance_stats(&resolved, max_delta),
        caused_by: state_cause_matrix(&resolved, MatrixDirection::CausedBy),
        caused_on: state_cause_matrix(&resolved, MatrixDirection::CausedOn),
    })
}

// Rendering: human-readable tables and tab-separated text.

impl QuantReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 5] = [
            ("Conversations (total)", self.conversations.to_string()),
            ("Cause pairs per conversation", format!("{:.2}", self.pairs_per_conversation)),
            ("Cause pairs (total)", self.pairs_total.to_string()),
            (
                "  Self-cause, same utterance",
                format!("{:.2}% ({})", self.self_cause_pct, self.self_cause),
            ),
            (
                "  Self-cause, different utterance",
                format!(
                    "{:.2}% ({})",
                    self.self_cause_diff_utterance_pct, self.self_cause_diff_utterance
                ),
            ),
        ];
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<36} {value:>16}");
        }
        let _ = writeln!(
            out,
            "{:<36} {:>16}",
            "  Same speaker (any utterance)",
            format!("{:.2}% ({})", self.same_speaker_pct, self.same_speaker)
        );
        out
    }

    pub fn tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        let _ = writeln!(out, "conversations\t{}", self.conversations);
        let _ = writeln!(out, "pairs_total\t{}", self.pairs_total);
        let _ = writeln!(out, "pairs_per_conversation\t{:.4}", self.pairs_per_conversation);
        let _ = writeln!(out, "self_cause\t{}", self.self_cause);
        let _ = writeln!(out, "self_cause_pct\t{:.2}", self.self_cause_pct);
        let _ = writeln!(out, "self_cause_diff_utterance\t{}", self.self_cause_diff_utterance);
        let _ = writeln!(out, "self_cause_diff_utterance_pct\t{:.2}", self.self_cause_diff_utterance_pct);
        let _ = writeln!(out, "same_speaker\t{}", self.same_speaker);
        let _ = writeln!(out, "same_speaker_pct\t{:.2}", self.same_speaker_pct);
        out
    }
}

impl DistanceReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<12}{:>8}", "delta", "<0");
        for row in &self.per_delta {
            let _ = write!(out, "{:>8}", row.delta);
        }
        let _ = write!(out, "\n{:<12}{:>8}", "count", self.future_count);
        for row in &self.per_delta {
            let _ = write!(out, "{:>8}", row.count);
        }
        let _ = write!(out, "\n{:<12}{:>8.2}", "average", self.future_average);
        for row in &self.per_delta {
            let _ = write!(out, "{:>8.2}", row.average);
        }
        let _ = write!(out, "\n{:<12}{:>8}", "coverage %", "--");
        for row in &self.per_delta {
            let _ = write!(out, "{:>8.1}", row.coverage_pct);
        }
        let _ = writeln!(out, "\n(pairs beyond max delta: {})", self.beyond_max);
        out
    }

    pub fn tsv(&self) -> String {
        let mut out = String::from("delta\tcount\taverage\tcoverage_pct\n");
        let _ = writeln!(out, "<0\t{}\t{:.4}\t", self.future_count, self.future_average);
        for row in &self.per_delta {
            let _ = writeln!(out, "{}\t{}\t{:.4}\t{:.1}", row.delta, row.count, row.average, row.coverage_pct);
        }
        let _ = writeln!(out, ">max\t{}\t\t", self.beyond_max);
        out
    }
}

impl StateCauseMatrix {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let arrow = match self.direction {
            MatrixDirection::CausedBy => "state \\ caused by",
            MatrixDirection::CausedOn => "state \\ caused on",
        };
        let _ = write!(out, "{arrow:<20}");
        for c in DISPLAY_COLS {
            let _ = write!(out, "{:>8}", &c.as_str()[..3]);
        }
        let _ = write!(out, "\n{:<20}", "total");
        for c in DISPLAY_COLS {
            let _ = write!(out, "{:>8}", self.column_total(c));
        }
        out.push('\n');
        for s in DISPLAY_ROWS {
            let _ = write!(out, "{:<20}", s.as_str());
            for c in DISPLAY_COLS {
                let _ = write!(out, "{:>8.2}", self.cell(s, c));
            }
            if self.row_support(s) == 0 {
                out.push_str("  (no support)");
            }
            out.push('\n');
        }
        out
    }

    pub fn tsv(&self) -> String {
        let mut out = String::from("state\tcause\tcount\tfrequency\n");
        for s in DISPLAY_ROWS {
            for c in DISPLAY_COLS {
                let _ = writeln!(
                    out,
                    "{s}\t{c}\t{}\t{:.4}",
                    self.counts[s.index()][c.index()],
                    self.cell(s, c)
                );
            }
        }
        out
    }
}
