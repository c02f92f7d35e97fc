//! Pair-level F1 scoring (strict / proportional, weighted / unweighted) and
//! the macro F1 used for development-set label classification.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{CausePair, ConversationId, Corpus};
use crate::error::{Error, Result};
use crate::label::EmotionLabel;

/// An emotion-cause pair with its cause span, either predicted or gold.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredictedPair {
    pub conversation: ConversationId,
    pub src_id: u32,
    pub tgt_id: u32,
    pub emotion: EmotionLabel,
    pub span: String,
}

impl PredictedPair {
    pub fn to_cause_pair(&self) -> CausePair {
        CausePair {
            src_id: self.src_id,
            tgt_id: self.tgt_id,
            emotion: self.emotion,
            span: Some(self.span.clone()),
        }
    }

    fn key(&self) -> (&ConversationId, u32, u32) {
        (&self.conversation, self.src_id, self.tgt_id)
    }
}

/// Gold pairs of a corpus; pairs without an annotated span use the whole source text.
pub fn corpus_pairs(corpus: &Corpus) -> Vec<PredictedPair> {
    corpus
        .conversations()
        .iter()
        .flat_map(|c| {
            c.pairs.iter().map(move |p| PredictedPair {
                conversation: c.id.clone(),
                src_id: p.src_id,
                tgt_id: p.tgt_id,
                emotion: p.emotion,
                span: p.span.clone().unwrap_or_else(|| {
                    c.utterance(p.src_id).expect("validated corpus").text.clone()
                }),
            })
        })
        .collect()
}

/// Collapses whitespace runs and trims the ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Length of the longest run of tokens shared by `a` and `b`.
pub fn longest_common_substring<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            if x == y {
                cur[j + 1] = prev[j] + 1;
                best = best.max(cur[j + 1]);
            }
        }
        prev = cur;
    }
    best
}

/// 1.0 when the spans are equal after whitespace normalization.
pub fn strict_credit(pred: &str, gold: &str) -> f64 {
    if normalize_whitespace(pred) == normalize_whitespace(gold) {
        1.0
    } else {
        0.0
    }
}

/// Shared token run over the longer span's token count.
pub fn proportional_credit(pred: &str, gold: &str) -> f64 {
    let p: Vec<&str> = pred.split_whitespace().collect();
    let g: Vec<&str> = gold.split_whitespace().collect();
    let longest = p.len().max(g.len());
    if longest == 0 {
        return 0.0;
    }
    longest_common_substring(&p, &g) as f64 / longest as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_credit(credit: f64, predicted: usize, gold: usize) -> Self {
        let precision = if predicted == 0 { 0.0 } else { credit / predicted as f64 };
        let recall = if gold == 0 { 0.0 } else { credit / gold as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EmotionScore {
    pub strict: Prf,
    pub proportional: Prf,
    /// Gold pairs with this emotion.
    pub support: usize,
    pub predicted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreReport {
    pub f1_weighted_strict: f64,
    pub f1_weighted_proportional: f64,
    pub f1_strict: f64,
    pub f1_proportional: f64,
    pub per_emotion: BTreeMap<EmotionLabel, EmotionScore>,
}

/// Scores predictions against gold pairs.
///
/// A prediction matches a gold pair when conversation, source, target and
/// emotion all agree; its credit is the best over matching gold pairs.
/// Weighted averages weigh per-emotion F1 by gold support; unweighted ones
/// average over emotions that have gold support.
pub fn score_pairs(predictions: &[PredictedPair], gold: &[PredictedPair]) -> Result<ScoreReport> {
    let mut seen = HashSet::new();
    for p in predictions {
        if !seen.insert(p.key()) {
            return Err(Error::Validation(format!(
                "duplicate prediction for conversation {}, pair ({} -> {})",
                p.conversation, p.src_id, p.tgt_id
            )));
        }
    }

    let mut strict = [0.0f64; 7];
    let mut proportional = [0.0f64; 7];
    let mut predicted = [0usize; 7];
    let mut support = [0usize; 7];
    for g in gold {
        support[g.emotion.index()] += 1;
    }
    for p in predictions {
        let e = p.emotion.index();
        predicted[e] += 1;
        let (mut best_strict, mut best_prop) = (0.0f64, 0.0f64);
        for g in gold.iter().filter(|g| g.key() == p.key() && g.emotion == p.emotion) {
            best_strict = best_strict.max(strict_credit(&p.span, &g.span));
            best_prop = best_prop.max(proportional_credit(&p.span, &g.span));
        }
        strict[e] += best_strict;
        proportional[e] += best_prop;
    }

    let per_emotion: BTreeMap<EmotionLabel, EmotionScore> = EmotionLabel::CAUSES
        .into_iter()
        .map(|label| {
            let i = label.index();
            (
                label,
                EmotionScore {
                    strict: Prf::from_credit(strict[i], predicted[i], support[i]),
                    proportional: Prf::from_credit(proportional[i], predicted[i], support[i]),
                    support: support[i],
                    predicted: predicted[i],
                },
            )
        })
        .collect();

    let total_support: usize = per_emotion.values().map(|s| s.support).sum();
    let supported: Vec<&EmotionScore> = per_emotion.values().filter(|s| s.support > 0).collect();
    let weighted = |f: fn(&EmotionScore) -> f64| {
        if total_support == 0 {
            return 0.0;
        }
        supported.iter().map(|s| f(s) * s.support as f64).sum::<f64>() / total_support as f64
    };
    let uniform = |f: fn(&EmotionScore) -> f64| {
        if supported.is_empty() {
            return 0.0;
        }
        supported.iter().map(|s| f(s)).sum::<f64>() / supported.len() as f64
    };

    Ok(ScoreReport {
        f1_weighted_strict: weighted(|s| s.strict.f1),
        f1_weighted_proportional: weighted(|s| s.proportional.f1),
        f1_strict: uniform(|s| s.strict.f1),
        f1_proportional: uniform(|s| s.proportional.f1),
        per_emotion,
    })
}

impl ScoreReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "F1w_strict {:.4}  F1w_proportional {:.4}  F1_strict {:.4}  F1_proportional {:.4}",
            self.f1_weighted_strict, self.f1_weighted_proportional, self.f1_strict, self.f1_proportional
        );
        let _ = writeln!(
            out,
            "{:<10}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}",
            "emotion", "P_s", "R_s", "F1_s", "P_p", "R_p", "F1_p", "support", "pred"
        );
        for (label, s) in &self.per_emotion {
            let _ = writeln!(
                out,
                "{:<10}{:>9.4}{:>9.4}{:>9.4}{:>9.4}{:>9.4}{:>9.4}{:>9}{:>9}",
                label.as_str(),
                s.strict.precision,
                s.strict.recall,
                s.strict.f1,
                s.proportional.precision,
                s.proportional.recall,
                s.proportional.f1,
                s.support,
                s.predicted
            );
        }
        out
    }

    pub fn tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        let _ = writeln!(out, "f1_weighted_strict\t{:.6}", self.f1_weighted_strict);
        let _ = writeln!(out, "f1_weighted_proportional\t{:.6}", self.f1_weighted_proportional);
        let _ = writeln!(out, "f1_strict\t{:.6}", self.f1_strict);
        let _ = writeln!(out, "f1_proportional\t{:.6}", self.f1_proportional);
        out.push_str("emotion\tp_strict\tr_strict\tf1_strict\tp_prop\tr_prop\tf1_prop\tsupport\tpredicted\n");
        for (label, s) in &self.per_emotion {
            let _ = writeln!(
                out,
                "{label}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
                s.strict.precision,
                s.strict.recall,
                s.strict.f1,
                s.proportional.precision,
                s.proportional.recall,
                s.proportional.f1,
                s.support,
                s.predicted
            );
        }
        out
    }
}

/// Macro-averaged F1 over all seven labels.
pub fn score_dev_classification(predicted: &[EmotionLabel], gold: &[EmotionLabel]) -> Result<f64> {
    if predicted.len() != gold.len() {
        return Err(Error::Validation(format!(
            "label sequences differ in length: {} predicted vs {} gold",
            predicted.len(),
            gold.len()
        )));
    }
    let mut tp = [0usize; 7];
    let mut pred_count = [0usize; 7];
    let mut gold_count = [0usize; 7];
    for (p, g) in predicted.iter().zip(gold) {
        pred_count[p.index()] += 1;
        gold_count[g.index()] += 1;
        if p == g {
            tp[p.index()] += 1;
        }
    }
    let sum: f64 = (0..7)
        .map(|i| Prf::from_credit(tp[i] as f64, pred_count[i], gold_count[i]).f1)
        .sum();
    Ok(sum / 7.0)
}
