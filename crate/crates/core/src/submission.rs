//! Competition-style submission files: the evaluation corpus with predicted
//! pairs attached to each conversation.

use std::collections::BTreeMap;

use crate::corpus::{parse_corpus, serialize_corpus, Corpus, Schema};
use crate::error::{Error, Result};
use crate::eval::{corpus_pairs, PredictedPair};

fn validate(predictions: &[PredictedPair], corpus: &Corpus) -> Result<()> {
    for p in predictions {
        let where_ = || format!("conversation {}, pair ({} -> {})", p.conversation, p.src_id, p.tgt_id);
        if p.span.trim().is_empty() {
            return Err(Error::Validation(format!("{}: empty span", where_())));
        }
        if !p.emotion.is_cause() {
            return Err(Error::Validation(format!("{}: neutral is not a cause emotion", where_())));
        }
        let conv = corpus
            .conversation(&p.conversation)
            .ok_or_else(|| Error::Validation(format!("{}: unknown conversation", where_())))?;
        if conv.utterance(p.src_id).is_none() || conv.utterance(p.tgt_id).is_none() {
            return Err(Error::Validation(format!("{}: unknown utterance", where_())));
        }
    }
    Ok(())
}

/// Renders `corpus` with its pair lists replaced by `predictions`.
///
/// Every prediction is validated before anything is produced.
pub fn format_submission(predictions: &[PredictedPair], corpus: &Corpus, schema: &Schema) -> Result<Vec<u8>> {
    validate(predictions, corpus)?;
    let mut by_conv: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for p in predictions {
        by_conv.entry(&p.conversation).or_default().push(p);
    }
    for pairs in by_conv.values_mut() {
        pairs.sort_by_key(|p| (p.tgt_id, p.src_id));
    }
    let attached = corpus.with_pairs(|c| {
        by_conv
            .get(&c.id)
            .map(|ps| ps.iter().map(|p| p.to_cause_pair()).collect())
            .unwrap_or_default()
    })?;
    Ok(serialize_corpus(&attached, schema))
}

/// Reads a submission back into its corpus and prediction list.
pub fn parse_submission(raw: &[u8], schema: &Schema) -> Result<(Corpus, Vec<PredictedPair>)> {
    let corpus = parse_corpus(raw, schema)?;
    let predictions = corpus_pairs(&corpus);
    Ok((corpus, predictions))
}
