//! Independent re-derivation of the pair scorer, and exhaustive instance
//! generators over a small alphabet.

use ecac_core::corpus::ConversationId;
use ecac_core::eval::{score_pairs, PredictedPair, ScoreReport};
use ecac_core::EmotionLabel::{self, Joy, Sadness};

pub const SPANS: [&str; 3] = ["he won the prize", "won the", "the rain"];
pub const EMOTIONS: [EmotionLabel; 2] = [Joy, Sadness];

pub fn pair(key: u32, emotion: EmotionLabel, span: &str) -> PredictedPair {
    PredictedPair {
        conversation: ConversationId::Num(1 + u64::from(key / 4)),
        src_id: 1,
        tgt_id: 1 + key % 4,
        emotion,
        span: span.to_string(),
    }
}

/// Longest shared run of tokens, by trying every start pair.
pub fn brute_lcs(a: &[&str], b: &[&str]) -> usize {
    let mut best = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut n = 0;
            while i + n < a.len() && j + n < b.len() && a[i + n] == b[j + n] {
                n += 1;
            }
            best = best.max(n);
        }
    }
    best
}

pub struct Oracle {
    pub weighted_strict: f64,
    pub weighted_prop: f64,
    pub strict: f64,
    pub prop: f64,
}

fn f1(credit: f64, predicted: usize, gold: usize) -> f64 {
    let p = if predicted > 0 { credit / predicted as f64 } else { 0.0 };
    let r = if gold > 0 { credit / gold as f64 } else { 0.0 };
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

pub fn oracle(preds: &[PredictedPair], gold: &[PredictedPair]) -> Oracle {
    let mut per = Vec::new();
    for e in EmotionLabel::CAUSES {
        let support = gold.iter().filter(|g| g.emotion == e).count();
        let predicted = preds.iter().filter(|p| p.emotion == e).count();
        let (mut cs, mut cp) = (0.0, 0.0);
        for p in preds.iter().filter(|p| p.emotion == e) {
            let matches: Vec<&PredictedPair> = gold
                .iter()
                .filter(|g| {
                    g.emotion == e && g.conversation == p.conversation && g.src_id == p.src_id && g.tgt_id == p.tgt_id
                })
                .collect();
            let ptoks: Vec<&str> = p.span.split_whitespace().collect();
            let mut best_s: f64 = 0.0;
            let mut best_p: f64 = 0.0;
            for g in matches {
                let gtoks: Vec<&str> = g.span.split_whitespace().collect();
                if ptoks == gtoks {
                    best_s = 1.0;
                }
                let longest = ptoks.len().max(gtoks.len());
                if longest > 0 {
                    best_p = best_p.max(brute_lcs(&ptoks, &gtoks) as f64 / longest as f64);
                }
            }
            cs += best_s;
            cp += best_p;
        }
        if support > 0 {
            per.push((support, f1(cs, predicted, support), f1(cp, predicted, support)));
        }
    }
    let total: usize = per.iter().map(|x| x.0).sum();
    let avg = |f: &dyn Fn(&(usize, f64, f64)) -> f64, weighted: bool| {
        if per.is_empty() {
            return 0.0;
        }
        if weighted {
            per.iter().map(|x| f(x) * x.0 as f64).sum::<f64>() / total as f64
        } else {
            per.iter().map(f).sum::<f64>() / per.len() as f64
        }
    };
    Oracle {
        weighted_strict: avg(&|x| x.1, true),
        weighted_prop: avg(&|x| x.2, true),
        strict: avg(&|x| x.1, false),
        prop: avg(&|x| x.2, false),
    }
}

pub fn assert_agrees(preds: &[PredictedPair], gold: &[PredictedPair]) {
    let r = score_pairs(preds, gold).unwrap();
    let o = oracle(preds, gold);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    assert!(
        close(r.f1_weighted_strict, o.weighted_strict)
            && close(r.f1_weighted_proportional, o.weighted_prop)
            && close(r.f1_strict, o.strict)
            && close(r.f1_proportional, o.prop),
        "disagreement on preds={preds:?} gold={gold:?}: {r:?}"
    );
    assert_ordered(&r);
}

pub fn assert_ordered(r: &ScoreReport) {
    assert!(r.f1_strict <= r.f1_proportional + 1e-12);
    assert!(r.f1_weighted_strict <= r.f1_weighted_proportional + 1e-12);
}

/// Every (key, emotion, span) triple over `keys` keys.
pub fn items(keys: u32) -> Vec<PredictedPair> {
    let mut out = Vec::new();
    for key in 0..keys {
        for e in EMOTIONS {
            for s in SPANS {
                out.push(pair(key, e, s));
            }
        }
    }
    out
}

/// All subsets of `pool` with at most `max` elements.
pub fn subsets(pool: &[PredictedPair], max: usize) -> Vec<Vec<PredictedPair>> {
    fn go(pool: &[PredictedPair], max: usize, start: usize, cur: &mut Vec<PredictedPair>, out: &mut Vec<Vec<PredictedPair>>) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i].clone());
            go(pool, max, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, max, 0, &mut Vec::new(), &mut out);
    out
}

/// Prediction sets with at most one prediction per key: each key is either
/// absent or carries one of the emotion/span choices.
pub fn keyed_predictions(keys: u32) -> Vec<Vec<PredictedPair>> {
    let choices: Vec<Option<(EmotionLabel, &str)>> = std::iter::once(None)
        .chain(EMOTIONS.iter().flat_map(|e| SPANS.iter().map(move |s| Some((*e, *s)))))
        .collect();
    let mut out = vec![Vec::new()];
    for key in 0..keys {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut next = prefix.clone();
                    if let Some((e, s)) = c {
                        next.push(pair(key, *e, s));
                    }
                    next
                })
            })
            .collect();
    }
    out
}

/// Runs both exhaustive sweeps; returns the number of instances checked.
pub fn exhaustive_sweeps() -> usize {
    let mut checked = 0;
    // Up to 5 gold pairs drawn from 3 keys x 2 emotions x 3 spans; up to one
    // prediction per key.
    let gold_sets = subsets(&items(3), 5);
    let pred_sets = keyed_predictions(3);
    assert_eq!(gold_sets.len(), 12_616);
    assert_eq!(pred_sets.len(), 343);
    for gold in &gold_sets {
        for preds in &pred_sets {
            assert_agrees(preds, gold);
            checked += 1;
        }
    }
    // Five keys, so five predictions fit; gold sets are every subset of one
    // fixed five-pair layout.
    let layout: Vec<PredictedPair> =
        (0..5).map(|k| pair(k, EMOTIONS[k as usize % 2], SPANS[k as usize % 3])).collect();
    let gold_sets = subsets(&layout, 5);
    assert_eq!(gold_sets.len(), 32);
    for preds in keyed_predictions(5).iter().filter(|p| p.len() >= 4) {
        for gold in &gold_sets {
            assert_agrees(preds, gold);
            checked += 1;
        }
    }
    checked
}
