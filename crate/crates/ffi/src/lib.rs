//! C ABI over `ecac-core`.
//!
//! Every fallible function returns an [`EcacStatus`]; on failure the message
//! is available from [`ecac_last_error_message`] on the same thread. Handles
//! are opaque and must be released with their matching `_free` function.
//! Strings handed out by the library are released with [`ecac_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ecac_core::chain::parse_emotion;
use ecac_core::correction::{build_vocabularies, correct_span, AffixVocabulary, CorrectionMode};
use ecac_core::corpus::{load_corpus, parse_corpus, Corpus, Schema};
use ecac_core::eval::{corpus_pairs, score_pairs};
use ecac_core::stats::{distance_stats, quantitative_stats, state_cause_matrix, MatrixDirection};
use ecac_core::submission::parse_submission;
use ecac_core::{EmotionLabel, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EcacStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Json = 4,
    Validation = 5,
    Io = 6,
    /// No emotion label was found in the text.
    NoLabel = 7,
    Internal = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// Same order as the core label set, `neutral` last.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EcacEmotion {
    Surprise = 0,
    Sadness = 1,
    Joy = 2,
    Disgust = 3,
    Fear = 4,
    Anger = 5,
    Neutral = 6,
}

impl From<EmotionLabel> for EcacEmotion {
    fn from(l: EmotionLabel) -> Self {
        match l {
            EmotionLabel::Surprise => EcacEmotion::Surprise,
            EmotionLabel::Sadness => EcacEmotion::Sadness,
            EmotionLabel::Joy => EcacEmotion::Joy,
            EmotionLabel::Disgust => EcacEmotion::Disgust,
            EmotionLabel::Fear => EcacEmotion::Fear,
            EmotionLabel::Anger => EcacEmotion::Anger,
            EmotionLabel::Neutral => EcacEmotion::Neutral,
        }
    }
}

/// Values accepted by the `mode` argument of [`ecac_vocabulary_correct`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EcacCorrectionMode {
    Semantic = 0,
    Literal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EcacQuantStats {
    pub conversations: usize,
    pub pairs_total: usize,
    pub pairs_per_conversation: f64,
    pub self_cause: usize,
    pub self_cause_pct: f64,
    pub self_cause_diff_utterance: usize,
    pub self_cause_diff_utterance_pct: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EcacScore {
    pub f1_weighted_strict: f64,
    pub f1_weighted_proportional: f64,
    pub f1_strict: f64,
    pub f1_proportional: f64,
}

/// Opaque corpus handle.
pub struct EcacCorpus(Corpus);

/// Opaque affix vocabulary handle.
pub struct EcacVocabulary(AffixVocabulary);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EcacStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Json { .. } => EcacStatus::Json,
            Error::Validation(_) | Error::Record { .. } => EcacStatus::Validation,
            Error::Io { .. } => EcacStatus::Io,
            Error::Config(_) | Error::Template(_) => EcacStatus::InvalidArgument,
            _ => EcacStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> EcacStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            EcacStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {what}"));
            EcacStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(EcacStatus::NullArgument, format!("`{name}` is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(EcacStatus::InvalidUtf8, format!("`{name}` is not UTF-8: {e}")))
}

unsafe fn bytes_arg<'a>(p: *const u8, len: usize, name: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(EcacStatus::Internal, "result contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn ecac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn ecac_status_name(status: EcacStatus) -> *const c_char {
    let s: &'static CStr = match status {
        EcacStatus::Ok => c"ok",
        EcacStatus::NullArgument => c"null argument",
        EcacStatus::InvalidUtf8 => c"invalid UTF-8",
        EcacStatus::InvalidArgument => c"invalid argument",
        EcacStatus::Json => c"malformed JSON",
        EcacStatus::Validation => c"validation failed",
        EcacStatus::Io => c"I/O error",
        EcacStatus::NoLabel => c"no emotion label",
        EcacStatus::Internal => c"internal error",
        EcacStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Static, lowercase label name.
#[no_mangle]
pub extern "C" fn ecac_emotion_name(emotion: EcacEmotion) -> *const c_char {
    let s: &'static CStr = match emotion {
        EcacEmotion::Surprise => c"surprise",
        EcacEmotion::Sadness => c"sadness",
        EcacEmotion::Joy => c"joy",
        EcacEmotion::Disgust => c"disgust",
        EcacEmotion::Fear => c"fear",
        EcacEmotion::Anger => c"anger",
        EcacEmotion::Neutral => c"neutral",
    };
    s.as_ptr()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ecac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a corpus file in the competition JSON layout.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_load(path: *const c_char, out: *mut *mut EcacCorpus) -> EcacStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let corpus = load_corpus(Path::new(path), &Schema::default())?;
        *out = Box::into_raw(Box::new(EcacCorpus(corpus)));
        Ok(())
    })
}

/// Parses a corpus from an in-memory JSON buffer.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_parse(data: *const u8, len: usize, out: *mut *mut EcacCorpus) -> EcacStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let corpus = parse_corpus(bytes_arg(data, len, "data")?, &Schema::default())?;
        *out = Box::into_raw(Box::new(EcacCorpus(corpus)));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_free(corpus: *mut EcacCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of conversations, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_len(corpus: *const EcacCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// Number of annotated cause pairs, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_pair_count(corpus: *const EcacCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.pair_count())
}

/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_stats(corpus: *const EcacCorpus, out: *mut EcacQuantStats) -> EcacStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        let q = quantitative_stats(&corpus.0);
        *out = EcacQuantStats {
            conversations: q.conversations,
            pairs_total: q.pairs_total,
            pairs_per_conversation: q.pairs_per_conversation,
            self_cause: q.self_cause,
            self_cause_pct: q.self_cause_pct,
            self_cause_diff_utterance: q.self_cause_diff_utterance,
            self_cause_diff_utterance_pct: q.self_cause_diff_utterance_pct,
        };
        Ok(())
    })
}

/// Every corpus report (counts, distances up to `max_delta`, both
/// state-cause matrices) as one JSON object. Free with [`ecac_string_free`].
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_corpus_stats_json(
    corpus: *const EcacCorpus,
    max_delta: u32,
    out: *mut *mut c_char,
) -> EcacStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let report = serde_json::json!({
            "quantitative": quantitative_stats(&corpus.0),
            "distance": distance_stats(&corpus.0, max_delta),
            "caused_by": state_cause_matrix(&corpus.0, MatrixDirection::CausedBy),
            "caused_on": state_cause_matrix(&corpus.0, MatrixDirection::CausedOn),
        });
        *out = c_string(report.to_string())?;
        Ok(())
    })
}

/// Harvests the affix vocabulary from the annotated spans of `corpus`.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_vocabulary_build(
    corpus: *const EcacCorpus,
    out: *mut *mut EcacVocabulary,
) -> EcacStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        let (vocab, _) = build_vocabularies(&corpus.0);
        *out = Box::into_raw(Box::new(EcacVocabulary(vocab)));
        Ok(())
    })
}

/// Reads a vocabulary file written by `ecac build`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_vocabulary_load(path: *const c_char, out: *mut *mut EcacVocabulary) -> EcacStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let vocab = AffixVocabulary::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(EcacVocabulary(vocab)));
        Ok(())
    })
}

/// # Safety
/// `vocab` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ecac_vocabulary_free(vocab: *mut EcacVocabulary) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// Corrects one predicted span. `mode` is an [`EcacCorrectionMode`] value.
/// Free the result with [`ecac_string_free`].
///
/// # Safety
/// `vocab` must be a live handle, `text` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_vocabulary_correct(
    vocab: *const EcacVocabulary,
    text: *const c_char,
    mode: c_int,
    out: *mut *mut c_char,
) -> EcacStatus {
    guard(|| {
        let vocab = handle(vocab, "vocab")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let mode = match mode {
            m if m == EcacCorrectionMode::Semantic as c_int => CorrectionMode::Semantic,
            m if m == EcacCorrectionMode::Literal as c_int => CorrectionMode::Literal,
            m => return Err(Failure(EcacStatus::InvalidArgument, format!("unknown correction mode {m}"))),
        };
        *out = c_string(correct_span(text, &vocab.0, mode).to_string())?;
        Ok(())
    })
}

/// Extracts the emotion a completion settles on (the last label word).
/// Returns [`EcacStatus::NoLabel`] when the text names none.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_parse_emotion(text: *const c_char, out: *mut EcacEmotion) -> EcacStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        match parse_emotion(str_arg(text, "text")?) {
            Some(label) => {
                *out = label.into();
                Ok(())
            }
            None => Err(Failure(EcacStatus::NoLabel, "no emotion label in text".into())),
        }
    })
}

/// Scores a submission (corpus JSON with predicted pairs) against the pairs
/// of `gold`.
///
/// # Safety
/// `predictions` must point to `len` readable bytes, `gold` must be a live
/// handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecac_score(
    predictions: *const u8,
    len: usize,
    gold: *const EcacCorpus,
    out: *mut EcacScore,
) -> EcacStatus {
    guard(|| {
        let gold = handle(gold, "gold")?;
        let out = out_arg(out, "out")?;
        let (_, predicted) = parse_submission(bytes_arg(predictions, len, "predictions")?, &Schema::default())?;
        let r = score_pairs(&predicted, &corpus_pairs(&gold.0))?;
        *out = EcacScore {
            f1_weighted_strict: r.f1_weighted_strict,
            f1_weighted_proportional: r.f1_weighted_proportional,
            f1_strict: r.f1_strict,
            f1_proportional: r.f1_proportional,
        };
        Ok(())
    })
}
