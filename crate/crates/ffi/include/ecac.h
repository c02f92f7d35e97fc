#ifndef ECAC_H
#define ECAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum EcacStatus {
  ECAC_STATUS_OK = 0,
  ECAC_STATUS_NULL_ARGUMENT = 1,
  ECAC_STATUS_INVALID_UTF8 = 2,
  ECAC_STATUS_INVALID_ARGUMENT = 3,
  ECAC_STATUS_JSON = 4,
  ECAC_STATUS_VALIDATION = 5,
  ECAC_STATUS_IO = 6,
  // No emotion label was found in the text.
  ECAC_STATUS_NO_LABEL = 7,
  ECAC_STATUS_INTERNAL = 8,
  // A Rust panic was caught at the boundary.
  ECAC_STATUS_PANIC = 9,
} EcacStatus;

// Same order as the core label set, `neutral` last.
typedef enum EcacEmotion {
  ECAC_EMOTION_SURPRISE = 0,
  ECAC_EMOTION_SADNESS = 1,
  ECAC_EMOTION_JOY = 2,
  ECAC_EMOTION_DISGUST = 3,
  ECAC_EMOTION_FEAR = 4,
  ECAC_EMOTION_ANGER = 5,
  ECAC_EMOTION_NEUTRAL = 6,
} EcacEmotion;

// Values accepted by the `mode` argument of [`ecac_vocabulary_correct`].
typedef enum EcacCorrectionMode {
  ECAC_CORRECTION_MODE_SEMANTIC = 0,
  ECAC_CORRECTION_MODE_LITERAL = 1,
} EcacCorrectionMode;

// Opaque corpus handle.
typedef struct EcacCorpus EcacCorpus;

// Opaque affix vocabulary handle.
typedef struct EcacVocabulary EcacVocabulary;

typedef struct EcacQuantStats {
  size_t conversations;
  size_t pairs_total;
  double pairs_per_conversation;
  size_t self_cause;
  double self_cause_pct;
  size_t self_cause_diff_utterance;
  double self_cause_diff_utterance_pct;
} EcacQuantStats;

typedef struct EcacScore {
  double f1_weighted_strict;
  double f1_weighted_proportional;
  double f1_strict;
  double f1_proportional;
} EcacScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next library call on this thread.
const char *ecac_last_error_message(void);

// Static, NUL-terminated description of a status code.
const char *ecac_status_name(enum EcacStatus status);

// Static, lowercase label name.
const char *ecac_emotion_name(enum EcacEmotion emotion);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void ecac_string_free(char *s);

// Loads a corpus file in the competition JSON layout.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum EcacStatus ecac_corpus_load(const char *path, struct EcacCorpus **out);

// Parses a corpus from an in-memory JSON buffer.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum EcacStatus ecac_corpus_parse(const uint8_t *data, size_t len, struct EcacCorpus **out);

// # Safety
// `corpus` must be NULL or a live handle; it is invalid afterwards.
void ecac_corpus_free(struct EcacCorpus *corpus);

// Number of conversations, 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t ecac_corpus_len(const struct EcacCorpus *corpus);

// Number of annotated cause pairs, 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t ecac_corpus_pair_count(const struct EcacCorpus *corpus);

// # Safety
// `corpus` must be a live handle; `out` must be writable.
enum EcacStatus ecac_corpus_stats(const struct EcacCorpus *corpus, struct EcacQuantStats *out);

// Every corpus report (counts, distances up to `max_delta`, both
// state-cause matrices) as one JSON object. Free with [`ecac_string_free`].
//
// # Safety
// `corpus` must be a live handle; `out` must be writable.
enum EcacStatus ecac_corpus_stats_json(const struct EcacCorpus *corpus,
                                       uint32_t max_delta,
                                       char **out);

// Harvests the affix vocabulary from the annotated spans of `corpus`.
//
// # Safety
// `corpus` must be a live handle; `out` must be writable.
enum EcacStatus ecac_vocabulary_build(const struct EcacCorpus *corpus, struct EcacVocabulary **out);

// Reads a vocabulary file written by `ecac build`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum EcacStatus ecac_vocabulary_load(const char *path, struct EcacVocabulary **out);

// # Safety
// `vocab` must be NULL or a live handle; it is invalid afterwards.
void ecac_vocabulary_free(struct EcacVocabulary *vocab);

// Corrects one predicted span. `mode` is an [`EcacCorrectionMode`] value.
// Free the result with [`ecac_string_free`].
//
// # Safety
// `vocab` must be a live handle, `text` a NUL-terminated string and `out`
// writable.
enum EcacStatus ecac_vocabulary_correct(const struct EcacVocabulary *vocab,
                                        const char *text,
                                        int mode,
                                        char **out);

// Extracts the emotion a completion settles on (the last label word).
// Returns [`EcacStatus::NoLabel`] when the text names none.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum EcacStatus ecac_parse_emotion(const char *text, enum EcacEmotion *out);

// Scores a submission (corpus JSON with predicted pairs) against the pairs
// of `gold`.
//
// # Safety
// `predictions` must point to `len` readable bytes, `gold` must be a live
// handle and `out` writable.
enum EcacStatus ecac_score(const uint8_t *predictions,
                           size_t len,
                           const struct EcacCorpus *gold,
                           struct EcacScore *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECAC_H */
