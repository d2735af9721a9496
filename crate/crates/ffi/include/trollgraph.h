#ifndef TROLLGRAPH_H
#define TROLLGRAPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TgStatus {
  TG_STATUS_OK = 0,
  TG_STATUS_NULL_ARGUMENT = 1,
  TG_STATUS_INVALID_UTF8 = 2,
  TG_STATUS_IO = 3,
  TG_STATUS_PARSE = 4,
  TG_STATUS_MODEL = 5,
  TG_STATUS_DATA = 6,
  TG_STATUS_PANIC = 7,
} TgStatus;

/**
 * A loaded model with the lexicons it featurizes with.
 */
typedef struct TgModel TgModel;

/**
 * Library version as a static nul-terminated string.
 */
const char *tg_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *tg_last_error(void);

/**
 * Loads a model file written by `trollgraph train`.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_model_load(const char *path, struct TgModel **out);

/**
 * Parses a model from the contents of a model file.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_model_from_json(const char *json, struct TgModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void tg_model_free(struct TgModel *model);

/**
 * Model kind (`baseline`, `joint` or `hybrid`) as a static string, or null
 * for a null model.
 *
 * # Safety
 * `model` must be null or a live model.
 */
const char *tg_model_kind(const struct TgModel *model);

/**
 * Predicts one snippet given as a snippet-file JSON record. Writes the
 * prediction record as JSON to `out_json`.
 *
 * # Safety
 * `model` must be a live model, `snippet_json` a nul-terminated string and
 * `out_json` a valid pointer.
 */
enum TgStatus tg_model_predict_json(const struct TgModel *model,
                                    const char *snippet_json,
                                    char **out_json);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void tg_string_free(char *s);

/**
 * Fleiss' kappa of a row-major `items × categories` count matrix.
 *
 * # Safety
 * `counts` must point to `items * categories` values and `out` be valid.
 */
enum TgStatus tg_fleiss_kappa(const size_t *counts, size_t items, size_t categories, double *out);

/**
 * Runs the inference and gradient self-check; writes the largest
 * inference deviation and returns `Data` if any check fails.
 *
 * # Safety
 * `max_deviation` must be null or valid.
 */
enum TgStatus tg_selfcheck(uint64_t seed, size_t trials, double *max_deviation);

#endif  /* TROLLGRAPH_H */
