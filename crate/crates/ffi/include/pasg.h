/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PASG_H
#define PASG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PasgStatus {
  PASG_STATUS_OK = 0,
  PASG_STATUS_NULL_POINTER = 1,
  PASG_STATUS_INVALID_UTF8 = 2,
  PASG_STATUS_PARSE = 3,
  PASG_STATUS_IO = 4,
  /**
   * A node, state, trace or sweep budget ran out; partial bounds are
   * still reported.
   */
  PASG_STATUS_BUDGET = 5,
  PASG_STATUS_SOLVER = 6,
  PASG_STATUS_PANIC = 7,
} PasgStatus;

typedef enum PasgSolver {
  PASG_SOLVER_ORACLE = 0,
  PASG_SOLVER_BVI = 1,
  PASG_SOLVER_BRTDP = 2,
  PASG_SOLVER_LAZY_BVI = 3,
  PASG_SOLVER_LAZY_BRTDP = 4,
} PasgSolver;

typedef enum PasgDomain {
  PASG_DOMAIN_EXPL = 0,
  PASG_DOMAIN_PRED = 1,
} PasgDomain;

typedef enum PasgHeuristic {
  PASG_HEURISTIC_RANDOM = 0,
  PASG_HEURISTIC_DIFF_BASED = 1,
} PasgHeuristic;

/**
 * Parsed model and query.
 */
typedef struct PasgModel PasgModel;

typedef struct PasgOptions {
  enum PasgSolver solver;
  enum PasgDomain domain;
  enum PasgHeuristic heuristic;
  /**
   * Absolute width of the result interval.
   */
  double threshold;
  uint64_t seed;
  uint64_t max_nodes;
  uint64_t max_traces;
  /**
   * Breadth-first instead of depth-first graph exploration.
   */
  bool fifo;
} PasgOptions;

typedef struct PasgResult {
  double lower;
  double upper;
  uint64_t total_nodes;
  uint64_t covered_nodes;
  uint64_t iterations;
  uint64_t time_ms;
  bool budget_exceeded;
} PasgResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *pasg_version(void);

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next library call on the same thread.
 */
const char *pasg_last_error_message(void);

/**
 * Parses model text. `name` may be null, in which case the model is
 * called "model". On success `*out` owns a new handle.
 *
 * # Safety
 * `text` and a non-null `name` must be nul-terminated strings; `out` must
 * be valid for writes.
 */
enum PasgStatus pasg_model_parse(const char *text, const char *name, struct PasgModel **out);

/**
 * Reads and parses a model file; the model is named after the file stem.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be valid for writes.
 */
enum PasgStatus pasg_model_load(const char *path, struct PasgModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void pasg_model_free(struct PasgModel *model);

/**
 * Defaults: lazy BVI in the explicit-value domain, threshold 1e-6.
 */
struct PasgOptions pasg_options_default(void);

/**
 * Solves the model. `options` may be null for the defaults. `*out` is
 * filled on `Ok` and on `Budget`.
 *
 * # Safety
 * `model` must be a live handle, `options` null or valid, `out` valid for
 * writes.
 */
enum PasgStatus pasg_check(const struct PasgModel *model,
                           const struct PasgOptions *options,
                           struct PasgResult *out);

/**
 * Solves the model and returns the statistics record as JSON in `*out`,
 * to be released with `pasg_string_free`. Filled on `Ok` and `Budget`.
 *
 * # Safety
 * As for `pasg_check`.
 */
enum PasgStatus pasg_stats_json(const struct PasgModel *model,
                                const struct PasgOptions *options,
                                char **out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void pasg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PASG_H */
