/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef REGIOCLUSTER_H
#define REGIOCLUSTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_ARGUMENT = 2,
  RC_STATUS_IO = 3,
  RC_STATUS_PARSE = 4,
  RC_STATUS_VALIDATION = 5,
  RC_STATUS_INTEGRITY = 6,
  RC_STATUS_UNDEFINED_DISTANCE = 7,
  RC_STATUS_CONFIG = 8,
  RC_STATUS_INTERNAL = 9,
  RC_STATUS_PANIC = 10,
} RcStatus;

typedef enum RcMeasure {
  RC_MEASURE_PHI_SQUARE = 0,
  RC_MEASURE_CHI_SQUARE = 1,
} RcMeasure;

/**
 * A region → cluster labelling.
 */
typedef struct RcAssignment RcAssignment;

/**
 * A loaded or generated corpus.
 */
typedef struct RcCorpus RcCorpus;

/**
 * Everything a pipeline run produced.
 */
typedef struct RcResult RcResult;

/**
 * Parameters of the synthetic planted-partition generator.
 */
typedef struct RcSynthSpec {
  size_t n_regions;
  size_t n_provinces;
  size_t n_planted_clusters;
  size_t activities_per_cluster;
  size_t n_global_activities;
  double signature_strength;
  uint64_t players_min;
  uint64_t players_max;
  uint64_t seed;
} RcSynthSpec;

/**
 * Pipeline parameters that do not involve files.
 */
typedef struct RcRunOptions {
  size_t k;
  /**
   * One of the [`RcMeasure`] values.
   */
  uint32_t measure;
  size_t top_small_k;
  size_t top_large_k;
  double large_share_min;
  double small_share_max;
  double corr_threshold;
  size_t neighbors;
  size_t shuffles;
  uint64_t seed;
} RcRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL.
 */
const char *rc_last_error(void);

/**
 * Phi-square distance between two non-negative vectors of length `len`.
 *
 * # Safety
 * `x` and `y` must point to `len` readable doubles; `out` must be writable.
 */
enum RcStatus rc_phi_square_distance(const double *x, const double *y, size_t len, double *out);

/**
 * Adjusted Rand index between two labellings of `len` items.
 *
 * # Safety
 * `a` and `b` must point to `len` readable values; `out` must be writable.
 */
enum RcStatus rc_adjusted_rand_index(const size_t *a, const size_t *b, size_t len, double *out);

/**
 * Loads a corpus from CSV files. `totals` may be NULL.
 *
 * # Safety
 * Path arguments must be NULL or NUL-terminated strings; `out` must be
 * writable. On success `*out` receives a handle for [`rc_corpus_free`].
 */
enum RcStatus rc_corpus_load(const char *counts,
                             const char *regions,
                             const char *activities,
                             const char *totals,
                             bool complete,
                             struct RcCorpus **out);

/**
 * # Safety
 * `corpus` must be NULL or a handle from this library not yet freed.
 */
void rc_corpus_free(struct RcCorpus *corpus);

/**
 * Number of regions in the count matrix, or 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t rc_corpus_n_regions(const struct RcCorpus *corpus);

/**
 * Number of activities in the count matrix, or 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t rc_corpus_n_activities(const struct RcCorpus *corpus);

struct RcSynthSpec rc_synth_spec_default(void);

/**
 * Generates a synthetic corpus and its planted partition.
 *
 * # Safety
 * `spec` must be readable; `corpus_out` and `truth_out` writable. On
 * success both receive handles the caller frees.
 */
enum RcStatus rc_synthetic_generate(const struct RcSynthSpec *spec,
                                    struct RcCorpus **corpus_out,
                                    struct RcAssignment **truth_out);

/**
 * # Safety
 * `assignment` must be NULL or a handle from this library not yet freed.
 */
void rc_assignment_free(struct RcAssignment *assignment);

/**
 * Number of labelled regions, or 0 for NULL.
 *
 * # Safety
 * `assignment` must be NULL or a live handle.
 */
size_t rc_assignment_len(const struct RcAssignment *assignment);

/**
 * Number of clusters, or 0 for NULL.
 *
 * # Safety
 * `assignment` must be NULL or a live handle.
 */
size_t rc_assignment_k(const struct RcAssignment *assignment);

/**
 * Copies the 1-based cluster labels into `labels`, which must hold
 * [`rc_assignment_len`] values.
 *
 * # Safety
 * `assignment` must be a live handle; `labels` must point to `len`
 * writable values.
 */
enum RcStatus rc_assignment_labels(const struct RcAssignment *assignment,
                                   size_t *labels,
                                   size_t len);

/**
 * Region id at position `index`, or NULL when out of range. The string
 * lives as long as the handle.
 *
 * # Safety
 * `assignment` must be NULL or a live handle.
 */
const char *rc_assignment_region_id(const struct RcAssignment *assignment, size_t index);

struct RcRunOptions rc_run_options_default(void);

/**
 * Runs selection, clustering, and evaluation on `corpus`.
 * `ground_truth` may be NULL.
 *
 * # Safety
 * `corpus` must be a live handle, `options` readable, `ground_truth` NULL
 * or a live handle, and `out` writable. On success `*out` receives a handle
 * for [`rc_result_free`].
 */
enum RcStatus rc_pipeline_run(const struct RcCorpus *corpus,
                              const struct RcRunOptions *options,
                              const struct RcAssignment *ground_truth,
                              struct RcResult **out);

/**
 * # Safety
 * `result` must be NULL or a handle from this library not yet freed.
 */
void rc_result_free(struct RcResult *result);

/**
 * The flat clustering, owned by `result`. Do not free it separately.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const struct RcAssignment *rc_result_assignment(const struct RcResult *result);

/**
 * Newick text of the full dendrogram.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const char *rc_result_newick(const struct RcResult *result);

/**
 * Activity selection report as JSON.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const char *rc_result_selection_json(const struct RcResult *result);

/**
 * Evaluation report as JSON.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const char *rc_result_evaluation_json(const struct RcResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGIOCLUSTER_H */
