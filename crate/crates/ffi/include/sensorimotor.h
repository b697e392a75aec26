#ifndef SENSORIMOTOR_H
#define SENSORIMOTOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SmStatus {
  SM_STATUS_OK = 0,
  SM_STATUS_NULL_POINTER = 1,
  SM_STATUS_INVALID_ARGUMENT = 2,
  SM_STATUS_IO = 3,
  SM_STATUS_FORMAT = 4,
  SM_STATUS_VERSION = 5,
  SM_STATUS_DOMAIN = 6,
  SM_STATUS_GEOMETRY = 7,
  SM_STATUS_DIVERGED = 8,
  SM_STATUS_PROVENANCE = 9,
  SM_STATUS_CONFIG = 10,
  SM_STATUS_NUMERICAL = 11,
  SM_STATUS_PANIC = 12,
} SmStatus;

typedef enum SmSetup {
  SM_SETUP_GRID_WORLD = 0,
  SM_SETUP_ARM_DISTANCE = 1,
  SM_SETUP_ARM_RGB = 2,
} SmSetup;

typedef enum SmExploration {
  SM_EXPLORATION_MTM = 0,
  SM_EXPLORATION_MM = 1,
  SM_EXPLORATION_MMT = 2,
} SmExploration;

/**
 * A set of sensorimotor transitions.
 */
typedef struct SmDataset SmDataset;

/**
 * An environment placement.
 */
typedef struct SmScene SmScene;

/**
 * A predictive model with its optimizer state and mini-batch stream.
 */
typedef struct SmTrainer SmTrainer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; empty when nothing has failed.
 */
const char *sm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sm_version(void);

/**
 * Draws a random scene of the given setup (an `SmSetup` value) from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum SmStatus sm_scene_new(uint32_t setup, uint64_t seed, struct SmScene **out);

/**
 * # Safety
 * `scene` must be null or a handle from `sm_scene_new` not yet freed.
 */
void sm_scene_free(struct SmScene *scene);

/**
 * Number of sensory channels, or 0 for a null handle.
 *
 * # Safety
 * `scene` must be null or a live handle.
 */
size_t sm_scene_sensory_dim(const struct SmScene *scene);

/**
 * Senses at motor state `m` (3 values). On success `*valid` tells whether
 * the configuration is possible; only then is `out` filled.
 *
 * # Safety
 * `m` must point to 3 doubles, `out` to `out_len` doubles, `valid` to a bool.
 */
enum SmStatus sm_scene_sense(const struct SmScene *scene,
                             const double *m,
                             double *out,
                             size_t out_len,
                             bool *valid);

/**
 * Collects `n` valid transitions in `scene` under an exploration regime
 * (an `SmExploration` value).
 *
 * # Safety
 * `scene` must be a live handle and `out` writable.
 */
enum SmStatus sm_dataset_generate(const struct SmScene *scene,
                                  uint32_t exploration,
                                  size_t n,
                                  uint64_t seed,
                                  struct SmDataset **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum SmStatus sm_dataset_load(const char *path_, struct SmDataset **out);

/**
 * # Safety
 * `data` must be a live handle and `path` a NUL-terminated string.
 */
enum SmStatus sm_dataset_save(const struct SmDataset *data, const char *path_);

/**
 * Writes a normalized copy of `data` to `out`; `data` is left untouched.
 *
 * # Safety
 * `data` must be a live handle and `out` writable.
 */
enum SmStatus sm_dataset_normalize(const struct SmDataset *data, struct SmDataset **out);

/**
 * Number of transitions, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live handle.
 */
size_t sm_dataset_len(const struct SmDataset *data);

/**
 * Copies transition `index` as `m_t, s_t, m_next, s_next` into `out`, which
 * must hold `2 * (3 + sensory_dim)` values.
 *
 * # Safety
 * `data` must be a live handle and `out` must point to `out_len` doubles.
 */
enum SmStatus sm_dataset_transition(const struct SmDataset *data,
                                    size_t index,
                                    double *out,
                                    size_t out_len);

/**
 * # Safety
 * `data` must be null or a handle not yet freed.
 */
void sm_dataset_free(struct SmDataset *data);

/**
 * Creates a SELU model for `data`'s dimensions with default training
 * settings, `max_epochs` and `seed`.
 *
 * # Safety
 * `data` must be a live handle and `out` writable.
 */
enum SmStatus sm_trainer_new(const struct SmDataset *data,
                             size_t dim_h,
                             uint64_t max_epochs,
                             uint64_t seed,
                             struct SmTrainer **out);

/**
 * One mini-batch update on `data`; writes the batch loss to `loss`.
 *
 * # Safety
 * Both handles must be live and `loss` writable.
 */
enum SmStatus sm_trainer_step(struct SmTrainer *trainer,
                              const struct SmDataset *data,
                              double *loss);

/**
 * Epochs completed so far, or 0 for a null handle.
 *
 * # Safety
 * `trainer` must be null or a live handle.
 */
uint64_t sm_trainer_epoch(const struct SmTrainer *trainer);

/**
 * Encodes `rows` motor states (row-major, 3 per row) into `out`
 * (row-major, `dim_h` per row).
 *
 * # Safety
 * `m` must point to `3 * rows` doubles and `out` to `out_len` doubles.
 */
enum SmStatus sm_trainer_encode(const struct SmTrainer *trainer,
                                const double *m,
                                size_t rows,
                                double *out,
                                size_t out_len);

/**
 * # Safety
 * `trainer` must be null or a handle not yet freed.
 */
void sm_trainer_free(struct SmTrainer *trainer);

/**
 * Q_p and Q_h between representations `h` (`n × dim_h`) and positions `p`
 * (`n × dim_p`), both row-major.
 *
 * # Safety
 * `h` and `p` must point to `n * dim_h` and `n * dim_p` doubles; `q_p` and
 * `q_h` must be writable.
 */
enum SmStatus sm_dissimilarity(const double *h,
                               const double *p,
                               size_t n,
                               size_t dim_h,
                               size_t dim_p,
                               double *q_p,
                               double *q_h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENSORIMOTOR_H */
