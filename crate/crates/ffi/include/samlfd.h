#ifndef SAMLFD_H
#define SAMLFD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum SamlfdStatus {
  SAMLFD_STATUS_OK = 0,
  SAMLFD_STATUS_NULL_POINTER = 1,
  SAMLFD_STATUS_INVALID_ARGUMENT = 2,
  SAMLFD_STATUS_INVALID_TRAJECTORY = 3,
  SAMLFD_STATUS_UNKNOWN_NAME = 4,
  SAMLFD_STATUS_IO = 5,
  SAMLFD_STATUS_PARSE = 6,
  SAMLFD_STATUS_NUMERICAL = 7,
  SAMLFD_STATUS_BUFFER_TOO_SMALL = 8,
  SAMLFD_STATUS_PANIC = 9,
} SamlfdStatus;

/**
 * Representation codes used by labels and winners.
 */
typedef enum SamlfdRepresentation {
  SAMLFD_REPRESENTATION_JA = 0,
  SAMLFD_REPRESENTATION_LTE = 1,
  SAMLFD_REPRESENTATION_DMP = 2,
} SamlfdRepresentation;

/**
 * Opaque session handle.
 */
typedef struct SamlfdSession SamlfdSession;

/**
 * Opaque trajectory handle.
 */
typedef struct SamlfdTrajectory SamlfdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *samlfd_last_error(void);

/**
 * Builds a trajectory from `len` row-major samples of `dims` coordinates.
 * A non-positive `duration` means 1 second.
 */
enum SamlfdStatus samlfd_trajectory_new(const double *data,
                                        size_t len,
                                        size_t dims,
                                        double duration,
                                        struct SamlfdTrajectory **out);

/**
 * Loads a trajectory from a JSON or CSV file.
 */
enum SamlfdStatus samlfd_trajectory_load(const char *path, struct SamlfdTrajectory **out);

/**
 * One of the bundled shapes with `samples` samples.
 */
enum SamlfdStatus samlfd_trajectory_shape(const char *name,
                                          size_t samples,
                                          struct SamlfdTrajectory **out);

size_t samlfd_trajectory_len(const struct SamlfdTrajectory *t);

size_t samlfd_trajectory_dims(const struct SamlfdTrajectory *t);

/**
 * Copies the row-major samples into `buf`, which must hold `len * dims`
 * values.
 */
enum SamlfdStatus samlfd_trajectory_copy(const struct SamlfdTrajectory *t,
                                         double *buf,
                                         size_t capacity);

void samlfd_trajectory_free(struct SamlfdTrajectory *t);

/**
 * Distance between two trajectories under the metric named `metric`
 * (for example `"frechet"` or `"dtw"`).
 */
enum SamlfdStatus samlfd_distance(const char *metric,
                                  const struct SamlfdTrajectory *a,
                                  const struct SamlfdTrajectory *b,
                                  double *out);

/**
 * Reproduces `demo` from a new initial point with JA, LTE and DMP and
 * returns the closest under `metric`. `point` holds `dims` values.
 */
enum SamlfdStatus samlfd_best_reproduction(const struct SamlfdTrajectory *demo,
                                           const double *point,
                                           size_t dims,
                                           const char *metric,
                                           struct SamlfdTrajectory **out_trajectory,
                                           enum SamlfdRepresentation *out_representation,
                                           double *out_distance);

/**
 * Computes a session over `demo` as given (no smoothing or resampling).
 * `config_json` may be null for the defaults; `workers` 0 uses every core.
 */
enum SamlfdStatus samlfd_session_compute(const struct SamlfdTrajectory *demo,
                                         const char *config_json,
                                         size_t workers,
                                         struct SamlfdSession **out);

/**
 * Number of grid points in the session.
 */
size_t samlfd_session_grid_len(const struct SamlfdSession *s);

/**
 * Best representation at every grid point, row-major.
 */
enum SamlfdStatus samlfd_session_labels(const struct SamlfdSession *s,
                                        enum SamlfdRepresentation *buf,
                                        size_t capacity);

/**
 * Region-classifier prediction at `point`.
 */
enum SamlfdStatus samlfd_session_predict(const struct SamlfdSession *s,
                                         const double *point,
                                         size_t dims,
                                         enum SamlfdRepresentation *out);

/**
 * The session document as JSON. Release it with `samlfd_string_free`.
 */
enum SamlfdStatus samlfd_session_to_json(const struct SamlfdSession *s, char **out);

void samlfd_session_free(struct SamlfdSession *s);

void samlfd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAMLFD_H */
