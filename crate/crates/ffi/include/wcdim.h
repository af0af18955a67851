#ifndef WCDIM_H
#define WCDIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WcdimStatus {
  WCDIM_STATUS_OK = 0,
  WCDIM_STATUS_NULL_POINTER = 1,
  WCDIM_STATUS_INVALID_UTF8 = 2,
  WCDIM_STATUS_PARSE_ERROR = 3,
  WCDIM_STATUS_COEFFICIENT_ERROR = 4,
  WCDIM_STATUS_INVALID_ARGUMENT = 5,
  WCDIM_STATUS_BUFFER_TOO_SMALL = 6,
  WCDIM_STATUS_COMPUTATION_ERROR = 7,
  WCDIM_STATUS_PANIC = 8,
} WcdimStatus;

/**
 * Parsed scene. Opaque to C.
 */
typedef struct WcdimScene WcdimScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next library call on the same thread.
 */
const char *wcdim_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wcdim_version(void);

/**
 * Parses NUL-terminated scene text into a new handle stored in `*out`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum WcdimStatus wcdim_scene_parse(const char *text, struct WcdimScene **out);

/**
 * Releases a scene. Null is ignored.
 *
 * # Safety
 * `scene` must come from [`wcdim_scene_parse`] and not be used afterwards.
 */
void wcdim_scene_free(struct WcdimScene *scene);

/**
 * # Safety
 * `scene` and `out` must be valid pointers.
 */
enum WcdimStatus wcdim_scene_dimension(const struct WcdimScene *scene, size_t *out);

/**
 * # Safety
 * `scene` and `out` must be valid pointers.
 */
enum WcdimStatus wcdim_scene_map_count(const struct WcdimScene *scene, size_t *out);

/**
 * Diameter bound `D` of the scene domain.
 *
 * # Safety
 * `scene` and `out` must be valid pointers.
 */
enum WcdimStatus wcdim_scene_diameter(const struct WcdimScene *scene, double *out);

/**
 * Upper bound `x0` on the Hausdorff dimension of the attractor.
 *
 * # Safety
 * `scene` and `out` must be valid pointers.
 */
enum WcdimStatus wcdim_scene_x0(const struct WcdimScene *scene, double *out);

/**
 * Root of `sum_j c_j^x = 1` for `n >= 2` coefficients in `[0, 1)`.
 * `tolerance <= 0` selects the default.
 *
 * # Safety
 * `coefficients` must point to `n` doubles and `out` must be valid.
 */
enum WcdimStatus wcdim_solve_moran(const double *coefficients,
                                   size_t n,
                                   double tolerance,
                                   double *out);

/**
 * Runs the verification pipeline and stores the JSON report in `*out`.
 * Release it with [`wcdim_string_free`].
 *
 * # Safety
 * `scene` and `out` must be valid pointers.
 */
enum WcdimStatus wcdim_scene_verify_json(const struct WcdimScene *scene, char **out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void wcdim_string_free(char *s);

/**
 * Chaos-game sample of the attractor written row-major into `buffer`
 * (`n_points * dimension` doubles). `*written` receives the number of
 * doubles written. A burn-in of 100 steps is applied.
 *
 * # Safety
 * `scene` and `written` must be valid, and `buffer` must hold `buffer_len`
 * doubles.
 */
enum WcdimStatus wcdim_scene_chaos_game(const struct WcdimScene *scene,
                                        size_t n_points,
                                        uint64_t seed,
                                        double *buffer,
                                        size_t buffer_len,
                                        size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WCDIM_H */
