#ifndef MVTRI_H
#define MVTRI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of an FFI call.
 */
typedef enum MvtriStatus {
  MVTRI_STATUS_OK = 0,
  /*
   A null pointer, bad length or out-of-range index was passed.
   */
  MVTRI_STATUS_INVALID_ARGUMENT = 1,
  /*
   Malformed or invalid configuration or scene document.
   */
  MVTRI_STATUS_CONFIG_ERROR = 2,
  /*
   The computation failed (degenerate geometry, point at infinity, ...).
   */
  MVTRI_STATUS_NUMERICAL_FAILURE = 3,
  MVTRI_STATUS_IO_ERROR = 4,
  /*
   A Rust panic was caught at the boundary.
   */
  MVTRI_STATUS_PANIC = 5,
} MvtriStatus;

typedef enum MvtriMethod {
  MVTRI_METHOD_LINEAR = 0,
  MVTRI_METHOD_TWO_VIEW_OPTIMAL = 1,
  MVTRI_METHOD_NVIEW_LM = 2,
} MvtriMethod;

/*
 Opaque scene handle.
 */
typedef struct MvtriScene MvtriScene;

/*
 A triangulated scene point.
 */
typedef struct MvtriPoint {
  double x;
  double y;
  double z;
  /*
   Sum of squared pixel residuals against the input observations.
   */
  double geometric_error;
  bool converged;
} MvtriPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *mvtri_version(void);

/*
 Message of the last failed call on this thread, empty after a success.
 Valid until the next mvtri call on the same thread.
 */
const char *mvtri_last_error_message(void);

/*
 Conjectured degree of the optimal n-view triangulation polynomial.

 # Safety
 `out` must be a valid pointer to a `uint64_t`.
 */
enum MvtriStatus mvtri_degree_conjecture(uint32_t n, uint64_t *out);

/*
 Optimal two-view triangulation of pixel `x1` in `p1` and `x2` in `p2`.

 # Safety
 `p1` and `p2` point to 12 doubles, `x1` and `x2` to 2 doubles, `out` to
 an `MvtriPoint`.
 */
enum MvtriStatus mvtri_triangulate_two_view(const double *p1,
                                            const double *p2,
                                            const double *x1,
                                            const double *x2,
                                            struct MvtriPoint *out);

/*
 Triangulates one point seen in `n` views: `projections` holds `n`
 row-major 3x4 matrices and `pixels` the `n` observations `(u, v)`.
 `method` selects linear, or Levenberg–Marquardt refinement of the
 reprojection error; the two-view optimal method needs `n == 2`.

 # Safety
 `projections` points to `12 n` doubles, `pixels` to `2 n` doubles and
 `out` to an `MvtriPoint`.
 */
enum MvtriStatus mvtri_triangulate_nview(const double *projections,
                                         const double *pixels,
                                         size_t n,
                                         enum MvtriMethod method,
                                         struct MvtriPoint *out);

/*
 DLT calibration from `n >= 6` correspondences: `world` holds `n` points
 `(X, Y, Z)` and `pixels` the `n` observations `(u, v)`. Writes the
 row-major `P` (unit Frobenius norm) and the RMS reprojection error.

 # Safety
 `world` points to `3 n` doubles, `pixels` to `2 n`, `p_out` to 12 and
 `rms_out` to one double.
 */
enum MvtriStatus mvtri_calibrate_dlt(const double *world,
                                     const double *pixels,
                                     size_t n,
                                     double *p_out,
                                     double *rms_out);

/*
 Parses a scene document (see the README for the schema).

 # Safety
 `json` is a NUL-terminated UTF-8 string and `out` a valid pointer. On
 success `*out` owns a scene to be released with `mvtri_scene_free`.
 */
enum MvtriStatus mvtri_scene_from_json(const char *json, struct MvtriScene **out);

/*
 Simulates trial `trial` of the first experiment in an experiment config
 document.

 # Safety
 As for `mvtri_scene_from_json`.
 */
enum MvtriStatus mvtri_scene_simulate(const char *config_json,
                                      uint32_t trial,
                                      struct MvtriScene **out);

/*
 Releases a scene. Null is ignored.

 # Safety
 `scene` must come from this library and not be used afterwards.
 */
void mvtri_scene_free(struct MvtriScene *scene);

/*
 # Safety
 `scene` and `out` must be valid pointers.
 */
enum MvtriStatus mvtri_scene_view_count(const struct MvtriScene *scene, size_t *out);

/*
 # Safety
 `scene` and `out` must be valid pointers.
 */
enum MvtriStatus mvtri_scene_track_count(const struct MvtriScene *scene, size_t *out);

/*
 Point id of track `index`, which indexes the scene's ground truth for
 simulated scenes.

 # Safety
 `scene` and `out` must be valid pointers.
 */
enum MvtriStatus mvtri_scene_track_point_id(const struct MvtriScene *scene,
                                            size_t index,
                                            uint64_t *out);

/*
 Ground-truth position of `point_id`; fails when the scene has none.

 # Safety
 `scene` must be valid and `xyz` point to 3 doubles.
 */
enum MvtriStatus mvtri_scene_ground_truth(const struct MvtriScene *scene,
                                          uint64_t point_id,
                                          double *xyz);

/*
 Triangulates track `index` of a scene. The two-view optimal method uses
 the track's first two observations.

 # Safety
 `scene` and `out` must be valid pointers.
 */
enum MvtriStatus mvtri_scene_triangulate(const struct MvtriScene *scene,
                                         size_t index,
                                         enum MvtriMethod method,
                                         struct MvtriPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MVTRI_H */
