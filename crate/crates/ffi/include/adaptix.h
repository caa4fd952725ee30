#ifndef ADAPTIX_H
#define ADAPTIX_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AdaptixChecks {
  ADAPTIX_CHECKS_NONE = 0,
  ADAPTIX_CHECKS_PHASES = 1,
  ADAPTIX_CHECKS_ROUNDS = 2,
} AdaptixChecks;

typedef enum AdaptixStatus {
  ADAPTIX_STATUS_OK = 0,
  ADAPTIX_STATUS_NULL_POINTER = 1,
  ADAPTIX_STATUS_INVALID_ARGUMENT = 2,
  ADAPTIX_STATUS_IO = 3,
  ADAPTIX_STATUS_PARSE = 4,
  ADAPTIX_STATUS_INVALID_MESH = 5,
  ADAPTIX_STATUS_NON_CONFORMING = 6,
  ADAPTIX_STATUS_THREAD_POOL = 7,
  ADAPTIX_STATUS_INTERNAL = 8,
} AdaptixStatus;

typedef struct AdaptixMesh AdaptixMesh;

typedef struct AdaptixMetric AdaptixMetric;

typedef struct AdaptixTeam AdaptixTeam;

// Kernel parameters; obtain defaults from [`adaptix_params_default`].
typedef struct AdaptixParams {
  double l_low;
  double l_up;
  uint32_t max_iterations;
  uint32_t max_sweeps;
  uint32_t smooth_sweeps;
  enum AdaptixChecks checks;
} AdaptixParams;

typedef struct AdaptixSummary {
  size_t elements;
  size_t vertices;
  uint32_t iterations;
  bool converged;
  double min_quality;
  double mean_quality;
  double seconds;
} AdaptixSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. Valid
// until the next call into the library on this thread.
const char *adaptix_last_error(void);

const char *adaptix_version(void);

// The synthetic benchmark field.
double adaptix_psi(double x, double y, double t, double period);

struct AdaptixParams adaptix_params_default(void);

// # Safety
// `out` must be a valid pointer.
enum AdaptixStatus adaptix_team_new(size_t threads, struct AdaptixTeam **out);

// # Safety
// `team` must come from [`adaptix_team_new`] and not be used afterwards.
void adaptix_team_free(struct AdaptixTeam *team);

// Unit square split into `2 n²` right triangles.
//
// # Safety
// `out` must be a valid pointer.
enum AdaptixStatus adaptix_mesh_structured(size_t n, struct AdaptixMesh **out);

// Builds a mesh from `2 * vertices` coordinates, `3 * elements` vertex ids
// (counter-clockwise) and one boundary tag per vertex. Only ids are checked
// here; use [`adaptix_mesh_verify`] for orientation and conformity.
//
// # Safety
// The arrays must hold the stated number of values.
enum AdaptixStatus adaptix_mesh_new(const double *coords,
                                    size_t vertices,
                                    const uint32_t *triangles,
                                    size_t elements,
                                    const uint8_t *tags,
                                    struct AdaptixMesh **out);

// # Safety
// `file` must be a NUL-terminated string and `out` a valid pointer.
enum AdaptixStatus adaptix_mesh_read(const char *file, struct AdaptixMesh **out);

// # Safety
// `mesh` must be a live handle and `file` a NUL-terminated string.
enum AdaptixStatus adaptix_mesh_write(const struct AdaptixMesh *mesh, const char *file);

// Writes a legacy VTK file, with per-element quality when `metric` is not
// null.
//
// # Safety
// `mesh` must be a live handle, `metric` null or a live handle, and `file`
// a NUL-terminated string.
enum AdaptixStatus adaptix_mesh_write_vtk(const struct AdaptixMesh *mesh,
                                          const struct AdaptixMetric *metric,
                                          const char *file);

// # Safety
// `mesh` must come from this library and not be used afterwards.
void adaptix_mesh_free(struct AdaptixMesh *mesh);

// Number of vertices; 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t adaptix_mesh_vertex_count(const struct AdaptixMesh *mesh);

// Number of elements; 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t adaptix_mesh_element_count(const struct AdaptixMesh *mesh);

// Copies `2 * vertex_count` coordinates into `out`.
//
// # Safety
// `mesh` must be a live handle and `out` must hold `capacity` doubles.
enum AdaptixStatus adaptix_mesh_coords(const struct AdaptixMesh *mesh,
                                       double *out,
                                       size_t capacity);

// Copies `3 * element_count` vertex ids into `out`.
//
// # Safety
// `mesh` must be a live handle and `out` must hold `capacity` ids.
enum AdaptixStatus adaptix_mesh_elements(const struct AdaptixMesh *mesh,
                                         uint32_t *out,
                                         size_t capacity);

// Copies one boundary tag per vertex into `out`: bit `k` set means the
// vertex lies on side `k` (bottom, right, top, left for the unit square).
//
// # Safety
// `mesh` must be a live handle and `out` must hold `capacity` tags.
enum AdaptixStatus adaptix_mesh_tags(const struct AdaptixMesh *mesh, uint8_t *out, size_t capacity);

// Stores the number of conformity violations in `violations`; the
// description of the first few is left in [`adaptix_last_error`] as well.
//
// # Safety
// `mesh` must be a live handle and `violations` a valid pointer.
enum AdaptixStatus adaptix_mesh_verify(const struct AdaptixMesh *mesh, size_t *violations);

// Metric from `3 * count` tensor entries `m00, m01, m11`.
//
// # Safety
// `entries` must hold `3 * count` doubles and `out` be a valid pointer.
enum AdaptixStatus adaptix_metric_new(const double *entries,
                                      size_t count,
                                      double eta,
                                      double h_min,
                                      double h_max,
                                      struct AdaptixMetric **out);

// Metric of the synthetic benchmark field at time `t` on the vertices of
// `mesh`, built from the recovered Hessian.
//
// # Safety
// `team` and `mesh` must be live handles and `out` a valid pointer.
enum AdaptixStatus adaptix_metric_from_psi(const struct AdaptixTeam *team,
                                           const struct AdaptixMesh *mesh,
                                           double t,
                                           double period,
                                           double eta,
                                           double h_min,
                                           double h_max,
                                           struct AdaptixMetric **out);

// # Safety
// `metric` must come from this library and not be used afterwards.
void adaptix_metric_free(struct AdaptixMetric *metric);

// Minimum and mean element quality.
//
// # Safety
// `mesh` and `metric` must be live handles; `min` and `mean` valid pointers.
enum AdaptixStatus adaptix_quality(const struct AdaptixMesh *mesh,
                                   const struct AdaptixMetric *metric,
                                   double *min,
                                   double *mean);

// Adapts `mesh` to `metric` in place. The metric follows the vertices, so
// both handles stay consistent. `params` may be null for defaults and
// `summary` may be null.
//
// # Safety
// `team`, `mesh` and `metric` must be live handles; `params` and `summary`
// null or valid.
enum AdaptixStatus adaptix_adapt(const struct AdaptixTeam *team,
                                 struct AdaptixMesh *mesh,
                                 struct AdaptixMetric *metric,
                                 const struct AdaptixParams *params,
                                 struct AdaptixSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAPTIX_H */
