#ifndef PPC_H
#define PPC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Version of this C interface; bumped on any incompatible change.
#define PPC_ABI_VERSION 1

typedef enum PpcStatus {
  PPC_STATUS_OK = 0,
  PPC_STATUS_NULL_POINTER = 1,
  PPC_STATUS_INVALID_ARGUMENT = 2,
  PPC_STATUS_EMPTY_CLOUD = 3,
  PPC_STATUS_NON_FINITE = 4,
  PPC_STATUS_TARGET_EXCEEDS_CLOUD = 5,
  PPC_STATUS_INSUFFICIENT_POINTS = 6,
  PPC_STATUS_NUMERICAL = 7,
  PPC_STATUS_FILE_NOT_FOUND = 8,
  PPC_STATUS_IO = 9,
  PPC_STATUS_PARSE = 10,
  PPC_STATUS_UNSUPPORTED_FORMAT = 11,
  PPC_STATUS_BUFFER_TOO_SMALL = 12,
  PPC_STATUS_INTERNAL = 13,
} PpcStatus;

typedef enum PpcSeedRule {
  PPC_SEED_RULE_FARTHEST_FROM_CENTROID = 0,
  PPC_SEED_RULE_FIRST_INDEX = 1,
} PpcSeedRule;

typedef enum PpcScore {
  // Squared-radius weights.
  PPC_SCORE_SQ = 0,
  // Fourth-power weights.
  PPC_SCORE_QUARTIC = 1,
  // Inverse-radius weights.
  PPC_SCORE_INVERSE = 2,
} PpcScore;

typedef enum PpcVerdict {
  PPC_VERDICT_OK = 0,
  PPC_VERDICT_NEAR_DEGENERATE = 1,
  PPC_VERDICT_DEGENERATE = 2,
} PpcVerdict;

// Opaque canonicalization result.
typedef struct PpcCanonical PpcCanonical;

// Opaque point cloud.
typedef struct PpcCloud PpcCloud;

typedef struct PpcThresholds {
  double gap_rel_min;
  double phi_rel_min;
  double warn_factor;
  double eps_abs;
} PpcThresholds;

typedef struct PpcDegeneracy {
  enum PpcVerdict verdict;
  bool spectrum_simple;
  bool phi_nondegenerate;
  double gap_ratio_12;
  double gap_ratio_23;
  double phi_margin_1;
  double phi_margin_2;
} PpcDegeneracy;

typedef struct PpcChamfer {
  double value;
  double forward_mean;
  double backward_mean;
} PpcChamfer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t ppc_abi_version(void);

// Message of the last failure on this thread, or `NULL` if none. The
// string is owned by the library and valid until the next failing call on
// the same thread.
const char *ppc_last_error(void);

// Default degeneracy thresholds.
struct PpcThresholds ppc_thresholds_default(void);

// Copies `n_points` rows of `xyz` (3 doubles each) into a new cloud.
//
// # Safety
// `xyz` must point to `3 * n_points` readable doubles; `out` must be a
// valid pointer to a handle slot.
enum PpcStatus ppc_cloud_new(const double *xyz, size_t n_points, struct PpcCloud **out);

// # Safety
// `cloud` must be `NULL` or a handle from this library not yet freed.
void ppc_cloud_free(struct PpcCloud *cloud);

// Number of points, or 0 for `NULL`.
//
// # Safety
// `cloud` must be `NULL` or a live handle.
size_t ppc_cloud_len(const struct PpcCloud *cloud);

// Copies the points into `out` (`3 * capacity_points` doubles).
//
// # Safety
// `out` must point to `3 * capacity_points` writable doubles.
enum PpcStatus ppc_cloud_copy_points(const struct PpcCloud *cloud,
                                     double *out,
                                     size_t capacity_points);

// Reads a cloud; the format follows the file extension
// (`.xyz`/`.txt`/`.pts`, `.csv`, `.ply`).
//
// # Safety
// `path` must be a NUL-terminated string; `out` a valid handle slot.
enum PpcStatus ppc_cloud_read(const char *path, struct PpcCloud **out);

// Writes a cloud; the format follows the file extension (`.ply` is
// written as binary little-endian).
//
// # Safety
// `cloud` must be a live handle; `path` a NUL-terminated string.
enum PpcStatus ppc_cloud_write(const struct PpcCloud *cloud, const char *path);

// Voxel then farthest-point downsampling. `voxel_size <= 0` skips the
// voxel stage and `fps_target == 0` skips FPS. When the voxel stage
// leaves fewer than `fps_target` points the voxel output is returned and
// `*short_cloud` (if not `NULL`) is set.
//
// # Safety
// `cloud` must be a live handle; `out` a valid handle slot; `short_cloud`
// `NULL` or writable.
enum PpcStatus ppc_downsample(const struct PpcCloud *cloud,
                              double voxel_size,
                              size_t fps_target,
                              enum PpcSeedRule seed_rule,
                              struct PpcCloud **out,
                              bool *short_cloud);

// Canonicalizes `cloud`. `thresholds` may be `NULL` for the defaults.
// Degenerate inputs still succeed; inspect [`ppc_canonical_degeneracy`].
//
// # Safety
// `cloud` must be a live handle; `thresholds` `NULL` or readable; `out` a
// valid handle slot.
enum PpcStatus ppc_canonicalize(const struct PpcCloud *cloud,
                                enum PpcScore score,
                                const struct PpcThresholds *thresholds,
                                struct PpcCanonical **out);

// # Safety
// `result` must be `NULL` or a handle from this library not yet freed.
void ppc_canonical_free(struct PpcCanonical *result);

// New cloud handle holding the canonical pose.
//
// # Safety
// `result` must be a live handle; `out` a valid handle slot.
enum PpcStatus ppc_canonical_cloud(const struct PpcCanonical *result, struct PpcCloud **out);

// Canonical basis, row-major; its columns are the signed principal axes.
//
// # Safety
// `result` must be a live handle; `out` must hold 9 doubles.
enum PpcStatus ppc_canonical_basis(const struct PpcCanonical *result, double *out);

// Centroid (3 doubles), eigenvalues in descending order (3 doubles),
// score values of the first two axes (2 doubles) and axis signs
// (3 values of ±1). Any output pointer may be `NULL` to skip it.
//
// # Safety
// `result` must be a live handle; non-`NULL` outputs must be writable for
// the sizes above.
enum PpcStatus ppc_canonical_frame(const struct PpcCanonical *result,
                                   double *centroid,
                                   double *eigenvalues,
                                   double *phi,
                                   int8_t *signs);

// # Safety
// `result` must be a live handle; `out` writable.
enum PpcStatus ppc_canonical_degeneracy(const struct PpcCanonical *result,
                                        struct PpcDegeneracy *out);

// Symmetric Chamfer distance; `brute` selects the exhaustive evaluation.
//
// # Safety
// `a` and `b` must be live handles; `out` writable.
enum PpcStatus ppc_chamfer(const struct PpcCloud *a,
                           const struct PpcCloud *b,
                           bool brute,
                           struct PpcChamfer *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPC_H */
