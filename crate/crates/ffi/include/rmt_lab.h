#ifndef RMT_LAB_H
#define RMT_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmtStatus {
  RMT_STATUS_OK = 0,
  RMT_STATUS_INVALID_ARGUMENT = 1,
  RMT_STATUS_INVALID_SPEC = 2,
  RMT_STATUS_NOT_SYMMETRIC = 3,
  RMT_STATUS_NO_CONVERGENCE = 4,
  RMT_STATUS_DIMENSION_OVERFLOW = 5,
  RMT_STATUS_NUMERIC_GUARD = 6,
  RMT_STATUS_SIZE_MISMATCH = 7,
  RMT_STATUS_NULL_POINTER = 8,
  RMT_STATUS_BUFFER_TOO_SMALL = 9,
  RMT_STATUS_PANIC = 10,
} RmtStatus;

typedef enum RmtEnsembleKind {
  RMT_ENSEMBLE_KIND_GUE = 0,
  RMT_ENSEMBLE_KIND_GOE = 1,
  RMT_ENSEMBLE_KIND_WIGNER_COMPLEX_MATCHED = 2,
  RMT_ENSEMBLE_KIND_WIGNER_REAL_MATCHED = 3,
  RMT_ENSEMBLE_KIND_LUE = 4,
  RMT_ENSEMBLE_KIND_LOE = 5,
  RMT_ENSEMBLE_KIND_COVARIANCE_MATCHED = 6,
} RmtEnsembleKind;

/**
 * Opaque ensemble specification.
 */
typedef struct RmtEnsemble RmtEnsemble;

/**
 * Opaque GUE counting-kernel model.
 */
typedef struct RmtKernelModel RmtKernelModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, excluding the
 * terminating NUL.
 */
size_t rmt_last_error_length(void);

/**
 * Copy the last error message into `buf` (NUL terminated, truncated to
 * `len - 1` bytes). Returns the number of bytes written, excluding the NUL.
 */
size_t rmt_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmt_version(void);

double rmt_sc_density(double x);

double rmt_sc_cdf(double x);

enum RmtStatus rmt_sc_quantile(double p, double *out);

/**
 * Write the semicircle locations gamma_1..gamma_n into `out[0..n]`.
 */
enum RmtStatus rmt_gamma_table(size_t n, double *out, size_t len);

/**
 * Create an ensemble. `m` is the row count for covariance kinds and is
 * ignored otherwise.
 */
enum RmtStatus rmt_ensemble_new(enum RmtEnsembleKind kind,
                                size_t n,
                                size_t m,
                                struct RmtEnsemble **out);

void rmt_ensemble_free(struct RmtEnsemble *handle);

/**
 * Matrix dimension N of an ensemble, or 0 for a null handle.
 */
size_t rmt_ensemble_dim(const struct RmtEnsemble *handle);

/**
 * Draw one spectrum (ascending) into `out[0..N]`.
 */
enum RmtStatus rmt_sample_spectrum(const struct RmtEnsemble *handle,
                                   uint64_t seed,
                                   bool fast,
                                   double *out,
                                   size_t len);

enum RmtStatus rmt_kernel_model_new(size_t n, struct RmtKernelModel **out);

void rmt_kernel_model_free(struct RmtKernelModel *handle);

/**
 * E[N_t] for the GUE counting function.
 */
enum RmtStatus rmt_counting_mean(const struct RmtKernelModel *handle, double t, double *out);

/**
 * Var(N_t) for the GUE counting function.
 */
enum RmtStatus rmt_counting_variance(const struct RmtKernelModel *handle, double t, double *out);

/**
 * Squared 2-Wasserstein distance from the uniform measure on `support` to
 * the semicircle law.
 */
enum RmtStatus rmt_w2_squared_to_semicircle(const double *support, size_t len, double *out);

enum RmtStatus rmt_w1_to_semicircle(const double *support, size_t len, double *out);

enum RmtStatus rmt_kolmogorov_to_semicircle(const double *support, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMT_LAB_H */
