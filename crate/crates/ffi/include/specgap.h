#ifndef SPECGAP_H
#define SPECGAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success, everything else an error.
 */
typedef enum {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_PRECONDITION_FAILED = 3,
  SG_STATUS_NUMERICAL = 4,
  SG_STATUS_IO = 5,
  SG_STATUS_PANIC = 6,
} SgStatus;

/**
 * Lifting certificate handle.
 */
typedef struct SgCertificate SgCertificate;

/**
 * Symmetric matrix handle.
 */
typedef struct SgMatrix SgMatrix;

/**
 * Eigendecomposition handle.
 */
typedef struct SgSpectrum SgSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *sg_last_error_message(void);

/**
 * Builds a matrix from `n*n` row-major doubles. The input must be symmetric
 * up to `1e-12` relative to its largest entry.
 *
 * # Safety
 * `data` must hold `n*n` readable doubles and `out_matrix` must be writable.
 */
SgStatus sg_matrix_new(size_t n, const double *data, SgMatrix **out_matrix);

/**
 * # Safety
 * `m` must come from `sg_matrix_new` and not be freed twice. Null is ignored.
 */
void sg_matrix_free(SgMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle and `out_n` writable.
 */
SgStatus sg_matrix_dim(const SgMatrix *m, size_t *out_n);

/**
 * # Safety
 * `m` must be a live matrix handle and `out_spectrum` writable.
 */
SgStatus sg_eigendecompose(const SgMatrix *m, SgSpectrum **out_spectrum);

/**
 * Copies the eigenvalues in non-decreasing order. `len` must equal the
 * matrix dimension.
 *
 * # Safety
 * `s` must be a live spectrum handle and `values` hold `len` writable doubles.
 */
SgStatus sg_spectrum_eigenvalues(const SgSpectrum *s, double *values, size_t len);

/**
 * # Safety
 * `s` must come from `sg_eigendecompose`. Null is ignored.
 */
void sg_spectrum_free(SgSpectrum *s);

/**
 * Unique continuation constant `C_uc` and its minimizing `λ*`.
 *
 * # Safety
 * Both out pointers must be writable; `out_lambda_star` may be null.
 */
SgStatus sg_c_uc(size_t dim,
                 double g,
                 double delta,
                 double v_min,
                 double v_max,
                 double energy,
                 double n_dim,
                 double *out_value,
                 double *out_lambda_star);

/**
 * Lifting constant `κ = ϑ·C_uc(‖V‖, ‖W‖, s)`.
 *
 * # Safety
 * `out_value` must be writable.
 */
SgStatus sg_kappa(size_t dim,
                  double g,
                  double delta,
                  double theta,
                  double v_min,
                  double v_max,
                  double w_sup,
                  double s,
                  double n_dim,
                  double *out_value);

/**
 * Ghost-dimension profile `s_t(λ)`.
 *
 * # Safety
 * `out_value` must be writable.
 */
SgStatus sg_s_eval(double t, double lambda, double *out_value);

/**
 * Hill discriminant of `−u'' + Vu = Eu` for `V` sampled at `n` equispaced
 * nodes of one period.
 *
 * # Safety
 * `values` must hold `n` readable doubles and `out_value` be writable.
 */
SgStatus sg_hill_discriminant(const double *values,
                              size_t n,
                              double period,
                              double energy,
                              double *out_value);

/**
 * Measured projector distance and the sin 2Θ bound for `A` and `A+B` at `γ`.
 *
 * # Safety
 * Handles must be live and both out pointers writable.
 */
SgStatus sg_davis_kahan(const SgMatrix *a,
                        const SgMatrix *b,
                        double gamma,
                        double *out_measured,
                        double *out_bound);

/**
 * Certificate that every eigenvalue of `H` below `E` rises by at least `κ`
 * under `H + W`. A certificate is produced even when its preconditions fail;
 * inspect it with `sg_certificate_status`.
 *
 * # Safety
 * Handles must be live and `out_cert` writable.
 */
SgStatus sg_verify_bottom_lifting(const SgMatrix *h,
                                  const SgMatrix *w,
                                  double energy,
                                  double kappa,
                                  SgCertificate **out_cert);

/**
 * `0` pass, `1` fail, `2` precondition failed.
 *
 * # Safety
 * `c` must be a live certificate and `out_status` writable.
 */
SgStatus sg_certificate_status(const SgCertificate *c, int32_t *out_status);

/**
 * Smallest margin over the certified indices (NaN if no claim was made).
 *
 * # Safety
 * `c` must be a live certificate and `out_margin` writable.
 */
SgStatus sg_certificate_margin(const SgCertificate *c, double *out_margin);

/**
 * JSON rendering of the certificate; release it with `sg_string_free`.
 *
 * # Safety
 * `c` must be a live certificate and `out_json` writable.
 */
SgStatus sg_certificate_json(const SgCertificate *c, char **out_json);

/**
 * # Safety
 * `c` must come from `sg_verify_bottom_lifting`. Null is ignored.
 */
void sg_certificate_free(SgCertificate *c);

/**
 * # Safety
 * `s` must come from this library. Null is ignored.
 */
void sg_string_free(char *s);

/**
 * Runs a scenario file and writes its artifacts to `out_dir`. The
 * scenario's own exit code (0, 1 or 2) lands in `out_exit_code`.
 *
 * # Safety
 * Both strings must be NUL-terminated and `out_exit_code` writable.
 */
SgStatus sg_run_scenario(const char *config_path, const char *out_dir, int32_t *out_exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECGAP_H */
