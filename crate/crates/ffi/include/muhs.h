#ifndef MUHS_H
#define MUHS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MuhsStatus {
  MUHS_OK = 0,
  MUHS_NULL_POINTER = 1,
  MUHS_INVALID_INPUT = 2,
  MUHS_NUMERICAL = 3,
  MUHS_UNSATISFIABLE = 4,
  MUHS_PANIC = 5,
  MUHS_BUFFER_TOO_SMALL = 6,
} MuhsStatus;

/*
 Verdict of the a-priori classification.
 */
typedef enum MuhsVerdict {
  MUHS_GLOBAL = 0,
  MUHS_BLOWUP_CERTIFIED = 1,
  MUHS_BLOWUP_HS = 2,
  MUHS_STEADY_CONSTANT = 3,
  MUHS_INDETERMINATE = 4,
} MuhsVerdict;

typedef enum MuhsWaveFamily {
  MUHS_SMOOTH = 0,
  MUHS_CUSPED = 1,
} MuhsWaveFamily;

/*
 Samples of a periodic field on a uniform grid.
 */
typedef struct MuhsField MuhsField;

/*
 A finished integration.
 */
typedef struct MuhsTrajectory MuhsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated, truncated
 to `len`) and returns the full message length in bytes.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t muhs_last_error(char *buf, size_t len);

/*
 Static NUL-terminated version string.
 */
const char *muhs_version(void);

/*
 Field from `n` samples at `x_j = j/n`.

 # Safety
 `samples` must point to `n` readable doubles; `out` must be writable.
 */
enum MuhsStatus muhs_field_from_samples(const double *samples, size_t n, struct MuhsField **out);

/*
 Field from an initial-condition expression such as `"0.2 + cos(1)"`.

 # Safety
 `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum MuhsStatus muhs_field_from_spec(const char *spec, size_t n, struct MuhsField **out);

/*
 # Safety
 `field` must be null or a handle from this library, not yet freed.
 */
void muhs_field_free(struct MuhsField *field);

/*
 Number of samples, or 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t muhs_field_len(const struct MuhsField *field);

/*
 Copies the samples into `buf`, which must hold at least `muhs_field_len` doubles.

 # Safety
 `field` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum MuhsStatus muhs_field_samples(const struct MuhsField *field, double *buf, size_t len);

/*
 `m = A u = mu(u) - u_xx`.

 # Safety
 `u` must be a live handle; `out` must be writable.
 */
enum MuhsStatus muhs_apply_a(const struct MuhsField *u, struct MuhsField **out);

/*
 `u = A^{-1} m`.

 # Safety
 `m` must be a live handle; `out` must be writable.
 */
enum MuhsStatus muhs_apply_a_inverse(const struct MuhsField *m, struct MuhsField **out);

/*
 A-priori verdict and its time bound (NaN when there is none).

 # Safety
 `u` must be a live handle; `verdict` and `t_bound` must be writable.
 */
enum MuhsStatus muhs_classify(const struct MuhsField *u,
                              enum MuhsVerdict *verdict,
                              double *t_bound);

/*
 Integrates to `t_end` with the default settings and the given CFL number.

 # Safety
 `u0` must be a live handle; `out` must be writable.
 */
enum MuhsStatus muhs_integrate(const struct MuhsField *u0,
                               double t_end,
                               double cfl,
                               struct MuhsTrajectory **out);

/*
 # Safety
 `traj` must be null or a live handle.
 */
void muhs_trajectory_free(struct MuhsTrajectory *traj);

/*
 `completed` is 1 when `t_end` was reached; otherwise `t_est` holds the blow-up
 estimate. `t_final` is the last time reached.

 # Safety
 `traj` must be a live handle; the outputs must be writable.
 */
enum MuhsStatus muhs_trajectory_outcome(const struct MuhsTrajectory *traj,
                                        int32_t *completed,
                                        double *t_est,
                                        double *t_final);

/*
 Copy of the last stored state.

 # Safety
 `traj` must be a live handle; `out` must be writable.
 */
enum MuhsStatus muhs_trajectory_final(const struct MuhsTrajectory *traj, struct MuhsField **out);

/*
 Period and integral over one period of the traveling wave with trough `m_lo`,
 crest `m_hi`, speed `c` and frozen mean `mu`.

 # Safety
 `period` and `integral` must be writable.
 */
enum MuhsStatus muhs_wave_stats(double c,
                                double m_lo,
                                double m_hi,
                                double mu,
                                double *period,
                                double *integral);

/*
 Period-one wave with mean `mu`, keeping the trough at `m_anchor`.

 # Safety
 `m_hi` and `mu` must be writable.
 */
enum MuhsStatus muhs_solve_period_one(double c,
                                      enum MuhsWaveFamily family,
                                      double m_anchor,
                                      double *m_hi,
                                      double *mu);

/*
 Sectional curvature of the plane spanned by `u` and `v`.

 # Safety
 `u`, `v` must be live handles on the same grid; `k` must be writable.
 */
enum MuhsStatus muhs_sectional(const struct MuhsField *u, const struct MuhsField *v, double *k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUHS_H */
