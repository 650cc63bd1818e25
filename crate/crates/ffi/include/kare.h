#ifndef KARE_H
#define KARE_H

#include <stddef.h>
#include <stdint.h>

typedef enum KareStatus {
  KARE_STATUS_OK = 0,
  KARE_STATUS_NULL_POINTER = 1,
  KARE_STATUS_INVALID_INPUT = 2,
  KARE_STATUS_DOMAIN = 3,
  KARE_STATUS_NUMERIC = 4,
  KARE_STATUS_DATA = 5,
  KARE_STATUS_CONFIG = 6,
  KARE_STATUS_PANIC = 7,
} KareStatus;

typedef enum KareKernel {
  KARE_KERNEL_RBF = 0,
  KARE_KERNEL_LAPLACIAN = 1,
  KARE_KERNEL_L1_EXP = 2,
} KareKernel;

// Eigendecomposition of a normalized Gram matrix, reusable across ridges.
typedef struct KareGramEigen KareGramEigen;

// A fitted kernel ridge predictor.
typedef struct KarePredictor KarePredictor;

// Scores of one ridge, see `kare_gram_eigen_scores`.
typedef struct KareScores {
  double train_error;
  double kare;
  double varrho;
  double log_likelihood;
  double theta;
  double theta_prime;
} KareScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null when the last
// call succeeded. Valid until the next call on the same thread.
const char *kare_last_error_message(void);

// Solves the signal capture threshold equation for the spectrum
// `eigenvalues[i]` with multiplicities `multiplicities[i]` (null means all
// ones).
//
// # Safety
// `eigenvalues` and, when not null, `multiplicities` must point to `len`
// readable elements; the output pointers must be writable.
enum KareStatus kare_solve_sct(const double *eigenvalues,
                               const uint64_t *multiplicities,
                               size_t len,
                               uint64_t n,
                               double lambda,
                               double *out_theta,
                               double *out_theta_prime);

// Writes the `n×n` Gram matrix of the `n×d` inputs `x` to `out`.
//
// # Safety
// `x` must hold `n*d` values and `out` must have room for `n*n`.
enum KareStatus kare_gram_matrix(enum KareKernel kernel,
                                 double lengthscale,
                                 const double *x,
                                 size_t n,
                                 size_t d,
                                 double *out);

// Decomposes the `n×n` Gram matrix `gram` (unnormalized).
//
// # Safety
// `gram` must hold `n*n` values; `out` must be writable.
enum KareStatus kare_gram_eigen_new(const double *gram, size_t n, struct KareGramEigen **out);

// # Safety
// `h` must be null or a pointer from `kare_gram_eigen_new` not yet freed.
void kare_gram_eigen_free(struct KareGramEigen *h);

// Stieltjes transform `m(-λ) = (1/N) Tr[(G/N + λI)^{-1}]`.
//
// # Safety
// `h` must be a live handle and `out` writable.
enum KareStatus kare_gram_eigen_stieltjes(const struct KareGramEigen *h,
                                          double lambda,
                                          double *out);

// Train error, KARE, `ϱ`, log-likelihood and the estimated threshold for
// labels `y` (length `n`) at ridge `lambda`.
//
// # Safety
// `h` must be a live handle, `y` must hold `n` values, `out` writable.
enum KareStatus kare_gram_eigen_scores(const struct KareGramEigen *h,
                                       const double *y,
                                       size_t n,
                                       double lambda,
                                       struct KareScores *out);

// Fits a kernel ridge predictor on `n×d` inputs `x` and labels `y`.
//
// # Safety
// `x` must hold `n*d` values, `y` `n` values; `out` writable.
enum KareStatus kare_predictor_fit(enum KareKernel kernel,
                                   double lengthscale,
                                   const double *x,
                                   size_t n,
                                   size_t d,
                                   const double *y,
                                   double lambda,
                                   struct KarePredictor **out);

// Predicts at `m×d` inputs `x`, writing `m` values to `out`.
//
// # Safety
// `h` must be a live handle, `x` must hold `m*d` values, `out` room for `m`.
enum KareStatus kare_predictor_predict(const struct KarePredictor *h,
                                       const double *x,
                                       size_t m,
                                       size_t d,
                                       double *out);

// # Safety
// `h` must be null or a pointer from `kare_predictor_fit` not yet freed.
void kare_predictor_free(struct KarePredictor *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KARE_H */
