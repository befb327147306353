#ifndef BIASLAB_H
#define BIASLAB_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  BIASLAB_STATUS_OK = 0,
  BIASLAB_STATUS_NULL_POINTER = 1,
  BIASLAB_STATUS_INVALID_ARGUMENT = 2,
  BIASLAB_STATUS_BUFFER_TOO_SMALL = 3,
  BIASLAB_STATUS_IO = 4,
  BIASLAB_STATUS_FORMAT = 5,
  BIASLAB_STATUS_DENOISER = 6,
  BIASLAB_STATUS_SAMPLER = 7,
  BIASLAB_STATUS_METRICS = 8,
  BIASLAB_STATUS_CONFIG = 9,
  BIASLAB_STATUS_PANIC = 10,
} BiaslabStatus;

/**
 * Opaque colour-biased dataset.
 */
typedef struct BiaslabDataset BiaslabDataset;

/**
 * Opaque exact denoiser.
 */
typedef struct BiaslabDenoiser BiaslabDenoiser;

/**
 * Aligned-fraction estimate with its Clopper-Pearson interval.
 */
typedef struct {
  uint64_t k;
  uint64_t n;
  double rho_hat;
  double ci_lower;
  double ci_upper;
  double alpha;
} BiaslabRhoEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *biaslab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *biaslab_version(void);

/**
 * Exact two-sided interval for `k` successes out of `n`.
 */
BiaslabStatus biaslab_clopper_pearson(uint64_t k,
                                      uint64_t n,
                                      double alpha,
                                      double *lower,
                                      double *upper);

/**
 * Writes the `n_steps + 1` noise levels into `out_sigmas`, which must hold
 * at least `n_steps + 1` values.
 */
BiaslabStatus biaslab_karras_schedule(size_t n_steps,
                                      double sigma_min,
                                      double sigma_max,
                                      double exponent,
                                      double *out_sigmas,
                                      size_t out_len);

/**
 * Aligned fraction of `n` verdicts (nonzero bytes are aligned).
 */
BiaslabStatus biaslab_estimate_rho(const uint8_t *verdicts,
                                   size_t n,
                                   double alpha,
                                   BiaslabRhoEstimate *out_estimate);

/**
 * Colour-oracle verdict for an interleaved RGB image with values in [0, 1].
 * `palette_json` may be null for the built-in ten-colour table.
 */
BiaslabStatus biaslab_color_oracle(const float *rgb,
                                   size_t width,
                                   size_t height,
                                   const char *palette_json,
                                   uint8_t target,
                                   float white_threshold,
                                   uint8_t *out_predicted,
                                   bool *out_aligned);

/**
 * Builds an analytic Gaussian-mixture denoiser from its JSON description.
 */
BiaslabStatus biaslab_mixture_from_json(const char *json, BiaslabDenoiser **out_denoiser);

/**
 * Builds the ideal empirical denoiser over a dataset's images.
 */
BiaslabStatus biaslab_denoiser_from_dataset(const BiaslabDataset *dataset,
                                            BiaslabDenoiser **out_denoiser);

void biaslab_denoiser_free(BiaslabDenoiser *denoiser);

/**
 * Dimension of the denoiser's state, or 0 for a null handle.
 */
size_t biaslab_denoiser_dim(const BiaslabDenoiser *denoiser);

size_t biaslab_denoiser_num_classes(const BiaslabDenoiser *denoiser);

/**
 * Image width and height of an empirical denoiser; zeros for mixtures.
 */
BiaslabStatus biaslab_denoiser_image_shape(const BiaslabDenoiser *denoiser,
                                           size_t *out_width,
                                           size_t *out_height);

/**
 * `D(x; sigma)` for class index `class`, or the whole population when
 * `class < 0`.
 */
BiaslabStatus biaslab_denoise(const BiaslabDenoiser *denoiser,
                              const double *x,
                              size_t dim,
                              double sigma,
                              int32_t class_,
                              double *out_denoised);

/**
 * Score `(D(x; sigma) - x) / sigma^2`; `class` as in [`biaslab_denoise`].
 */
BiaslabStatus biaslab_score(const BiaslabDenoiser *denoiser,
                            const double *x,
                            size_t dim,
                            double sigma,
                            int32_t class_,
                            double *out_score);

/**
 * Draws `count` samples with the sampler described by `config_json`. Sample
 * `i` occupies `out_states[i * dim .. (i + 1) * dim]`; `out_len` must be at
 * least `count * dim`.
 */
BiaslabStatus biaslab_sample(const BiaslabDenoiser *denoiser,
                             const char *config_json,
                             int32_t class_,
                             size_t count,
                             uint64_t seed,
                             double *out_states,
                             size_t out_len);

/**
 * Builds a colour-biased dataset from procedural digits.
 */
BiaslabStatus biaslab_dataset_synthetic(size_t per_class,
                                        const uint8_t *classes,
                                        size_t num_classes,
                                        double rho,
                                        size_t size,
                                        uint64_t seed,
                                        BiaslabDataset **out_dataset);

BiaslabStatus biaslab_dataset_load(const char *path, BiaslabDataset **out_dataset);

BiaslabStatus biaslab_dataset_save(const BiaslabDataset *dataset, const char *path);

void biaslab_dataset_free(BiaslabDataset *dataset);

/**
 * Number of samples, or 0 for a null handle.
 */
size_t biaslab_dataset_len(const BiaslabDataset *dataset);

/**
 * Empirical aligned fraction on bias axis `axis`.
 */
BiaslabStatus biaslab_dataset_rho(const BiaslabDataset *dataset, size_t axis, double *out_rho);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIASLAB_H */
