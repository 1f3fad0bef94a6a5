/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the subtractive modulative network library: coordinate
 * networks (SMN and baselines) fitted to images with full-batch Adam, plus
 * the spectral probes used to verify harmonic generation.
 *
 * All functions return smn_status; on failure smn_last_error() carries a
 * thread-local message. Objects are opaque handles released with the
 * matching *_free function. Strings returned through char** out-parameters
 * are released with smn_string_free.
 */
#ifndef SMN_H
#define SMN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SMN_API __declspec(dllexport)
#else
#define SMN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smn_status {
    SMN_OK = 0,
    SMN_ERR_INVALID_ARGUMENT = 1, /* null/ill-formed arguments */
    SMN_ERR_DIMENSION = 2,        /* operand shapes do not conform */
    SMN_ERR_CONFIG = 3,           /* invalid configuration field */
    SMN_ERR_IO = 4,               /* file unreadable/unwritable/corrupt */
    SMN_ERR_DIVERGED = 5,         /* training loss became non-finite */
    SMN_ERR_FAULT = 6,            /* non-finite parameters or gradients */
    SMN_ERR_INTERNAL = 7
} smn_status;

typedef struct smn_model smn_model;
typedef struct smn_image smn_image;
typedef struct smn_report smn_report;
typedef struct smn_spectrum smn_spectrum;

SMN_API const char* smn_version_string(void);
SMN_API const char* smn_status_name(smn_status status);
SMN_API const char* smn_last_error(void);
SMN_API void smn_string_free(char* s);

/* -- models ---------------------------------------------------------------
 * config_json fields (defaults in parentheses):
 *   arch ("smn"|"smn-add"|"mlp"|"siren"|"gauss"), in_dim (2), out_dim (3),
 *   hidden (256), k (3), omegas ([8,40,120]), amplitudes_learnable (true),
 *   num_modules (2), self_mask (true), combine (["mul",...]), depth (4),
 *   omega0 (40), s0 (30), pe_octaves (0), seed (0).
 */
SMN_API smn_status smn_model_create(const char* config_json, smn_model** out_model);
SMN_API void smn_model_free(smn_model* model);
SMN_API smn_status smn_model_config_json(const smn_model* model, char** out_json);
SMN_API smn_status smn_model_param_count(const smn_model* model, uint64_t* out_count);
SMN_API smn_status smn_model_save(const smn_model* model, const char* path);
SMN_API smn_status smn_model_load(const char* path, smn_model** out_model);

/* coords: in_dim x n, row-major (coords[r*n + j] is dimension r of sample j);
 * out_values: out_dim x n, row-major, caller-allocated. */
SMN_API smn_status smn_model_predict(const smn_model* model, const double* coords, size_t n,
                                     double* out_values);
/* Evaluates on the width x height coordinate grid and clamps to [0,1]. */
SMN_API smn_status smn_model_render(const smn_model* model, int width, int height,
                                    smn_image** out_image);

/* -- images ---------------------------------------------------------------
 * Pixels are doubles in [0,1], row-major, channel-interleaved.
 */
SMN_API smn_status smn_image_create(int width, int height, int channels, const double* pixels,
                                    smn_image** out_image);
SMN_API smn_status smn_image_load(const char* path, smn_image** out_image); /* .png .ppm .pgm */
SMN_API smn_status smn_image_save(const smn_image* image, const char* path);
/* kind: "gray", "grating", "checker", "natural" */
SMN_API smn_status smn_image_testcard(const char* kind, int width, int height, uint64_t seed,
                                      smn_image** out_image);
SMN_API smn_status smn_image_crop_center(const smn_image* image, int width, int height,
                                         smn_image** out_image);
SMN_API smn_status smn_image_info(const smn_image* image, int* out_width, int* out_height,
                                  int* out_channels);
/* Borrowed pointer, valid until the image is freed. */
SMN_API smn_status smn_image_pixels(const smn_image* image, const double** out_data,
                                    size_t* out_len);
SMN_API smn_status smn_image_psnr(const smn_image* a, const smn_image* b, double* out_db);
SMN_API void smn_image_free(smn_image* image);

/* -- training -------------------------------------------------------------
 * train_config_json fields (defaults): lr0 (2e-2), max_iters (5000),
 * patience (100), lr_factor (0.5), plateau_rel_threshold (1e-4), beta1 (0.9),
 * beta2 (0.999), eps (1e-8), seed (0), eval_every (50), min_lr (1e-6).
 * Pass NULL or "{}" for all defaults.
 *
 * The callback fires once per iteration; psnr is NaN except at eval
 * iterations. Returns SMN_ERR_DIVERGED with a partial report when the loss
 * becomes non-finite.
 */
typedef void (*smn_fit_callback)(void* user, int64_t iteration, double loss, double psnr,
                                 double lr);
SMN_API smn_status smn_fit(smn_model* model, const smn_image* target,
                           const char* train_config_json, smn_fit_callback callback, void* user,
                           smn_report** out_report);
SMN_API smn_status smn_report_json(const smn_report* report, char** out_json);
SMN_API smn_status smn_report_final_psnr(const smn_report* report, double* out_db);
SMN_API void smn_report_free(smn_report* report);

/* -- spectra --------------------------------------------------------------
 * One-sided magnitude spectra; frequencies in cycles per unit.
 */
SMN_API smn_status smn_spectrum_from_samples(const double* samples, size_t n,
                                             double sample_spacing, smn_spectrum** out_spectrum);
/* Depth-fold sine composition sin(sin(...sin(2*pi*omega*t))) on n samples
 * over t in [0,1). */
SMN_API smn_status smn_harmonic_probe(double omega, int depth, size_t n,
                                      smn_spectrum** out_spectrum);
SMN_API smn_status smn_spectrum_data(const smn_spectrum* spectrum, const double** out_frequencies,
                                     const double** out_magnitudes, size_t* out_bins);
/* Local maxima above floor_db (relative to the maximum); writes up to
 * capacity frequencies, always reports the true count. */
SMN_API smn_status smn_spectrum_peaks(const smn_spectrum* spectrum, double floor_db,
                                      double* out_frequencies, size_t capacity, size_t* out_count);
SMN_API smn_status smn_spectrum_save(const smn_spectrum* spectrum, const char* path);
SMN_API void smn_spectrum_free(smn_spectrum* spectrum);

/* -- verification ----------------------------------------------------------
 * Reverse-mode vs central finite differences (step h) on a random batch;
 * reports max over parameter tensors of ||ad-fd||_inf / (||fd||_inf+1e-10).
 * inject_fault != 0 deliberately corrupts one gradient (negative control).
 */
SMN_API smn_status smn_grad_check(const char* config_json, uint64_t seed, int n_samples, double h,
                                  int inject_fault, double* out_max_rel_err,
                                  char** out_worst_param);

#ifdef __cplusplus
}
#endif

#endif /* SMN_H */
