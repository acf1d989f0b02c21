#ifndef MUSIC_FFI_H
#define MUSIC_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum MusicStatus {
  MUSIC_STATUS_OK = 0,
  MUSIC_STATUS_NULL_POINTER = 1,
  MUSIC_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid configuration, argument domain or shape.
   */
  MUSIC_STATUS_INVALID = 3,
  MUSIC_STATUS_NUMERICAL = 4,
  MUSIC_STATUS_IO = 5,
  MUSIC_STATUS_BUFFER_TOO_SMALL = 6,
  MUSIC_STATUS_OUT_OF_RANGE = 7,
  MUSIC_STATUS_PANIC = 8,
} MusicStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct MusicConfig MusicConfig;

/**
 * Opaque experiment result.
 */
typedef struct MusicResult MusicResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a
 * successful one. Valid until the next call on the same thread.
 */
const char *music_last_error(void);

/**
 * `J_n(x)`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum MusicStatus music_bessel_j(uint32_t n, double x, double *out);

/**
 * `Y_n(x)` for `x > 0`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum MusicStatus music_bessel_y(uint32_t n, double x, double *out);

/**
 * Parses and validates a JSON configuration.
 *
 * # Safety
 * `json` must be null or a nul-terminated string; `out` must be null or
 * writable. On success `*out` owns a handle for [`music_config_free`].
 */
enum MusicStatus music_config_from_json(const char *json, struct MusicConfig **out);

/**
 * Built-in case `1..=8` with example `"EPS1"`, `"EPS2"`, `"MU1"` or `"MU2"`.
 *
 * # Safety
 * As for [`music_config_from_json`].
 */
enum MusicStatus music_config_from_case(uint8_t case_id,
                                        const char *example,
                                        uint64_t seed,
                                        struct MusicConfig **out);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
enum MusicStatus music_config_set_seed(struct MusicConfig *config, uint64_t seed);

/**
 * Sets the SNR in dB; `noiseless != 0` removes the noise instead.
 *
 * # Safety
 * `config` must be null or a live handle.
 */
enum MusicStatus music_config_set_snr_db(struct MusicConfig *config, double snr_db, bool noiseless);

/**
 * Resolved configuration as nul-terminated JSON; `written` counts the nul.
 *
 * # Safety
 * `buffer` must be null or hold `capacity` bytes; `written` must be writable.
 */
enum MusicStatus music_config_to_json(const struct MusicConfig *config,
                                      char *buffer,
                                      size_t capacity,
                                      size_t *written);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void music_config_free(struct MusicConfig *config);

/**
 * Runs the experiment; nothing is written to disk.
 *
 * # Safety
 * `config` must be null or live; `out` must be null or writable. On success
 * `*out` owns a handle for [`music_result_free`].
 */
enum MusicStatus music_run(const struct MusicConfig *config, struct MusicResult **out);

/**
 * # Safety
 * `result` must be null or live; `out` writable.
 */
enum MusicStatus music_result_signal_dim(const struct MusicResult *result, size_t *out);

/**
 * Achieved SNR; `*has_noise` is false for noiseless runs.
 *
 * # Safety
 * `result` must be null or live; `out` and `has_noise` writable.
 */
enum MusicStatus music_result_achieved_snr_db(const struct MusicResult *result,
                                              double *out,
                                              bool *has_noise);

/**
 * Singular values in descending order.
 *
 * # Safety
 * `buffer` must be null or hold `capacity` doubles; `written` writable.
 */
enum MusicStatus music_result_singular_values(const struct MusicResult *result,
                                              double *buffer,
                                              size_t capacity,
                                              size_t *written);

/**
 * Grid size: `nx` nodes along `x`, `ny` along `y`.
 *
 * # Safety
 * `result` must be null or live; `nx`, `ny` writable.
 */
enum MusicStatus music_result_map_shape(const struct MusicResult *result, size_t *nx, size_t *ny);

/**
 * Map values, row-major with `y` outer: `buffer[j * nx + i]`.
 *
 * # Safety
 * As for [`music_result_singular_values`].
 */
enum MusicStatus music_result_map_values(const struct MusicResult *result,
                                         double *buffer,
                                         size_t capacity,
                                         size_t *written);

/**
 * # Safety
 * `result` must be null or live; `out` writable.
 */
enum MusicStatus music_result_peak_count(const struct MusicResult *result, size_t *out);

/**
 * Peak `index` (0 is the highest).
 *
 * # Safety
 * `result` must be null or live; `x`, `y`, `value` writable.
 */
enum MusicStatus music_result_peak(const struct MusicResult *result,
                                   size_t index,
                                   double *x,
                                   double *y,
                                   double *value);

/**
 * Writes the configured files into `dir`, removing them again on failure.
 *
 * # Safety
 * `result` must be null or live; `dir` null or nul-terminated.
 */
enum MusicStatus music_result_write(const struct MusicResult *result, const char *dir);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void music_result_free(struct MusicResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUSIC_FFI_H */
