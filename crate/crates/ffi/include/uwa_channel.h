#ifndef UWA_CHANNEL_H
#define UWA_CHANNEL_H

#include <stddef.h>
#include <stdint.h>

typedef enum UwaStatus {
  UWA_STATUS_OK = 0,
  UWA_STATUS_NULL_POINTER = 1,
  UWA_STATUS_INVALID_UTF8 = 2,
  UWA_STATUS_PARSE = 3,
  UWA_STATUS_INVALID_CONFIG = 4,
  UWA_STATUS_OUTSIDE_HORIZON = 5,
  UWA_STATUS_GEOMETRY = 6,
  UWA_STATUS_NUMERIC = 7,
  UWA_STATUS_UNKNOWN_PRESET = 8,
  UWA_STATUS_BUFFER_TOO_SMALL = 9,
  UWA_STATUS_IO = 10,
  UWA_STATUS_PANIC = 11,
} UwaStatus;

typedef enum UwaPdpMode {
  UWA_PDP_MODE_CLUSTER = 0,
  UWA_PDP_MODE_RAY = 1,
} UwaPdpMode;

/**
 * One frozen draw of the random channel.
 */
typedef struct UwaRealization UwaRealization;

/**
 * Validated scenario.
 */
typedef struct UwaScenario UwaScenario;

typedef struct UwaComplex {
  double re;
  double im;
} UwaComplex;

/**
 * Ensemble delay statistics in seconds.
 */
typedef struct UwaDelayStats {
  double mean_delay;
  double rms_spread;
  double mean_delay_std;
  double rms_spread_std;
} UwaDelayStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null after a
 * successful call. The pointer stays valid until the next call into this
 * library from the same thread.
 */
const char *uwa_last_error(void);

/**
 * Parses and validates a JSON scenario.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UwaStatus uwa_scenario_from_json(const char *json, struct UwaScenario **out);

/**
 * Builds one of the named preset scenarios ("fig3", "table1", ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UwaStatus uwa_scenario_preset(const char *name, struct UwaScenario **out);

/**
 * Serializes the scenario to JSON. Release the string with
 * [`uwa_string_free`].
 *
 * # Safety
 * `scenario` must come from this library; `out` must be writable.
 */
enum UwaStatus uwa_scenario_to_json(const struct UwaScenario *scenario, char **out);

/**
 * Number of instants and frequencies in the scenario's evaluation grid.
 *
 * # Safety
 * `scenario` must come from this library; both outputs must be writable.
 */
enum UwaStatus uwa_scenario_grid_size(const struct UwaScenario *scenario,
                                      size_t *n_times,
                                      size_t *n_freqs);

/**
 * # Safety
 * `scenario` must be null or a handle from this library not yet freed.
 */
void uwa_scenario_free(struct UwaScenario *scenario);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void uwa_string_free(char *s);

/**
 * Draws realization `index` of the scenario's ensemble.
 *
 * # Safety
 * `scenario` must come from this library; `out` must be writable.
 */
enum UwaStatus uwa_realization_new(const struct UwaScenario *scenario,
                                   uint64_t index,
                                   struct UwaRealization **out);

/**
 * # Safety
 * `realization` must be null or a handle from this library not yet freed.
 */
void uwa_realization_free(struct UwaRealization *realization);

/**
 * Channel transfer function at time `t` and baseband offset `f`.
 *
 * # Safety
 * Handles must come from this library, the realization built from the
 * same scenario; `out` must be writable.
 */
enum UwaStatus uwa_ctf(const struct UwaRealization *realization,
                       const struct UwaScenario *scenario,
                       double t,
                       double f,
                       struct UwaComplex *out);

/**
 * Evaluates the CTF over the scenario grid into `buf`, row-major with one
 * row per instant. `len` must be at least `n_times * n_freqs`.
 *
 * # Safety
 * Handles must come from this library; `buf` must hold `len` writable
 * elements.
 */
enum UwaStatus uwa_ctf_frame(const struct UwaRealization *realization,
                             const struct UwaScenario *scenario,
                             struct UwaComplex *buf,
                             size_t len);

/**
 * Normalized Monte-Carlo time autocorrelation `|R(dt)| / |R(0)|` at the
 * anchor `(t, f)` for each of the `n` lags in `dts`, written to `out`.
 * `jobs = 0` uses the global thread pool.
 *
 * # Safety
 * `dts` and `out` must each hold `n` elements.
 */
enum UwaStatus uwa_acf(const struct UwaScenario *scenario,
                       double t,
                       double f,
                       const double *dts,
                       size_t n,
                       uint32_t realizations,
                       size_t jobs,
                       double *out);

/**
 * Ensemble mean delay and RMS delay spread at `(t, f)`.
 *
 * # Safety
 * `scenario` must come from this library; `out` must be writable.
 */
enum UwaStatus uwa_delay_stats(const struct UwaScenario *scenario,
                               double t,
                               double f,
                               enum UwaPdpMode mode,
                               uint32_t realizations,
                               size_t jobs,
                               struct UwaDelayStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UWA_CHANNEL_H */
