#ifndef PHOTONLAB_H
#define PHOTONLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call.
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  // A required pointer argument was NULL.
  PL_STATUS_NULL_POINTER = 1,
  // Invalid argument, configuration or input format.
  PL_STATUS_INVALID_ARGUMENT = 2,
  // Fit failure, insufficient data or an out-of-range result.
  PL_STATUS_NUMERICAL = 3,
  PL_STATUS_IO = 4,
  // A string argument was not valid UTF-8.
  PL_STATUS_UTF8 = 5,
  // Internal error; the library state is unaffected.
  PL_STATUS_PANIC = 6,
} PlStatus;

// Opaque fit report.
typedef struct PlFitReport PlFitReport;

// Opaque coincidence histogram.
typedef struct PlHistogram PlHistogram;

// Opaque time-tag stream.
typedef struct PlStream PlStream;

// g²(0) with the counts it was formed from.
typedef struct PlG2 {
  double value;
  double error;
  uint64_t center_counts;
  double side_mean;
} PlG2;

// Settings of the HOM cluster fit. Zero `clusters` or `passes` select the
// library defaults.
typedef struct PlHomOptions {
  // Radiative decay rate (ns⁻¹).
  double gamma;
  // Interferometer delay (ns).
  double delta;
  double rep_period;
  // Coincidence IRF width (ns).
  double irf_sigma;
  uint32_t clusters;
  uint32_t passes;
} PlHomOptions;

// A value with its standard error.
typedef struct PlEstimate {
  double value;
  double error;
} PlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread, or an empty string. The
// pointer stays valid until the next call on the same thread.
const char *pl_last_error(void);

// Library name and version as a static string.
const char *pl_version(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void pl_string_free(char *s);

// Simulates the run described by a TOML configuration document.
//
// # Safety
// `config_toml` must be a NUL-terminated string and `out` writable.
enum PlStatus pl_simulate(const char *config_toml, struct PlStream **out);

// Simulates a bundled configuration; `n_periods` 0 keeps its period count.
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum PlStatus pl_simulate_bundled(const char *name,
                                  uint64_t n_periods,
                                  uint64_t seed,
                                  struct PlStream **out);

// Builds a stream from `n` records in any order.
//
// # Safety
// `channels` and `timestamps_ps` must hold `n` elements and `out` be writable.
enum PlStatus pl_stream_from_records(const uint8_t *channels,
                                     const uint64_t *timestamps_ps,
                                     size_t n,
                                     uint64_t duration_ps,
                                     struct PlStream **out);

// Reads a stream file, CSV if the name ends in `.csv` and binary otherwise.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum PlStatus pl_stream_read(const char *path, struct PlStream **out);

// Number of records.
//
// # Safety
// `stream` must be a live handle and `out` writable.
enum PlStatus pl_stream_len(const struct PlStream *stream, size_t *out);

// Number of records on one detector channel.
//
// # Safety
// `stream` must be a live handle and `out` writable.
enum PlStatus pl_stream_count(const struct PlStream *stream, uint8_t channel, size_t *out);

// # Safety
// `stream` must be NULL or a live handle; it is invalid afterwards.
void pl_stream_free(struct PlStream *stream);

// Histogram of channel-1 minus channel-0 delays within ±`window_ps`.
//
// # Safety
// `stream` must be a live handle and `out` writable.
enum PlStatus pl_correlate(const struct PlStream *stream,
                           uint64_t bin_width_ps,
                           uint64_t window_ps,
                           struct PlHistogram **out);

// Reads a histogram CSV as written by the `correlate` command.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum PlStatus pl_histogram_read_csv(const char *path, struct PlHistogram **out);

// Number of bins.
//
// # Safety
// `hist` must be a live handle and `out` writable.
enum PlStatus pl_histogram_len(const struct PlHistogram *hist, size_t *out);

// Copies up to `capacity` bin counts into `counts` and the bin centres (ns)
// into `centers_ns` when it is not NULL. `written` receives the number of
// bins copied.
//
// # Safety
// `counts` (and `centers_ns` if given) must hold `capacity` elements.
enum PlStatus pl_histogram_bins(const struct PlHistogram *hist,
                                uint64_t *counts,
                                double *centers_ns,
                                size_t capacity,
                                size_t *written);

// # Safety
// `hist` must be NULL or a live handle; it is invalid afterwards.
void pl_histogram_free(struct PlHistogram *hist);

// g²(0) from the zero-delay peak against side peaks within `norm_span`.
//
// # Safety
// `hist` must be a live handle and `out` writable.
enum PlStatus pl_g2_zero(const struct PlHistogram *hist,
                         double rep_period,
                         double center_window,
                         double norm_span,
                         struct PlG2 *out);

// Fits the HOM cluster model.
//
// # Safety
// `hist` must be a live handle, `options` readable and `out` writable.
enum PlStatus pl_fit_hom(const struct PlHistogram *hist,
                         const struct PlHomOptions *options,
                         struct PlFitReport **out);

// Fits `C_sat(1 − e^{−P/P_sat})` to `n` points of power, counts and error.
//
// # Safety
// The three arrays must hold `n` elements and `out` be writable.
enum PlStatus pl_fit_saturation(const double *power,
                                const double *counts,
                                const double *error,
                                size_t n,
                                struct PlFitReport **out);

// A fitted parameter by name.
//
// # Safety
// `report` must be a live handle, `name` NUL-terminated and `out` writable.
enum PlStatus pl_fit_report_param(const struct PlFitReport *report,
                                  const char *name,
                                  struct PlEstimate *out);

// A derived quantity by name.
//
// # Safety
// `report` must be a live handle, `name` NUL-terminated and `out` writable.
enum PlStatus pl_fit_report_derived(const struct PlFitReport *report,
                                    const char *name,
                                    struct PlEstimate *out);

// Reduced χ² of the fit.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum PlStatus pl_fit_report_chi2_per_dof(const struct PlFitReport *report, double *out);

// The full report as JSON. Release the string with [`pl_string_free`].
//
// # Safety
// `report` must be a live handle and `out` writable.
enum PlStatus pl_fit_report_json(const struct PlFitReport *report, char **out);

// # Safety
// `report` must be NULL or a live handle; it is invalid afterwards.
void pl_fit_report_free(struct PlFitReport *report);

// Collection efficiency relative to a reference emitter of known efficiency.
//
// # Safety
// `out` must be writable.
enum PlStatus pl_eta_relative(struct PlEstimate c_sat,
                              struct PlEstimate c_sat_reference,
                              struct PlEstimate eta_reference,
                              struct PlEstimate *out);

// Collection efficiency from the saturated count rate (s⁻¹), setup
// transmission, repetition rate (s⁻¹) and the product of mixing and
// preparation efficiency.
//
// # Safety
// `out` must be writable.
enum PlStatus pl_eta_absolute(struct PlEstimate c_sat,
                              struct PlEstimate eta_setup,
                              double rep_rate,
                              struct PlEstimate alpha_eps,
                              struct PlEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTONLAB_H */
