#ifndef GLMBANDS_H
#define GLMBANDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GbStatus {
  GB_STATUS_OK = 0,
  GB_STATUS_NULL_POINTER = 1,
  GB_STATUS_INVALID_ARGUMENT = 2,
  GB_STATUS_INPUT_ERROR = 3,
  GB_STATUS_FIT_ERROR = 4,
  GB_STATUS_GEOMETRY_ERROR = 5,
  GB_STATUS_SOLVER_ERROR = 6,
  GB_STATUS_SIMULATION_ERROR = 7,
  GB_STATUS_PANIC = 8,
} GbStatus;

typedef enum GbSchema {
  GB_SCHEMA_BINOMIAL = 0,
  GB_SCHEMA_BERNOULLI = 1,
} GbSchema;

typedef enum GbLink {
  GB_LINK_LOGIT = 0,
  GB_LINK_PROBIT = 1,
} GbLink;

typedef enum GbSide {
  GB_SIDE_TWO_SIDED = 0,
  GB_SIDE_UPPER = 1,
  GB_SIDE_LOWER = 2,
} GbSide;

typedef enum GbIntervalKind {
  GB_INTERVAL_KIND_NARROW = 0,
  GB_INTERVAL_KIND_WIDE = 1,
  GB_INTERVAL_KIND_UNRESTRICTED = 2,
  /**
   * Uses the `a` and `b` fields of [`GbSimConfig`].
   */
  GB_INTERVAL_KIND_EXPLICIT = 3,
} GbIntervalKind;

typedef enum GbDesign {
  GB_DESIGN_EQUAL = 0,
  GB_DESIGN_ENDPOINT_CONCENTRATED = 1,
  GB_DESIGN_CENTER_CONCENTRATED = 2,
} GbDesign;

/**
 * Opaque band handle.
 */
typedef struct GbBand GbBand;

/**
 * Opaque dataset handle.
 */
typedef struct GbDataset GbDataset;

/**
 * Opaque fitted-model handle.
 */
typedef struct GbFit GbFit;

/**
 * One grid point of a band. Absent bounds (one-sided bands) are NaN.
 */
typedef struct GbBandRow {
  double x;
  double center_linear;
  double se;
  double fitted_p;
  double lower_p;
  double upper_p;
} GbBandRow;

typedef struct GbSimConfig {
  double beta0;
  double beta1;
  enum GbLink link;
  enum GbIntervalKind interval_kind;
  double a;
  double b;
  enum GbDesign design;
  size_t n;
  size_t replications;
  double alpha;
  /**
   * `Lower` is treated as one-sided.
   */
  enum GbSide side;
  uint64_t seed;
} GbSimConfig;

typedef struct GbSimResult {
  double estimated_error;
  double std_error;
  size_t replications_used;
  size_t fit_failures;
  double a;
  double b;
} GbSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next `gb_*` call on the same thread.
 */
const char *gb_last_error_message(void);

/**
 * Parses CSV text (`x,successes,trials` or `x,y`).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GbStatus gb_dataset_parse(const char *text, enum GbSchema schema, struct GbDataset **out_ds);

/**
 * The bundled six-dose mutagenicity dataset.
 *
 * # Safety
 * `out` must be writable.
 */
enum GbStatus gb_dataset_lavelle(struct GbDataset **out_ds);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t gb_dataset_len(const struct GbDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void gb_dataset_free(struct GbDataset *ds);

/**
 * Fits the model with default settings.
 *
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
enum GbStatus gb_fit(const struct GbDataset *ds, enum GbLink link, struct GbFit **out_fit);

/**
 * Writes `(beta0, beta1)` to `out[0..2]`.
 *
 * # Safety
 * `f` must be a live handle; `out` must hold two doubles.
 */
enum GbStatus gb_fit_coefficients(const struct GbFit *f, double *out_beta);

/**
 * Writes the inverse information matrix row-major to `out[0..4]`.
 *
 * # Safety
 * `f` must be a live handle; `out` must hold four doubles.
 */
enum GbStatus gb_fit_info_inv(const struct GbFit *f, double *out_m);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void gb_fit_free(struct GbFit *f);

/**
 * Cone angle of the interval `(a, b)`; pass `-INFINITY, INFINITY` for the
 * whole line.
 *
 * # Safety
 * `f` must be a live handle; `out_phi` must be writable.
 */
enum GbStatus gb_cone_angle(const struct GbFit *f, double a, double b, double *out_phi);

/**
 * Critical value for cone angle `phi` at simultaneous level `level`.
 *
 * # Safety
 * `out_w` must be writable.
 */
enum GbStatus gb_critical_value(double phi, double level, enum GbSide side, double *out_w);

/**
 * Simultaneous coverage probability at critical value `w`.
 *
 * # Safety
 * `out_p` must be writable.
 */
enum GbStatus gb_coverage(double w, double phi, enum GbSide side, double *out_p);

/**
 * Builds a band on `grid` points. For the whole line (`a = -INFINITY`,
 * `b = INFINITY`) the grid spans `[plot_lo, plot_hi]`; otherwise the
 * plot range is ignored.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum GbStatus gb_band_build(const struct GbFit *f,
                            double a,
                            double b,
                            enum GbSide side,
                            double level,
                            size_t grid,
                            double plot_lo,
                            double plot_hi,
                            struct GbBand **out_band);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `band` must be null or a live handle.
 */
size_t gb_band_len(const struct GbBand *band);

/**
 * Critical value used by the band, or NaN for a null handle.
 *
 * # Safety
 * `band` must be null or a live handle.
 */
double gb_band_critical_value(const struct GbBand *band);

/**
 * # Safety
 * `band` must be a live handle; `out_row` must be writable.
 */
enum GbStatus gb_band_row(const struct GbBand *band, size_t index, struct GbBandRow *out_row);

/**
 * # Safety
 * `band` must be null or a handle not yet freed.
 */
void gb_band_free(struct GbBand *band);

/**
 * Monte Carlo coverage-error estimate. Deterministic for a given seed.
 *
 * # Safety
 * `config` must point to a valid configuration; `out` must be writable.
 */
enum GbStatus gb_simulate(const struct GbSimConfig *config, struct GbSimResult *out_res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLMBANDS_H */
