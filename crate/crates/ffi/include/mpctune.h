/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef MPCTUNE_H
#define MPCTUNE_H

#include <stddef.h>
#include <stdint.h>

typedef enum MpctuneBackoffCase {
  MPCTUNE_BACKOFF_CASE_IN_BAND = 0,
  MPCTUNE_BACKOFF_CASE_ABOVE_BAND = 1,
  MPCTUNE_BACKOFF_CASE_BELOW_BAND = 2,
  MPCTUNE_BACKOFF_CASE_OVERFLOW = 3,
  MPCTUNE_BACKOFF_CASE_DRY_UP = 4,
} MpctuneBackoffCase;

typedef enum MpctuneLpStatus {
  MPCTUNE_LP_STATUS_OPTIMAL = 0,
  MPCTUNE_LP_STATUS_INFEASIBLE = 1,
  MPCTUNE_LP_STATUS_UNBOUNDED = 2,
} MpctuneLpStatus;

typedef enum MpctuneRowSense {
  MPCTUNE_ROW_SENSE_LESS_EQUAL = 0,
  MPCTUNE_ROW_SENSE_GREATER_EQUAL = 1,
  MPCTUNE_ROW_SENSE_EQUAL = 2,
} MpctuneRowSense;

typedef enum MpctuneStatus {
  MPCTUNE_STATUS_OK = 0,
  MPCTUNE_STATUS_NULL_ARGUMENT = 1,
  MPCTUNE_STATUS_CONFIG = 2,
  MPCTUNE_STATUS_NUMERICAL = 3,
  /**
   * Results are incomplete; the output handle, if any, holds what was
   * computed.
   */
  MPCTUNE_STATUS_PARTIAL = 4,
  MPCTUNE_STATUS_DOMAIN = 5,
  MPCTUNE_STATUS_DIMENSION = 6,
  MPCTUNE_STATUS_IO = 7,
  MPCTUNE_STATUS_OBJECTIVE = 8,
  MPCTUNE_STATUS_PANIC = 9,
} MpctuneStatus;

typedef struct MpctuneGp MpctuneGp;

typedef struct MpctuneGrid MpctuneGrid;

typedef struct MpctuneLp MpctuneLp;

typedef struct MpctunePlantConfig MpctunePlantConfig;

typedef struct MpctuneSeries MpctuneSeries;

typedef struct MpctuneTrace MpctuneTrace;

typedef struct MpctuneTankUpdate {
  double soc;
  double lower;
  double upper;
  enum MpctuneBackoffCase update_case;
  double overflow;
  double deficit;
} MpctuneTankUpdate;

typedef struct MpctuneSimSummary {
  double total_cost;
  double electricity;
  double demand;
  double water;
  double gas;
  double slack_penalty;
  size_t hours;
  size_t overflow_events;
  size_t dry_up_events;
} MpctuneSimSummary;

typedef struct MpctuneBoConfig {
  double kappa;
  size_t n_init;
  size_t max_iter;
  uint64_t seed;
  size_t restarts;
  double lengthscale;
  double nu;
  double noise;
  /**
   * Early-stop threshold on relative improvement; zero or negative
   * disables it.
   */
  double rel_tol;
} MpctuneBoConfig;

/**
 * Objective callback: writes the value at `x` (length `d`) to `value` and
 * returns 0, or returns nonzero to stop the run.
 */
typedef int (*MpctuneObjective)(void *user, const double *x, size_t d, double *value);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *mpctune_last_error(void);

/**
 * Library version, static storage.
 */
const char *mpctune_version(void);

/**
 * Frees a string returned by this library.
 */
void mpctune_string_free(char *s);

/**
 * Fits a GP to `n` points of dimension `d` (row-major `x`, inputs in the
 * unit box) with targets `y`. `nu` is 0.5, 1.5 or 2.5.
 */
enum MpctuneStatus mpctune_gp_fit(const double *x,
                                  size_t n,
                                  size_t d,
                                  const double *y,
                                  double lengthscale,
                                  double nu,
                                  double noise,
                                  struct MpctuneGp **out);

/**
 * Posterior mean and variance at `q` (length `d`), original output scale.
 */
enum MpctuneStatus mpctune_gp_posterior(const struct MpctuneGp *gp,
                                        const double *q,
                                        size_t d,
                                        double *mean,
                                        double *variance);

void mpctune_gp_free(struct MpctuneGp *gp);

/**
 * Storage bound update for one tank after the plant reaches `soc_next`.
 */
enum MpctuneStatus mpctune_backoff_update(double soc_next,
                                          double beta,
                                          double capacity,
                                          struct MpctuneTankUpdate *out);

/**
 * Empty minimization problem.
 */
enum MpctuneStatus mpctune_lp_new(struct MpctuneLp **out);

/**
 * Adds a variable with bounds (±INFINITY allowed) and cost; writes its index.
 */
enum MpctuneStatus mpctune_lp_add_var(struct MpctuneLp *lp,
                                      double lower,
                                      double upper,
                                      double cost,
                                      size_t *index);

/**
 * Adds `sum(values[k] * x[indices[k]]) <sense> rhs`.
 */
enum MpctuneStatus mpctune_lp_add_row(struct MpctuneLp *lp,
                                      enum MpctuneRowSense sense,
                                      const size_t *indices,
                                      const double *values,
                                      size_t nnz,
                                      double rhs);

size_t mpctune_lp_num_vars(const struct MpctuneLp *lp);

/**
 * Solves with the built-in simplex. `x` (length `n`, may be null) receives
 * the primal solution when optimal.
 */
enum MpctuneStatus mpctune_lp_solve(const struct MpctuneLp *lp,
                                    enum MpctuneLpStatus *status,
                                    double *x,
                                    size_t n,
                                    double *objective,
                                    size_t *iterations);

/**
 * Writes the problem in fixed-format MPS.
 */
enum MpctuneStatus mpctune_lp_write_mps(const struct MpctuneLp *lp, const char *path);

void mpctune_lp_free(struct MpctuneLp *lp);

enum MpctuneStatus mpctune_config_default(struct MpctunePlantConfig **out);

/**
 * Parses configuration text in the file format.
 */
enum MpctuneStatus mpctune_config_parse(const char *text, struct MpctunePlantConfig **out);

enum MpctuneStatus mpctune_config_from_file(const char *path, struct MpctunePlantConfig **out);

/**
 * The configuration in the file format; free with [`mpctune_string_free`].
 */
enum MpctuneStatus mpctune_config_to_text(const struct MpctunePlantConfig *cfg, char **out);

/**
 * Sets the prediction horizon (hours). The change is validated and rolled
 * back on failure.
 */
enum MpctuneStatus mpctune_config_set_horizon(struct MpctunePlantConfig *cfg, size_t horizon);

/**
 * Sets the forecast error level and its seed. Zero noise gives perfect
 * forecasts.
 */
enum MpctuneStatus mpctune_config_set_forecast(struct MpctunePlantConfig *cfg,
                                               double noise,
                                               uint64_t seed);

void mpctune_config_free(struct MpctunePlantConfig *cfg);

/**
 * Synthetic campus series of `hours` hours.
 */
enum MpctuneStatus mpctune_series_fixture(size_t hours, uint64_t seed, struct MpctuneSeries **out);

/**
 * All-zero loads and prices.
 */
enum MpctuneStatus mpctune_series_zero(size_t hours, struct MpctuneSeries **out);

enum MpctuneStatus mpctune_series_read_csv(const char *path, struct MpctuneSeries **out);

size_t mpctune_series_len(const struct MpctuneSeries *series);

void mpctune_series_free(struct MpctuneSeries *series);

/**
 * Closed-loop simulation of `span_hours` hours. When `out_dir` is not null
 * the result files are written there as well.
 */
enum MpctuneStatus mpctune_simulate(const struct MpctunePlantConfig *cfg,
                                    const struct MpctuneSeries *series,
                                    double beta_cw,
                                    double beta_hw,
                                    size_t span_hours,
                                    const char *out_dir,
                                    struct MpctuneSimSummary *summary);

/**
 * Simulates every knot pair. On [`MpctuneStatus::Partial`] the handle is
 * still written and holds the incomplete grid.
 */
enum MpctuneStatus mpctune_grid_evaluate(const struct MpctunePlantConfig *cfg,
                                         const struct MpctuneSeries *series,
                                         const double *knots_cw,
                                         size_t n_cw,
                                         const double *knots_hw,
                                         size_t n_hw,
                                         size_t span_hours,
                                         struct MpctuneGrid **out);

enum MpctuneStatus mpctune_grid_read(const char *path, struct MpctuneGrid **out);

enum MpctuneStatus mpctune_grid_write(const struct MpctuneGrid *grid, const char *path);

/**
 * Bilinear interpolation inside the knot hull.
 */
enum MpctuneStatus mpctune_grid_interpolate(const struct MpctuneGrid *grid,
                                            double beta_cw,
                                            double beta_hw,
                                            double *value);

/**
 * Smallest stored cost and where it sits.
 */
enum MpctuneStatus mpctune_grid_min(const struct MpctuneGrid *grid,
                                    double *value,
                                    double *beta_cw,
                                    double *beta_hw);

void mpctune_grid_free(struct MpctuneGrid *grid);

struct MpctuneBoConfig mpctune_bo_config_default(void);

/**
 * Minimizes `objective` over the box `[lower, upper]` (length `d`). On
 * [`MpctuneStatus::Partial`] (callback failure or non-finite value) the
 * handle is still written with the partial trace.
 */
enum MpctuneStatus mpctune_bo_run(const double *lower,
                                  const double *upper,
                                  size_t d,
                                  const struct MpctuneBoConfig *config,
                                  MpctuneObjective objective,
                                  void *user,
                                  struct MpctuneTrace **out);

size_t mpctune_trace_len(const struct MpctuneTrace *trace);

/**
 * Sample `i`: point (into `point`, length `d`), objective value and running
 * minimum.
 */
enum MpctuneStatus mpctune_trace_sample(const struct MpctuneTrace *trace,
                                        size_t i,
                                        double *point,
                                        size_t d,
                                        double *value,
                                        double *best_so_far);

/**
 * Best sample of the trace.
 */
enum MpctuneStatus mpctune_trace_best(const struct MpctuneTrace *trace,
                                      double *point,
                                      size_t d,
                                      double *value);

enum MpctuneStatus mpctune_trace_write_json(const struct MpctuneTrace *trace, const char *path);

enum MpctuneStatus mpctune_trace_write_csv(const struct MpctuneTrace *trace, const char *path);

void mpctune_trace_free(struct MpctuneTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPCTUNE_H */
