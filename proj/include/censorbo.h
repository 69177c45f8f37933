/* censorbo: censoring-aware neural regression and a racing optimizer for
 * noisy, right-censored objectives.  C interface to the shared library.
 *
 * Conventions:
 *   - Every fallible call returns a cbo_status; CBO_OK is 0.
 *   - On failure, cbo_last_error() describes the problem (thread-local).
 *   - Objects come back through out-parameters as opaque handles and must be
 *     released with the matching *_free (safe on NULL).
 *   - A cutoff of +infinity (or INFINITY) means "uncensored"; dataset files
 *     store it as JSON null.
 */
#ifndef CENSORBO_H
#define CENSORBO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CBO_API __declspec(dllexport)
#else
#define CBO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cbo_status {
    CBO_OK = 0,
    CBO_ERR_ARGUMENT = 1, /* invalid argument or precondition */
    CBO_ERR_TRAINING = 2, /* numeric failure while fitting */
    CBO_ERR_IO = 3,       /* file or stream failure */
    CBO_ERR_PARSE = 4,    /* malformed serialized content */
    CBO_ERR_INTERNAL = 5  /* unexpected failure */
} cbo_status;

typedef struct cbo_dataset cbo_dataset;
typedef struct cbo_model cbo_model;
typedef struct cbo_simulator cbo_simulator;
typedef struct cbo_runhistory cbo_runhistory;

/* Library version string, e.g. "0.1.0". */
CBO_API const char* cbo_version(void);

/* Message for the most recent failure on this thread ("" if none). */
CBO_API const char* cbo_last_error(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

/* Noisy benchmark draw: 100*dim locations, 10 noisy copies each.
 * function: "branin", "camelback", "hartmann3" or "hartmann6". */
CBO_API cbo_status cbo_dataset_generate(const char* function, uint64_t seed, cbo_dataset** out);

/* Right-censors a dataset.  mode "random": each value above the given
 * percentile of the data may be censored at a bound drawn between that
 * percentile and the value.  mode "fixed": clip at `cutoff`. */
CBO_API cbo_status cbo_dataset_censor(const cbo_dataset* data, const char* mode, double percentile,
                                      double cutoff, uint64_t seed, cbo_dataset** out);

/* Builds a dataset from flat arrays.  xs is row-major n*dim.  censored may be
 * NULL (all zero); cutoffs may be NULL (all uncensored, +inf). */
CBO_API cbo_status cbo_dataset_from_arrays(const double* xs, const double* ys, const int* censored,
                                           const double* cutoffs, size_t n, size_t dim,
                                           cbo_dataset** out);

CBO_API cbo_status cbo_dataset_load(const char* path, cbo_dataset** out);
CBO_API cbo_status cbo_dataset_save(const cbo_dataset* data, const char* path);

CBO_API cbo_status cbo_dataset_size(const cbo_dataset* data, size_t* out);
CBO_API cbo_status cbo_dataset_dim(const cbo_dataset* data, size_t* out);
CBO_API cbo_status cbo_dataset_censored_count(const cbo_dataset* data, size_t* out);

/* Copies row i.  x must hold at least dim doubles.  Any out-pointer may be
 * NULL to skip that field. */
CBO_API cbo_status cbo_dataset_row(const cbo_dataset* data, size_t i, double* x, double* y,
                                   int* censored, double* cutoff);

CBO_API void cbo_dataset_free(cbo_dataset* data);

/* ------------------------------------------------------------------ */
/* Models                                                              */
/* ------------------------------------------------------------------ */

typedef struct cbo_train_options {
    int epochs;            /* default 2000 */
    int batch_size;        /* default 16 */
    double peak_lr;        /* default 1e-2, one-cycle schedule */
    double momentum;       /* default 0.9 */
    double weight_decay;   /* default 1e-4 */
    double grad_clip;      /* default 0.1 (elementwise) */
    uint64_t seed;         /* default 0; member m trains with seed + m */
    int ensemble_size;     /* default 1 */
    const char* loss;      /* "gaussian" or "tobit"; default "gaussian" */
    int jobs;              /* worker threads; 0 = all cores, default 1 */
} cbo_train_options;

/* Fills defaults; call before overriding fields. */
CBO_API void cbo_train_options_init(cbo_train_options* opts);

/* Trains an ensemble on the dataset.  The tobit loss uses the censoring
 * information; the gaussian loss takes every y at face value. */
CBO_API cbo_status cbo_fit(const cbo_dataset* data, const cbo_train_options* opts,
                           cbo_model** out);

/* Iterative imputation for censored data with a gaussian ensemble: repeatedly
 * fits, then replaces each censored value with the model's expected value
 * above the observed bound.  Returns the imputed dataset and/or the final
 * model (either out-pointer may be NULL). */
CBO_API cbo_status cbo_impute(const cbo_dataset* data, int iterations,
                              const cbo_train_options* opts, cbo_dataset** imputed_out,
                              cbo_model** model_out);

CBO_API cbo_status cbo_model_input_dim(const cbo_model* model, size_t* out);
CBO_API cbo_status cbo_model_members(const cbo_model* model, size_t* out);

/* Ensemble prediction: mean of member means, plus their spread (variance of
 * member means).  var may be NULL. */
CBO_API cbo_status cbo_predict(const cbo_model* model, const double* x, size_t dim, double* mu,
                               double* var);

/* Single member's mean and noise variance estimate.  var may be NULL. */
CBO_API cbo_status cbo_predict_member(const cbo_model* model, size_t member, const double* x,
                                      size_t dim, double* mu, double* var);

CBO_API cbo_status cbo_model_save(const cbo_model* model, const char* path);
CBO_API cbo_status cbo_model_load(const char* path, cbo_model** out);
CBO_API void cbo_model_free(cbo_model* model);

/* ------------------------------------------------------------------ */
/* Metrics and small statistics                                        */
/* ------------------------------------------------------------------ */

CBO_API cbo_status cbo_metric_rmse(const double* predictions, const double* truths, size_t n,
                                   double* out);

/* Rank correlation with average ranks on ties.  *defined is 0 and *out NaN
 * when either input is constant. */
CBO_API cbo_status cbo_metric_spearman(const double* a, const double* b, size_t n, double* out,
                                       int* defined);

/* Maximum-likelihood normal fit to right-censored scalar data.  censored[i]
 * nonzero marks values[i] as a lower bound. */
CBO_API cbo_status cbo_fit_censored_normal(const double* values, const int* censored, size_t n,
                                           double* mu, double* sigma);

/* Linear-interpolation quantile, q in [0, 1]. */
CBO_API cbo_status cbo_stats_quantile(const double* values, size_t n, double q, double* out);

/* ------------------------------------------------------------------ */
/* Benchmark studies                                                   */
/* ------------------------------------------------------------------ */

/* Cross-validated prediction error of one training strategy on a censored
 * benchmark draw.  strategy: "I" (ignore censoring), "D" (drop censored),
 * "SH" (iterative imputation), "T" (tobit).  Folds split by location; the
 * model predicts held-out locations and is scored against the noise-free
 * function.  *rmse is the mean over folds and seeds; if the strategy cannot
 * run on some split, *failed is set to 1 and *rmse to NaN. */
CBO_API cbo_status cbo_table1_cell(const char* function, const char* censor_mode,
                                   double percentile, double cutoff, const char* strategy,
                                   const uint64_t* seeds, size_t n_seeds, int folds,
                                   int sh_iterations, const cbo_train_options* opts, double* rmse,
                                   int* failed);

/* Held-out RMSE of each imputation iteration's model on one benchmark draw,
 * averaged over folds, plus a tobit ensemble reference on the same folds.
 * iter_mean and iter_std must hold sh_iterations doubles. */
CBO_API cbo_status cbo_sh_trace(const char* function, const char* censor_mode, double percentile,
                                double cutoff, uint64_t seed, int folds, int sh_iterations,
                                const cbo_train_options* opts, double* iter_mean, double* iter_std,
                                double* tobit_mean, double* tobit_std);

/* ------------------------------------------------------------------ */
/* Simulated target and optimizer                                      */
/* ------------------------------------------------------------------ */

/* Stochastic runtime stand-in on a benchmark function: median cost is the
 * function rescaled onto [t_min, t_max], runs are lognormal around it. */
CBO_API cbo_status cbo_simulator_create(const char* function, double t_min, double t_max,
                                        double log_noise_sd, cbo_simulator** out);

CBO_API cbo_status cbo_simulator_dim(const cbo_simulator* sim, size_t* out);

/* Copies the search box; lo and hi must hold dim doubles. */
CBO_API cbo_status cbo_simulator_bounds(const cbo_simulator* sim, double* lo, double* hi);

CBO_API cbo_status cbo_simulator_median(const cbo_simulator* sim, const double* x, size_t dim,
                                        double* out);

/* One run, deterministic per (x, seed); cost above cutoff comes back capped
 * with *censored set. */
CBO_API cbo_status cbo_simulator_run(const cbo_simulator* sim, const double* x, size_t dim,
                                     double cutoff, uint64_t seed, double* cost, int* censored);

CBO_API void cbo_simulator_free(cbo_simulator* sim);

typedef struct cbo_optimizer_options {
    int iterations;    /* races after the cold start; default 30 */
    double kappa_max;  /* hard cap per run; default +inf */
    int cold_start;    /* initial uniform configs; default 8 */
    int max_runs;      /* per-config budget; default 8 */
    double slack;      /* adaptive-capping multiplier; default 1.2 */
    int pool_size;     /* candidates per model proposal; default 512 */
    int inner_epochs;  /* proposal net epochs; default 500 */
    uint64_t seed;     /* default 0 */
} cbo_optimizer_options;

CBO_API void cbo_optimizer_options_init(cbo_optimizer_options* opts);

/* Minimizes the simulated target.  method "nn" proposes challengers with a
 * censoring-aware net; "random" proposes uniformly.  Both race challengers
 * against the incumbent under an adaptive cap. */
CBO_API cbo_status cbo_optimize(const cbo_simulator* sim, const char* method,
                                const cbo_optimizer_options* opts, cbo_runhistory** out);

CBO_API cbo_status cbo_runhistory_size(const cbo_runhistory* hist, size_t* out);
CBO_API cbo_status cbo_runhistory_dim(const cbo_runhistory* hist, size_t* out);

/* Copies run i.  x must hold dim doubles; any out-pointer may be NULL. */
CBO_API cbo_status cbo_runhistory_row(const cbo_runhistory* hist, size_t i, double* x,
                                      double* cost, int* censored, double* cutoff, int* iteration,
                                      int* incumbent);

/* Final incumbent config and its mean capped cost (either may be NULL). */
CBO_API cbo_status cbo_runhistory_incumbent(const cbo_runhistory* hist, double* x,
                                            double* mean_cost);

/* Incumbent trace: one point per iteration (0 = after the cold start). */
CBO_API cbo_status cbo_runhistory_trajectory_size(const cbo_runhistory* hist, size_t* out);
CBO_API cbo_status cbo_runhistory_trajectory_row(const cbo_runhistory* hist, size_t i,
                                                 int* iteration, double* wallclock,
                                                 double* incumbent_cost);

/* Proposal bookkeeping: nets fitted and uniform fallbacks taken. */
CBO_API cbo_status cbo_runhistory_stats(const cbo_runhistory* hist, long long* model_trainings,
                                        int* fallbacks);

/* JSON Lines round trip.  Loading recovers runs and the incumbent (from the
 * stored flags); the trajectory and proposal bookkeeping are not stored. */
CBO_API cbo_status cbo_runhistory_save(const cbo_runhistory* hist, const char* path);
CBO_API cbo_status cbo_runhistory_load(const char* path, cbo_runhistory** out);

CBO_API void cbo_runhistory_free(cbo_runhistory* hist);

/* Scores a config with n uncapped runs. */
CBO_API cbo_status cbo_validate(const cbo_simulator* sim, const double* x, size_t dim, int n,
                                uint64_t seed, double* mean, double* q25, double* median,
                                double* q75);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CENSORBO_H */
