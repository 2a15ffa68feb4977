/* Public C interface of the PFGCG library.
 *
 * All entry points are thread-safe as long as each handle is used by one
 * thread at a time. Functions that can fail return pfgcg_status; on failure
 * pfgcg_last_error() describes the problem for the calling thread. Scalar
 * queries on a NULL handle return 0 / -1 instead of failing.
 *
 * Buffers are caller-allocated and row-major unless noted; sizes follow from
 * the dimension queries next to each accessor.
 */
#ifndef PFGCG_H
#define PFGCG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PFGCG_API __declspec(dllexport)
#else
#define PFGCG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as process exit codes for batch drivers. */
typedef enum pfgcg_status {
  PFGCG_OK = 0,
  PFGCG_ERR_CONFIG = 2,  /* invalid option, parameter, or usage */
  PFGCG_ERR_DATA = 3,    /* unreadable, malformed, or degenerate data */
  PFGCG_ERR_NUMERIC = 4  /* non-finite state or failed numerical routine */
} pfgcg_status;

typedef struct pfgcg_dataset pfgcg_dataset; /* observations + optional truth */
typedef struct pfgcg_result pfgcg_result;   /* posterior summaries of one fit */

/* Library version as "major.minor.patch". */
PFGCG_API const char* pfgcg_version(void);

/* Message of the calling thread's most recent failure; empty if none. The
 * pointer stays valid until the thread's next failing call. */
PFGCG_API const char* pfgcg_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

typedef struct pfgcg_lorenz96_options {
  int32_t num_vars;        /* default 10 */
  int32_t num_steps;       /* recorded timestamps, default 500 */
  double forcing;          /* default 40 */
  double dt;               /* integrator step, default 0.01 */
  int32_t subsample;       /* record every subsample-th step, default 5 */
  int32_t transient_steps; /* steps dropped before recording, default 500 */
  double init_sd;          /* perturbation around the equilibrium, default 0.01 */
  double noise_sd;         /* observation noise, default 0.1 */
  uint64_t seed;
  double train_frac;       /* default 0.8 */
} pfgcg_lorenz96_options;

typedef struct pfgcg_lotka_volterra_options {
  int32_t num_pairs;       /* N = 2 * num_pairs, default 2 */
  int32_t num_steps;       /* default 500 */
  double alpha;            /* prey growth, default 1.1 */
  double beta;             /* predation rate, default 0.4 */
  double gamma;            /* predator death, default 0.4 */
  double delta;            /* predator growth per prey, default 0.1 */
  int32_t window;          /* coupling width across the blocks, default 1 */
  double dt;               /* default 0.01 */
  int32_t subsample;       /* default 10 */
  int32_t transient_steps; /* default 0 */
  double init_value;       /* default 10 */
  double init_sd;          /* default 0.01 */
  double noise_sd;         /* default 0.1 */
  uint64_t seed;
  double train_frac;       /* default 0.8 */
} pfgcg_lotka_volterra_options;

PFGCG_API void pfgcg_lorenz96_options_init(pfgcg_lorenz96_options* opts);
PFGCG_API void pfgcg_lotka_volterra_options_init(pfgcg_lotka_volterra_options* opts);

PFGCG_API pfgcg_status pfgcg_dataset_lorenz96(const pfgcg_lorenz96_options* opts,
                                              pfgcg_dataset** out);
PFGCG_API pfgcg_status pfgcg_dataset_lotka_volterra(
    const pfgcg_lotka_volterra_options* opts, pfgcg_dataset** out);

/* Reads a numeric CSV with timestamps as rows (T rows x N columns); a single
 * non-numeric first row is skipped as a header. No ground truth attached. */
PFGCG_API pfgcg_status pfgcg_dataset_from_csv(const char* path, double train_frac,
                                              pfgcg_dataset** out);

/* Wraps an in-memory panel; values is num_vars x num_steps row-major
 * (variable-major, matching pfgcg_dataset_values). */
PFGCG_API pfgcg_status pfgcg_dataset_from_values(const double* values,
                                                 int32_t num_vars,
                                                 int32_t num_steps,
                                                 double train_frac,
                                                 pfgcg_dataset** out);

PFGCG_API void pfgcg_dataset_free(pfgcg_dataset* ds);

PFGCG_API int32_t pfgcg_dataset_num_vars(const pfgcg_dataset* ds);
PFGCG_API int32_t pfgcg_dataset_num_steps(const pfgcg_dataset* ds);
PFGCG_API int pfgcg_dataset_has_truth(const pfgcg_dataset* ds);

/* out: num_vars x num_steps. */
PFGCG_API pfgcg_status pfgcg_dataset_values(const pfgcg_dataset* ds, double* out);
/* out: num_vars x num_vars 0/1 adjacency; fails if no truth is attached. */
PFGCG_API pfgcg_status pfgcg_dataset_truth(const pfgcg_dataset* ds, int32_t* out);

/* Writes the observations as a CSV of T rows x N columns (reloadable with
 * pfgcg_dataset_from_csv). */
PFGCG_API pfgcg_status pfgcg_dataset_save_csv(const pfgcg_dataset* ds,
                                              const char* path);
/* Writes the attached ground-truth adjacency as an N x N CSV of 0/1. */
PFGCG_API pfgcg_status pfgcg_dataset_save_truth_csv(const pfgcg_dataset* ds,
                                                    const char* path);

/* ---- fitting ----------------------------------------------------------- */

typedef struct pfgcg_fit_options {
  int32_t max_lag;           /* default 1 */
  int32_t num_factors;       /* truncation level, default 50 */
  int32_t threshold;         /* count threshold defining an edge, default 1 */
  int32_t fixed_dense_graph; /* nonzero: keep the graph all-ones (dense ablation) */
  int32_t total_iters;       /* default 10000 */
  int32_t burn_in;           /* default 5000 */
  int32_t thin;              /* default 10 */
  int32_t chains;            /* independent chains to merge, default 1 */
  uint64_t seed;
} pfgcg_fit_options;

PFGCG_API void pfgcg_fit_options_init(pfgcg_fit_options* opts);

/* Per-iteration progress callback: edge_density and active_factors hold one
 * entry per lag and are only valid during the call. */
typedef void (*pfgcg_trace_fn)(void* user, int32_t iteration, double test_mse,
                               const double* edge_density,
                               const int32_t* active_factors, int32_t max_lag);

/* Runs the Gibbs sampler on the training prefix of the dataset and collects
 * posterior summaries; one-step predictions are scored on the held-out
 * suffix every iteration. trace may be NULL. */
PFGCG_API pfgcg_status pfgcg_fit(const pfgcg_dataset* ds,
                                 const pfgcg_fit_options* opts,
                                 pfgcg_trace_fn trace, void* user,
                                 pfgcg_result** out);

/* ---- fit results ------------------------------------------------------- */

PFGCG_API void pfgcg_result_free(pfgcg_result* res);

PFGCG_API int32_t pfgcg_result_num_vars(const pfgcg_result* res);
PFGCG_API int32_t pfgcg_result_max_lag(const pfgcg_result* res);
PFGCG_API int32_t pfgcg_result_num_factors(const pfgcg_result* res);
PFGCG_API int32_t pfgcg_result_collections(const pfgcg_result* res);
PFGCG_API int32_t pfgcg_result_train_steps(const pfgcg_result* res);
PFGCG_API int32_t pfgcg_result_test_steps(const pfgcg_result* res);

/* Test MSE of the posterior-mean predictor. */
PFGCG_API double pfgcg_result_test_mse(const pfgcg_result* res);
/* How often the edge conditional degenerated and fell back to the prior. */
PFGCG_API int64_t pfgcg_result_degenerate_edges(const pfgcg_result* res);

/* Lag-aggregated edge scores in [0, 1]; out: N x N. */
PFGCG_API pfgcg_status pfgcg_result_scores(const pfgcg_result* res, double* out);
/* Posterior mean of the edge probabilities at one lag; out: N x N. */
PFGCG_API pfgcg_status pfgcg_result_edge_mean(const pfgcg_result* res, int32_t lag,
                                              double* out);
/* Posterior mean of the effective (masked) coefficients at one lag; out: N x N. */
PFGCG_API pfgcg_status pfgcg_result_coeff_mean(const pfgcg_result* res, int32_t lag,
                                               double* out);
/* Posterior mean of the factor weights; out: max_lag x num_factors. */
PFGCG_API pfgcg_status pfgcg_result_factor_mean(const pfgcg_result* res, double* out);
/* Per lag, number of factor weights with posterior mean above threshold;
 * out: max_lag entries. */
PFGCG_API pfgcg_status pfgcg_result_active_factors(const pfgcg_result* res,
                                                   double threshold, int32_t* out);

/* Per-iteration test-MSE trace (averaged over chains). */
PFGCG_API int64_t pfgcg_result_mse_trace_len(const pfgcg_result* res);
PFGCG_API pfgcg_status pfgcg_result_mse_trace(const pfgcg_result* res, double* out);

/* Binary checkpoint of the first chain's final state. */
PFGCG_API pfgcg_status pfgcg_result_save_state(const pfgcg_result* res,
                                               const char* path);

/* ---- evaluation -------------------------------------------------------- */

/* scores: n x n reals; truth: n x n 0/1. Both classes must be present. */
PFGCG_API pfgcg_status pfgcg_auroc(const double* scores, const int32_t* truth,
                                   int32_t n, double* out);
PFGCG_API pfgcg_status pfgcg_auprc(const double* scores, const int32_t* truth,
                                   int32_t n, double* out);
/* Structural Hamming distance between two n x n 0/1 adjacencies. */
PFGCG_API pfgcg_status pfgcg_shd(const int32_t* pred, const int32_t* truth,
                                 int32_t n, int64_t* out);
/* Independent Bernoulli draw per entry from scores in [0, 1]; out: n x n 0/1. */
PFGCG_API pfgcg_status pfgcg_sample_binary_graph(const double* scores, int32_t n,
                                                 uint64_t seed, int32_t* out);
/* Index of the candidate with the smallest test MSE; ties break toward the
 * smaller sparsity level. */
PFGCG_API pfgcg_status pfgcg_select_min_mse(const int32_t* levels,
                                            const double* test_mse, int32_t count,
                                            int32_t* out_index);

/* ---- matrix CSV helpers ------------------------------------------------ */

PFGCG_API pfgcg_status pfgcg_matrix_write_csv(const char* path, const double* values,
                                              int32_t rows, int32_t cols);
/* Reads a rectangular numeric CSV (optional single header row skipped).
 * *out_values is allocated by the library; release with pfgcg_free. */
PFGCG_API pfgcg_status pfgcg_matrix_read_csv(const char* path, double** out_values,
                                             int32_t* out_rows, int32_t* out_cols);
PFGCG_API void pfgcg_free(void* ptr);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PFGCG_H */
