// C boundary: marshals buffers, owns the handle types, and converts
// exceptions into status codes plus a per-thread error message.
#include "pfgcg.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "data.hpp"
#include "eval.hpp"
#include "fit.hpp"
#include "io.hpp"
#include "model.hpp"
#include "posterior.hpp"
#include "rng.hpp"

#ifndef PFGCG_VERSION
#define PFGCG_VERSION "0.0.0"
#endif

struct pfgcg_dataset {
  pfgcg::TimeSeriesData data;
  pfgcg::GroundTruthGraph truth;
  bool has_truth = false;
};

struct pfgcg_result {
  pfgcg::FitResult fit;
};

namespace {

thread_local std::string g_last_error;

pfgcg_status fail(pfgcg_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs the body and folds every exception into a status code.
template <typename Fn>
pfgcg_status guarded(Fn&& fn) {
  try {
    fn();
    return PFGCG_OK;
  } catch (const pfgcg::ConfigError& e) {
    return fail(PFGCG_ERR_CONFIG, e.what());
  } catch (const pfgcg::DataError& e) {
    return fail(PFGCG_ERR_DATA, e.what());
  } catch (const pfgcg::NumericError& e) {
    return fail(PFGCG_ERR_NUMERIC, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PFGCG_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PFGCG_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(PFGCG_ERR_NUMERIC, e.what());
  } catch (...) {
    return fail(PFGCG_ERR_NUMERIC, "unknown error");
  }
}

pfgcg_status require(bool ok, const char* what) {
  return ok ? PFGCG_OK : fail(PFGCG_ERR_CONFIG, what);
}

pfgcg::Mat2<double> to_mat(const double* values, int rows, int cols) {
  pfgcg::Mat2<double> m(rows, cols);
  std::memcpy(m.data(), values, m.size() * sizeof(double));
  return m;
}

pfgcg::Mat2<std::uint8_t> to_adj(const std::int32_t* values, int n) {
  pfgcg::Mat2<std::uint8_t> m(n, n);
  for (std::size_t idx = 0; idx < m.size(); ++idx) {
    const std::int32_t v = values[idx];
    if (v != 0 && v != 1) throw pfgcg::DataError("adjacency entries must be 0 or 1");
    m.data()[idx] = static_cast<std::uint8_t>(v);
  }
  return m;
}

}  // namespace

extern "C" {

const char* pfgcg_version(void) { return PFGCG_VERSION; }

const char* pfgcg_last_error(void) { return g_last_error.c_str(); }

/* ---- datasets ---------------------------------------------------------- */

void pfgcg_lorenz96_options_init(pfgcg_lorenz96_options* opts) {
  if (opts == nullptr) return;
  const pfgcg::Lorenz96Params d;
  *opts = pfgcg_lorenz96_options{d.num_vars, d.num_steps, d.forcing,
                                 d.dt,       d.subsample, d.transient_steps,
                                 d.init_sd,  d.noise_sd,  d.seed,
                                 0.8};
}

void pfgcg_lotka_volterra_options_init(pfgcg_lotka_volterra_options* opts) {
  if (opts == nullptr) return;
  const pfgcg::LotkaVolterraParams d;
  *opts = pfgcg_lotka_volterra_options{
      d.pairs,      d.num_steps, d.alpha,   d.beta,    d.gamma,
      d.delta,      d.window,    d.dt,      d.subsample, d.transient_steps,
      d.init_value, d.init_sd,   d.noise_sd, d.seed,     0.8};
}

pfgcg_status pfgcg_dataset_lorenz96(const pfgcg_lorenz96_options* opts,
                                    pfgcg_dataset** out) {
  if (pfgcg_status s = require(opts != nullptr && out != nullptr,
                               "lorenz96: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    pfgcg::Lorenz96Params p;
    p.num_vars = opts->num_vars;
    p.num_steps = opts->num_steps;
    p.forcing = opts->forcing;
    p.dt = opts->dt;
    p.subsample = opts->subsample;
    p.transient_steps = opts->transient_steps;
    p.init_sd = opts->init_sd;
    p.noise_sd = opts->noise_sd;
    p.seed = opts->seed;
    auto [data, truth] = pfgcg::gen_lorenz96(p);
    data.train_frac = opts->train_frac;
    auto ds = std::make_unique<pfgcg_dataset>();
    ds->data = std::move(data);
    ds->truth = std::move(truth);
    ds->has_truth = true;
    *out = ds.release();
  });
}

pfgcg_status pfgcg_dataset_lotka_volterra(const pfgcg_lotka_volterra_options* opts,
                                          pfgcg_dataset** out) {
  if (pfgcg_status s = require(opts != nullptr && out != nullptr,
                               "lotka_volterra: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    pfgcg::LotkaVolterraParams p;
    p.pairs = opts->num_pairs;
    p.num_steps = opts->num_steps;
    p.alpha = opts->alpha;
    p.beta = opts->beta;
    p.gamma = opts->gamma;
    p.delta = opts->delta;
    p.window = opts->window;
    p.dt = opts->dt;
    p.subsample = opts->subsample;
    p.transient_steps = opts->transient_steps;
    p.init_value = opts->init_value;
    p.init_sd = opts->init_sd;
    p.noise_sd = opts->noise_sd;
    p.seed = opts->seed;
    auto [data, truth] = pfgcg::gen_lotka_volterra(p);
    data.train_frac = opts->train_frac;
    auto ds = std::make_unique<pfgcg_dataset>();
    ds->data = std::move(data);
    ds->truth = std::move(truth);
    ds->has_truth = true;
    *out = ds.release();
  });
}

pfgcg_status pfgcg_dataset_from_csv(const char* path, double train_frac,
                                    pfgcg_dataset** out) {
  if (pfgcg_status s = require(path != nullptr && out != nullptr,
                               "from_csv: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    auto ds = std::make_unique<pfgcg_dataset>();
    ds->data = pfgcg::load_csv(path);
    ds->data.train_frac = train_frac;
    *out = ds.release();
  });
}

pfgcg_status pfgcg_dataset_from_values(const double* values, int32_t num_vars,
                                       int32_t num_steps, double train_frac,
                                       pfgcg_dataset** out) {
  if (pfgcg_status s = require(values != nullptr && out != nullptr,
                               "from_values: null argument");
      s != PFGCG_OK)
    return s;
  if (pfgcg_status s = require(num_vars > 0 && num_steps > 0,
                               "from_values: dimensions must be positive");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    auto ds = std::make_unique<pfgcg_dataset>();
    ds->data.x = to_mat(values, num_vars, num_steps);
    ds->data.train_frac = train_frac;
    *out = ds.release();
  });
}

void pfgcg_dataset_free(pfgcg_dataset* ds) { delete ds; }

int32_t pfgcg_dataset_num_vars(const pfgcg_dataset* ds) {
  return ds == nullptr ? -1 : ds->data.num_vars();
}

int32_t pfgcg_dataset_num_steps(const pfgcg_dataset* ds) {
  return ds == nullptr ? -1 : ds->data.num_steps();
}

int pfgcg_dataset_has_truth(const pfgcg_dataset* ds) {
  return ds != nullptr && ds->has_truth ? 1 : 0;
}

pfgcg_status pfgcg_dataset_values(const pfgcg_dataset* ds, double* out) {
  if (pfgcg_status s = require(ds != nullptr && out != nullptr,
                               "dataset_values: null argument");
      s != PFGCG_OK)
    return s;
  std::memcpy(out, ds->data.x.data(), ds->data.x.size() * sizeof(double));
  return PFGCG_OK;
}

pfgcg_status pfgcg_dataset_truth(const pfgcg_dataset* ds, int32_t* out) {
  if (pfgcg_status s = require(ds != nullptr && out != nullptr,
                               "dataset_truth: null argument");
      s != PFGCG_OK)
    return s;
  if (!ds->has_truth) return fail(PFGCG_ERR_DATA, "dataset has no ground truth");
  const auto& adj = ds->truth.adj;
  for (std::size_t idx = 0; idx < adj.size(); ++idx) out[idx] = adj.data()[idx];
  return PFGCG_OK;
}

pfgcg_status pfgcg_dataset_save_csv(const pfgcg_dataset* ds, const char* path) {
  if (pfgcg_status s = require(ds != nullptr && path != nullptr,
                               "dataset_save_csv: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    const auto& x = ds->data.x;
    pfgcg::Mat2<double> by_time(x.cols(), x.rows());
    for (int i = 0; i < x.rows(); ++i) {
      for (int t = 0; t < x.cols(); ++t) by_time(t, i) = x(i, t);
    }
    pfgcg::io::write_matrix_csv(path, by_time);
  });
}

pfgcg_status pfgcg_dataset_save_truth_csv(const pfgcg_dataset* ds, const char* path) {
  if (pfgcg_status s = require(ds != nullptr && path != nullptr,
                               "dataset_save_truth_csv: null argument");
      s != PFGCG_OK)
    return s;
  if (!ds->has_truth) return fail(PFGCG_ERR_DATA, "dataset has no ground truth");
  return guarded([&] { pfgcg::io::write_matrix_csv(path, ds->truth.adj); });
}

/* ---- fitting ----------------------------------------------------------- */

void pfgcg_fit_options_init(pfgcg_fit_options* opts) {
  if (opts == nullptr) return;
  const pfgcg::FitConfig d;
  *opts = pfgcg_fit_options{d.max_lag,
                            d.num_factors,
                            d.threshold,
                            d.fixed_dense_graph ? 1 : 0,
                            d.schedule.total_iters,
                            d.schedule.burn_in,
                            d.schedule.thin,
                            d.chains,
                            d.seed};
}

pfgcg_status pfgcg_fit(const pfgcg_dataset* ds, const pfgcg_fit_options* opts,
                       pfgcg_trace_fn trace, void* user, pfgcg_result** out) {
  if (pfgcg_status s = require(ds != nullptr && opts != nullptr && out != nullptr,
                               "fit: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    pfgcg::FitConfig config;
    config.max_lag = opts->max_lag;
    config.num_factors = opts->num_factors;
    config.threshold = opts->threshold;
    config.fixed_dense_graph = opts->fixed_dense_graph != 0;
    config.schedule.total_iters = opts->total_iters;
    config.schedule.burn_in = opts->burn_in;
    config.schedule.thin = opts->thin;
    config.chains = opts->chains;
    config.seed = opts->seed;

    pfgcg::TraceSink sink;
    if (trace != nullptr) {
      sink = [trace, user](const pfgcg::TraceRecord& rec) {
        std::vector<int32_t> active(rec.active_factors.begin(),
                                    rec.active_factors.end());
        trace(user, rec.iteration, rec.test_mse, rec.edge_density.data(),
              active.data(), static_cast<int32_t>(rec.edge_density.size()));
      };
    }

    auto res = std::make_unique<pfgcg_result>();
    res->fit = pfgcg::run_fit(ds->data, config, sink);
    *out = res.release();
  });
}

/* ---- fit results ------------------------------------------------------- */

void pfgcg_result_free(pfgcg_result* res) { delete res; }

int32_t pfgcg_result_num_vars(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.acc.num_vars();
}

int32_t pfgcg_result_max_lag(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.acc.max_lag();
}

int32_t pfgcg_result_num_factors(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.acc.num_factors();
}

int32_t pfgcg_result_collections(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.acc.collected();
}

int32_t pfgcg_result_train_steps(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.train_steps;
}

int32_t pfgcg_result_test_steps(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.test_steps;
}

double pfgcg_result_test_mse(const pfgcg_result* res) {
  return res == nullptr ? 0.0 : res->fit.final_test_mse;
}

int64_t pfgcg_result_degenerate_edges(const pfgcg_result* res) {
  return res == nullptr ? -1 : res->fit.counters.degenerate_edges;
}

pfgcg_status pfgcg_result_scores(const pfgcg_result* res, double* out) {
  if (pfgcg_status s = require(res != nullptr && out != nullptr,
                               "result_scores: null argument");
      s != PFGCG_OK)
    return s;
  std::memcpy(out, res->fit.scores.data(), res->fit.scores.size() * sizeof(double));
  return PFGCG_OK;
}

pfgcg_status pfgcg_result_edge_mean(const pfgcg_result* res, int32_t lag,
                                    double* out) {
  if (pfgcg_status s = require(res != nullptr && out != nullptr,
                               "result_edge_mean: null argument");
      s != PFGCG_OK)
    return s;
  if (lag < 0 || lag >= res->fit.acc.max_lag())
    return fail(PFGCG_ERR_CONFIG, "result_edge_mean: lag out of range");
  const auto& m = res->fit.edge_mean[static_cast<std::size_t>(lag)];
  std::memcpy(out, m.data(), m.size() * sizeof(double));
  return PFGCG_OK;
}

pfgcg_status pfgcg_result_coeff_mean(const pfgcg_result* res, int32_t lag,
                                     double* out) {
  if (pfgcg_status s = require(res != nullptr && out != nullptr,
                               "result_coeff_mean: null argument");
      s != PFGCG_OK)
    return s;
  if (lag < 0 || lag >= res->fit.acc.max_lag())
    return fail(PFGCG_ERR_CONFIG, "result_coeff_mean: lag out of range");
  const auto& m = res->fit.acc.b_mean()[static_cast<std::size_t>(lag)];
  std::memcpy(out, m.data(), m.size() * sizeof(double));
  return PFGCG_OK;
}

pfgcg_status pfgcg_result_factor_mean(const pfgcg_result* res, double* out) {
  if (pfgcg_status s = require(res != nullptr && out != nullptr,
                               "result_factor_mean: null argument");
      s != PFGCG_OK)
    return s;
  const auto& m = res->fit.acc.r_mean();
  std::memcpy(out, m.data(), m.size() * sizeof(double));
  return PFGCG_OK;
}

pfgcg_status pfgcg_result_active_factors(const pfgcg_result* res, double threshold,
                                         int32_t* out) {
  if (pfgcg_status s = require(res != nullptr && out != nullptr,
                               "result_active_factors: null argument");
      s != PFGCG_OK)
    return s;
  const std::vector<int> counts = res->fit.acc.active_factors(threshold);
  for (std::size_t lag = 0; lag < counts.size(); ++lag) out[lag] = counts[lag];
  return PFGCG_OK;
}

int64_t pfgcg_result_mse_trace_len(const pfgcg_result* res) {
  return res == nullptr ? -1
                        : static_cast<int64_t>(res->fit.acc.mse_trace().size());
}

pfgcg_status pfgcg_result_mse_trace(const pfgcg_result* res, double* out) {
  if (pfgcg_status s = require(res != nullptr && out != nullptr,
                               "result_mse_trace: null argument");
      s != PFGCG_OK)
    return s;
  const auto& trace = res->fit.acc.mse_trace();
  std::memcpy(out, trace.data(), trace.size() * sizeof(double));
  return PFGCG_OK;
}

pfgcg_status pfgcg_result_save_state(const pfgcg_result* res, const char* path) {
  if (pfgcg_status s = require(res != nullptr && path != nullptr,
                               "result_save_state: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] { pfgcg::save_state(res->fit.last_state, path); });
}

/* ---- evaluation -------------------------------------------------------- */

pfgcg_status pfgcg_auroc(const double* scores, const int32_t* truth, int32_t n,
                         double* out) {
  if (pfgcg_status s = require(scores != nullptr && truth != nullptr &&
                                   out != nullptr && n > 0,
                               "auroc: null argument or non-positive size");
      s != PFGCG_OK)
    return s;
  return guarded([&] { *out = pfgcg::auroc(to_mat(scores, n, n), to_adj(truth, n)); });
}

pfgcg_status pfgcg_auprc(const double* scores, const int32_t* truth, int32_t n,
                         double* out) {
  if (pfgcg_status s = require(scores != nullptr && truth != nullptr &&
                                   out != nullptr && n > 0,
                               "auprc: null argument or non-positive size");
      s != PFGCG_OK)
    return s;
  return guarded([&] { *out = pfgcg::auprc(to_mat(scores, n, n), to_adj(truth, n)); });
}

pfgcg_status pfgcg_shd(const int32_t* pred, const int32_t* truth, int32_t n,
                       int64_t* out) {
  if (pfgcg_status s = require(pred != nullptr && truth != nullptr &&
                                   out != nullptr && n > 0,
                               "shd: null argument or non-positive size");
      s != PFGCG_OK)
    return s;
  return guarded([&] { *out = pfgcg::shd(to_adj(pred, n), to_adj(truth, n)); });
}

pfgcg_status pfgcg_sample_binary_graph(const double* scores, int32_t n,
                                       uint64_t seed, int32_t* out) {
  if (pfgcg_status s = require(scores != nullptr && out != nullptr && n > 0,
                               "sample_binary_graph: null argument or size");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    pfgcg::RngStream rng(seed);
    const pfgcg::Mat2<std::uint8_t> g =
        pfgcg::sample_binary_graph(to_mat(scores, n, n), rng);
    for (std::size_t idx = 0; idx < g.size(); ++idx) out[idx] = g.data()[idx];
  });
}

pfgcg_status pfgcg_select_min_mse(const int32_t* levels, const double* test_mse,
                                  int32_t count, int32_t* out_index) {
  if (pfgcg_status s = require(levels != nullptr && test_mse != nullptr &&
                                   out_index != nullptr && count > 0,
                               "select_min_mse: null argument or empty set");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    std::vector<std::pair<int, pfgcg::MetricReport>> runs(
        static_cast<std::size_t>(count));
    for (int32_t i = 0; i < count; ++i) {
      runs[static_cast<std::size_t>(i)].first = levels[i];
      runs[static_cast<std::size_t>(i)].second.test_mse = test_mse[i];
    }
    const int winner = pfgcg::select_model(runs);
    for (int32_t i = 0; i < count; ++i) {
      if (levels[i] == winner) {
        *out_index = i;
        return;
      }
    }
    throw pfgcg::ConfigError("select_min_mse: winner not in candidate list");
  });
}

/* ---- matrix CSV helpers ------------------------------------------------ */

pfgcg_status pfgcg_matrix_write_csv(const char* path, const double* values,
                                    int32_t rows, int32_t cols) {
  if (pfgcg_status s = require(path != nullptr && values != nullptr && rows > 0 &&
                                   cols > 0,
                               "matrix_write_csv: null argument or size");
      s != PFGCG_OK)
    return s;
  return guarded([&] { pfgcg::io::write_matrix_csv(path, to_mat(values, rows, cols)); });
}

pfgcg_status pfgcg_matrix_read_csv(const char* path, double** out_values,
                                   int32_t* out_rows, int32_t* out_cols) {
  if (pfgcg_status s = require(path != nullptr && out_values != nullptr &&
                                   out_rows != nullptr && out_cols != nullptr,
                               "matrix_read_csv: null argument");
      s != PFGCG_OK)
    return s;
  return guarded([&] {
    const pfgcg::Mat2<double> m = pfgcg::io::read_matrix_csv(path);
    double* buf = static_cast<double*>(std::malloc(m.size() * sizeof(double)));
    if (buf == nullptr) throw std::bad_alloc();
    std::memcpy(buf, m.data(), m.size() * sizeof(double));
    *out_values = buf;
    *out_rows = m.rows();
    *out_cols = m.cols();
  });
}

void pfgcg_free(void* ptr) { std::free(ptr); }

}  // extern "C"
