#include "fit.hpp"

#include <cmath>
#include <string>

namespace pfgcg {

void FitConfig::validate() const {
  schedule.validate();
  if (chains < 1) throw ConfigError("fit: chains must be >= 1");
  if (max_lag < 1) throw ConfigError("fit: max_lag must be >= 1");
  if (num_factors < 1) throw ConfigError("fit: num_factors must be >= 1");
  if (threshold < 1) throw ConfigError("fit: threshold must be >= 1");
}

namespace {

// Mean squared one-step prediction error over the test suffix, using the
// given per-lag coefficient matrices and the full history (test-time
// predictions may reach back across the split boundary).
double suffix_mse(const std::vector<Mat2<double>>& b, const Mat2<double>& x,
                  int train_steps) {
  const int n = x.rows();
  const int t_total = x.cols();
  double sum = 0.0;
  long long count = 0;
  for (int t = train_steps; t < t_total; ++t) {
    const std::vector<double> pred = predict_one_step(b, x, t);
    for (int i = 0; i < n; ++i) {
      const double d = pred[static_cast<std::size_t>(i)] - x(i, t);
      sum += d * d;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::vector<Mat2<double>> effective_coeffs(const PFGCGState& state) {
  std::vector<Mat2<double>> b(static_cast<std::size_t>(state.config.max_lag));
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    const auto& a = state.coeff[static_cast<std::size_t>(lag)];
    const auto& g = state.graph[static_cast<std::size_t>(lag)];
    Mat2<double> m(a.rows(), a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < a.cols(); ++j) m(i, j) = g(i, j) ? a(i, j) : 0.0;
    }
    b[static_cast<std::size_t>(lag)] = std::move(m);
  }
  return b;
}

}  // namespace

FitResult run_fit(const TimeSeriesData& data, const FitConfig& config,
                  const TraceSink& trace) {
  config.validate();
  for (std::size_t idx = 0; idx < data.x.size(); ++idx) {
    if (!std::isfinite(data.x.data()[idx])) {
      throw NumericError("fit: input series contain non-finite values");
    }
  }
  const SplitIndices split = split_train_test(data);
  const int n = data.num_vars();

  ModelConfig mc;
  mc.num_vars = n;
  mc.num_steps = split.train_steps;
  mc.max_lag = config.max_lag;
  mc.num_factors = config.num_factors;
  mc.threshold = config.threshold;
  mc.fixed_dense_graph = config.fixed_dense_graph;
  mc.seed = config.seed;
  mc.validate();

  // Training prefix as its own matrix; the full panel is kept for test-time
  // predictions whose lagged history crosses the boundary.
  Mat2<double> train(n, split.train_steps, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < split.train_steps; ++t) train(i, t) = data.x(i, t);
  }

  const SweepOptions sweep_options{config.scan_order, config.factor_order};
  const int h_cap = config.schedule.collections();

  FitResult result;
  result.train_steps = split.train_steps;
  result.test_steps = split.test_steps;

  PosteriorAccumulator merged;
  for (int chain = 0; chain < config.chains; ++chain) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(chain));
    PFGCGState state = init_state(mc, rng);
    SweepStats stats;
    stats.rebuild(state, train);
    PosteriorAccumulator acc(n, config.max_lag, config.num_factors, h_cap);

    for (int iter = 1; iter <= config.schedule.total_iters; ++iter) {
      gibbs_sweep(state, train, stats, rng, sweep_options);
      if (state.has_non_finite()) {
        throw NumericError("fit: non-finite state in chain " + std::to_string(chain) +
                           " at iteration " + std::to_string(iter));
      }
      const double iter_mse = suffix_mse(effective_coeffs(state), data.x, split.train_steps);
      acc.push_mse(iter_mse);
      if (config.schedule.collect_at(iter)) {
        acc.record_collection(state, stats, config.schedule.slot(iter));
      }
      if (trace) {
        TraceRecord rec;
        rec.iteration = iter;
        rec.test_mse = iter_mse;
        rec.edge_density.resize(static_cast<std::size_t>(config.max_lag));
        rec.active_factors.resize(static_cast<std::size_t>(config.max_lag));
        for (int lag = 0; lag < config.max_lag; ++lag) {
          const auto& g = state.graph[static_cast<std::size_t>(lag)];
          long long on = 0;
          for (std::size_t idx = 0; idx < g.size(); ++idx) on += g.data()[idx];
          rec.edge_density[static_cast<std::size_t>(lag)] =
              static_cast<double>(on) / static_cast<double>(g.size());
          int active = 0;
          for (double r : state.factor[static_cast<std::size_t>(lag)].r) {
            if (r > 0.01) ++active;
          }
          rec.active_factors[static_cast<std::size_t>(lag)] = active;
        }
        trace(rec);
      }
    }

    result.counters.graph_entries += stats.counters().graph_entries;
    result.counters.graph_flips += stats.counters().graph_flips;
    result.counters.coeff_entries += stats.counters().coeff_entries;
    result.counters.coeff_changes += stats.counters().coeff_changes;
    result.counters.update_work += stats.counters().update_work;
    result.counters.rebuilds += stats.counters().rebuilds;
    result.counters.degenerate_edges += stats.counters().degenerate_edges;

    if (chain == 0) {
      merged = std::move(acc);
      result.last_state = std::move(state);
    } else {
      merged.merge(acc);
    }
  }

  result.scores = merged.aggregate_lags();
  result.edge_mean = merged.edge_mean();
  result.final_test_mse = suffix_mse(merged.b_mean(), data.x, split.train_steps);
  result.acc = std::move(merged);
  return result;
}

}  // namespace pfgcg
