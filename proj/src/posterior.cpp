#include "posterior.hpp"

#include <algorithm>
#include <cmath>

namespace pfgcg {

void RunSchedule::validate() const {
  if (total_iters < 1) throw ConfigError("schedule: total_iters must be >= 1");
  if (burn_in < 0) throw ConfigError("schedule: burn_in must be >= 0");
  if (burn_in >= total_iters) throw ConfigError("schedule: burn_in must be < total_iters");
  if (thin < 1) throw ConfigError("schedule: thin must be >= 1");
  if (collections() < 1) throw ConfigError("schedule: no collections after burn-in/thinning");
}

PosteriorAccumulator::PosteriorAccumulator(int num_vars, int max_lag, int num_factors,
                                           int capacity)
    : n_(num_vars),
      lags_(max_lag),
      k_(num_factors),
      capacity_(capacity),
      y_(static_cast<std::size_t>(num_vars) * num_vars * max_lag * capacity, 0.0f),
      b_mean_(static_cast<std::size_t>(max_lag), Mat2<double>(num_vars, num_vars, 0.0)),
      r_mean_(max_lag, num_factors, 0.0) {
  if (num_vars < 1 || max_lag < 1 || num_factors < 1 || capacity < 1) {
    throw ConfigError("accumulator: dimensions must be positive");
  }
}

void PosteriorAccumulator::record_collection(const PFGCGState& state,
                                             const SweepStats& stats, int h) {
  if (h != collected_ || h >= capacity_) {
    throw ConfigError("record_collection: slot out of sequence");
  }
  if (stats.sweep_count() == last_sweep_) {
    throw ConfigError("record_collection: edge probabilities are stale (same sweep recorded twice)");
  }
  const double weight = 1.0 / (collected_ + 1);
  for (int lag = 0; lag < lags_; ++lag) {
    const auto& a = state.coeff[static_cast<std::size_t>(lag)];
    const auto& g = state.graph[static_cast<std::size_t>(lag)];
    auto& bm = b_mean_[static_cast<std::size_t>(lag)];
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        y_[y_index(i, j, lag, h)] = static_cast<float>(stats.edge_prob(lag, i, j));
        const double b = g(i, j) ? a(i, j) : 0.0;
        bm(i, j) += (b - bm(i, j)) * weight;
      }
    }
    const auto& f = state.factor[static_cast<std::size_t>(lag)];
    for (int k = 0; k < k_; ++k) {
      r_mean_(lag, k) += (f.r[static_cast<std::size_t>(k)] - r_mean_(lag, k)) * weight;
    }
  }
  last_sweep_ = stats.sweep_count();
  ++collected_;
}

std::vector<Mat2<double>> PosteriorAccumulator::edge_mean() const {
  if (collected_ < 1) throw ConfigError("edge_mean: no collections recorded");
  std::vector<Mat2<double>> out(static_cast<std::size_t>(lags_),
                                Mat2<double>(n_, n_, 0.0));
  for (int lag = 0; lag < lags_; ++lag) {
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        double s = 0.0;
        const std::size_t base = y_index(i, j, lag, 0);
        for (int h = 0; h < collected_; ++h) s += y_[base + static_cast<std::size_t>(h)];
        out[static_cast<std::size_t>(lag)](i, j) = s / collected_;
      }
    }
  }
  return out;
}

Mat2<double> PosteriorAccumulator::aggregate_lags() const {
  if (collected_ < 1) throw ConfigError("aggregate_lags: no collections recorded");
  Mat2<double> out(n_, n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int h = 0; h < collected_; ++h) {
        float best = 0.0f;
        for (int lag = 0; lag < lags_; ++lag) {
          best = std::max(best, y_[y_index(i, j, lag, h)]);
        }
        s += best;
      }
      out(i, j) = s / collected_;
    }
  }
  return out;
}

std::vector<int> PosteriorAccumulator::active_factors(double threshold) const {
  if (collected_ < 1) throw ConfigError("active_factors: no collections recorded");
  if (!(threshold > 0.0)) throw ConfigError("active_factors: threshold must be positive");
  std::vector<int> out(static_cast<std::size_t>(lags_), 0);
  for (int lag = 0; lag < lags_; ++lag) {
    for (int k = 0; k < k_; ++k) {
      if (r_mean_(lag, k) > threshold) ++out[static_cast<std::size_t>(lag)];
    }
  }
  return out;
}

void PosteriorAccumulator::merge(const PosteriorAccumulator& other) {
  if (n_ != other.n_ || lags_ != other.lags_ || k_ != other.k_) {
    throw ConfigError("merge: accumulator dimensions differ");
  }
  if (mse_trace_.size() != other.mse_trace_.size()) {
    throw ConfigError("merge: MSE traces have different lengths");
  }
  const int new_cap = capacity_ + other.capacity_;
  std::vector<float> merged(static_cast<std::size_t>(n_) * n_ * lags_ * new_cap, 0.0f);
  auto idx = [&](int i, int j, int lag, int h) {
    return ((static_cast<std::size_t>(i) * n_ + j) * lags_ + lag) * new_cap + h;
  };
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int lag = 0; lag < lags_; ++lag) {
        for (int h = 0; h < collected_; ++h) {
          merged[idx(i, j, lag, h)] = y_[y_index(i, j, lag, h)];
        }
        for (int h = 0; h < other.collected_; ++h) {
          merged[idx(i, j, lag, collected_ + h)] = other.y_[other.y_index(i, j, lag, h)];
        }
      }
    }
  }
  y_ = std::move(merged);
  capacity_ = new_cap;
  const int total = collected_ + other.collected_;
  if (total > 0) {
    const double w_other = static_cast<double>(other.collected_) / total;
    for (int lag = 0; lag < lags_; ++lag) {
      auto& bm = b_mean_[static_cast<std::size_t>(lag)];
      const auto& ob = other.b_mean_[static_cast<std::size_t>(lag)];
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
          bm(i, j) += (ob(i, j) - bm(i, j)) * w_other;
        }
      }
      for (int k = 0; k < k_; ++k) {
        r_mean_(lag, k) += (other.r_mean_(lag, k) - r_mean_(lag, k)) * w_other;
      }
    }
  }
  const int total_chains = chains_ + other.chains_;
  for (std::size_t t = 0; t < mse_trace_.size(); ++t) {
    mse_trace_[t] = (mse_trace_[t] * chains_ + other.mse_trace_[t] * other.chains_) /
                    total_chains;
  }
  chains_ = total_chains;
  collected_ = total;
  last_sweep_ = std::max(last_sweep_, other.last_sweep_);
}

Mat2<std::uint8_t> sample_binary_graph(const Mat2<double>& scores, RngStream& rng) {
  Mat2<std::uint8_t> out(scores.rows(), scores.cols(), 0);
  for (int i = 0; i < scores.rows(); ++i) {
    for (int j = 0; j < scores.cols(); ++j) {
      const double p = scores(i, j);
      if (!(p >= 0.0) || !(p <= 1.0)) {
        throw ConfigError("sample_binary_graph: score outside [0, 1]");
      }
      out(i, j) = static_cast<std::uint8_t>(sample_bernoulli(p, rng));
    }
  }
  return out;
}

std::vector<double> predict_one_step(const std::vector<Mat2<double>>& b,
                                     const Mat2<double>& x, int t) {
  const int lags = static_cast<int>(b.size());
  if (lags < 1) throw ConfigError("predict_one_step: no coefficient matrices");
  const int n = b[0].rows();
  if (x.rows() != n) throw DataError("predict_one_step: history row count mismatch");
  if (t < lags || t >= x.cols()) {
    throw DataError("predict_one_step: insufficient history at requested time");
  }
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int lag = 0; lag < lags; ++lag) {
    const auto& bm = b[static_cast<std::size_t>(lag)];
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += bm(i, j) * x(j, t - lag - 1);
      out[static_cast<std::size_t>(i)] += acc;
    }
  }
  return out;
}

}  // namespace pfgcg
