#pragma once

#include <cstdint>
#include <vector>

#include "gibbs.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace pfgcg {

// Iteration schedule of one chain: total sweeps, burn-in discarded up front,
// and every thin-th post-burn-in sweep collected.
struct RunSchedule {
  int total_iters = 10000;
  int burn_in = 5000;
  int thin = 10;

  void validate() const;
  int collections() const { return (total_iters - burn_in) / thin; }
  // True if sweep `iter` (1-based) is a collection point.
  bool collect_at(int iter) const {
    return iter > burn_in && (iter - burn_in) % thin == 0;
  }
  // Collection slot of sweep `iter` (only valid when collect_at(iter)).
  int slot(int iter) const { return (iter - burn_in) / thin - 1; }
};

// Collected posterior evidence of one (or several merged) chains: the tensor
// of per-entry edge probabilities, running means of the effective
// coefficients and factor weights, and the per-iteration test-MSE trace.
class PosteriorAccumulator {
 public:
  PosteriorAccumulator() = default;
  PosteriorAccumulator(int num_vars, int max_lag, int num_factors, int capacity);

  // Stores the sweep's edge probabilities into slot h and folds the state's
  // effective coefficients and factor weights into the running means. Slots
  // fill sequentially; recording the same sweep twice is a consistency error.
  void record_collection(const PFGCGState& state, const SweepStats& stats, int h);

  int collected() const { return collected_; }
  int capacity() const { return capacity_; }
  int num_vars() const { return n_; }
  int max_lag() const { return lags_; }
  int num_factors() const { return k_; }

  // Edge probability of entry (i, j) at lag `lag` in collection h.
  float y(int i, int j, int lag, int h) const {
    return y_[y_index(i, j, lag, h)];
  }

  const std::vector<Mat2<double>>& b_mean() const { return b_mean_; }
  const Mat2<double>& r_mean() const { return r_mean_; }

  // Per-lag posterior mean of the edge probabilities (mean of Y over h).
  std::vector<Mat2<double>> edge_mean() const;

  // Lag-aggregated scores: per collection the elementwise max over lags,
  // then the mean over collections.
  Mat2<double> aggregate_lags() const;

  // Per lag, how many factor weights have posterior mean above `threshold`.
  std::vector<int> active_factors(double threshold) const;

  void push_mse(double value) { mse_trace_.push_back(value); }
  const std::vector<double>& mse_trace() const { return mse_trace_; }

  // Folds another chain's collections into this accumulator: Y slots are
  // concatenated, running means combined by collection count, and MSE traces
  // averaged per iteration.
  void merge(const PosteriorAccumulator& other);

 private:
  std::size_t y_index(int i, int j, int lag, int h) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * lags_ + lag) * capacity_ + h;
  }

  int n_ = 0;
  int lags_ = 0;
  int k_ = 0;
  int capacity_ = 0;
  int collected_ = 0;
  int chains_ = 1;
  long long last_sweep_ = -1;
  std::vector<float> y_;  // [i][j][lag][h], h fastest
  std::vector<Mat2<double>> b_mean_;  // per lag, N x N
  Mat2<double> r_mean_;               // max_lag x K
  std::vector<double> mse_trace_;
};

// Independent Bernoulli draw per entry from a matrix of scores in [0, 1].
Mat2<std::uint8_t> sample_binary_graph(const Mat2<double>& scores, RngStream& rng);

// One-step-ahead prediction: x_hat(:, t) = sum_lag B[lag] * x(:, t - lag - 1).
// t indexes columns of x and must be at least the number of lag matrices.
std::vector<double> predict_one_step(const std::vector<Mat2<double>>& b,
                                     const Mat2<double>& x, int t);

}  // namespace pfgcg
