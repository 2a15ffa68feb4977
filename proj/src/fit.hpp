#pragma once

#include <functional>
#include <vector>

#include "data.hpp"
#include "gibbs.hpp"
#include "model.hpp"
#include "posterior.hpp"

namespace pfgcg {

// Everything one inference run needs besides the data itself.
struct FitConfig {
  int max_lag = 1;
  int num_factors = 50;
  int threshold = 1;
  bool fixed_dense_graph = false;
  RunSchedule schedule;
  int chains = 1;
  std::uint64_t seed = 0;
  ScanOrder scan_order = ScanOrder::kRowMajor;
  FactorOrder factor_order = FactorOrder::kEager;

  void validate() const;
};

// Per-iteration diagnostics handed to the optional trace sink.
struct TraceRecord {
  int iteration = 0;
  double test_mse = 0.0;
  std::vector<double> edge_density;  // per lag, mean of the graph entries
  std::vector<int> active_factors;   // per lag, count of weights > 0.01
};

struct FitResult {
  PosteriorAccumulator acc;
  Mat2<double> scores;                  // lag-aggregated edge scores
  std::vector<Mat2<double>> edge_mean;  // per-lag posterior edge means
  double final_test_mse = 0.0;          // MSE of the posterior-mean predictor
  int train_steps = 0;
  int test_steps = 0;
  PFGCGState last_state;        // final state of the first chain (checkpointable)
  SweepCounters counters;       // aggregated over chains
};

using TraceSink = std::function<void(const TraceRecord&)>;

// Runs `chains` independent Gibbs chains on the training prefix of `data`,
// evaluating one-step predictions on the held-out suffix every iteration, and
// merges the chains' collections. Throws NumericError if the input contains
// non-finite values or a state turns non-finite (the message then names the
// chain and iteration).
FitResult run_fit(const TimeSeriesData& data, const FitConfig& config,
                  const TraceSink& trace = {});

}  // namespace pfgcg
