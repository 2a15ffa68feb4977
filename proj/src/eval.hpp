#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace pfgcg {

// Scores of one run against a ground-truth graph, plus the context it was
// computed in (free-form echo of the resolved configuration).
struct MetricReport {
  double auroc = 0.0;
  double auprc = 0.0;
  std::int64_t shd = 0;
  double test_mse = 0.0;
  std::string config_echo;
};

// Probability that a uniformly random positive entry outscores a random
// negative one, ties counting one half (rank-sum with midranks). Requires
// both classes present.
double auroc(const Mat2<double>& scores, const Mat2<std::uint8_t>& truth);

// Area under the precision-recall step curve over descending unique score
// thresholds (no linear interpolation). Requires at least one positive.
double auprc(const Mat2<double>& scores, const Mat2<std::uint8_t>& truth);

// Structural Hamming distance: number of mismatched entries, diagonal
// included.
std::int64_t shd(const Mat2<std::uint8_t>& pred, const Mat2<std::uint8_t>& truth);

// Mean squared error over all test timestamps and variables.
double test_mse(const std::vector<std::vector<double>>& predictions,
                const std::vector<std::vector<double>>& actuals);

// Sparsity level with the smallest test MSE; ties break toward the smaller
// (sparser) level. Ground truth is never consulted.
int select_model(const std::vector<std::pair<int, MetricReport>>& runs);

}  // namespace pfgcg
