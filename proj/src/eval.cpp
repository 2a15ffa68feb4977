#include "eval.hpp"

#include <algorithm>
#include <cmath>

#include "model.hpp"

namespace pfgcg {

namespace {

void check_shapes(const Mat2<double>& scores, const Mat2<std::uint8_t>& truth) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols()) {
    throw DataError("metric: scores/truth shape mismatch");
  }
  for (std::size_t idx = 0; idx < truth.size(); ++idx) {
    if (truth.data()[idx] > 1) throw DataError("metric: truth must be binary");
  }
}

}  // namespace

double auroc(const Mat2<double>& scores, const Mat2<std::uint8_t>& truth) {
  check_shapes(scores, truth);
  std::vector<std::pair<double, int>> entries;
  entries.reserve(scores.size());
  std::int64_t n_pos = 0;
  for (std::size_t idx = 0; idx < scores.size(); ++idx) {
    entries.emplace_back(scores.data()[idx], truth.data()[idx]);
    n_pos += truth.data()[idx];
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(entries.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("auroc: truth contains a single class; metric undefined");
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
  // Rank-sum over positives with midranks across tied scores.
  double rank_sum_pos = 0.0;
  std::size_t idx = 0;
  while (idx < entries.size()) {
    std::size_t end = idx;
    while (end < entries.size() && entries[end].first == entries[idx].first) ++end;
    const double midrank = 0.5 * (static_cast<double>(idx + 1) + static_cast<double>(end));
    for (std::size_t t = idx; t < end; ++t) {
      if (entries[t].second) rank_sum_pos += midrank;
    }
    idx = end;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double auprc(const Mat2<double>& scores, const Mat2<std::uint8_t>& truth) {
  check_shapes(scores, truth);
  std::vector<std::pair<double, int>> entries;
  entries.reserve(scores.size());
  std::int64_t n_pos = 0;
  for (std::size_t idx = 0; idx < scores.size(); ++idx) {
    entries.emplace_back(scores.data()[idx], truth.data()[idx]);
    n_pos += truth.data()[idx];
  }
  if (n_pos == 0) throw DataError("auprc: no positive entries; metric undefined");
  std::sort(entries.begin(), entries.end(),
            [](const auto& lhs, const auto& rhs) { return lhs.first > rhs.first; });
  double area = 0.0;
  double prev_recall = 0.0;
  std::int64_t tp = 0;
  std::int64_t predicted = 0;
  std::size_t idx = 0;
  while (idx < entries.size()) {
    // Consume the whole tie group: one threshold per unique score.
    std::size_t end = idx;
    while (end < entries.size() && entries[end].first == entries[idx].first) ++end;
    for (std::size_t t = idx; t < end; ++t) tp += entries[t].second;
    predicted += static_cast<std::int64_t>(end - idx);
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    idx = end;
  }
  return area;
}

std::int64_t shd(const Mat2<std::uint8_t>& pred, const Mat2<std::uint8_t>& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw DataError("shd: shape mismatch");
  }
  std::int64_t count = 0;
  for (std::size_t idx = 0; idx < pred.size(); ++idx) {
    const int p = pred.data()[idx] ? 1 : 0;
    const int t = truth.data()[idx] ? 1 : 0;
    count += p != t;
  }
  return count;
}

double test_mse(const std::vector<std::vector<double>>& predictions,
                const std::vector<std::vector<double>>& actuals) {
  if (predictions.size() != actuals.size()) {
    throw DataError("test_mse: prediction/actual lengths differ");
  }
  if (predictions.empty()) throw DataError("test_mse: empty test set");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    if (predictions[t].size() != actuals[t].size()) {
      throw DataError("test_mse: vector lengths differ at step " + std::to_string(t));
    }
    for (std::size_t i = 0; i < predictions[t].size(); ++i) {
      const double d = predictions[t][i] - actuals[t][i];
      sum += d * d;
      ++count;
    }
  }
  if (count == 0) throw DataError("test_mse: empty test set");
  return sum / static_cast<double>(count);
}

int select_model(const std::vector<std::pair<int, MetricReport>>& runs) {
  if (runs.empty()) throw ConfigError("select_model: no runs to choose from");
  int best_v = runs.front().first;
  double best_mse = runs.front().second.test_mse;
  for (const auto& [v, report] : runs) {
    if (report.test_mse < best_mse || (report.test_mse == best_mse && v < best_v)) {
      best_v = v;
      best_mse = report.test_mse;
    }
  }
  return best_v;
}

}  // namespace pfgcg
