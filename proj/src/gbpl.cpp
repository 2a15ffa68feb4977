#include "gbpl.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfgcg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_threshold(int threshold) {
  if (threshold < 1) {
    throw std::invalid_argument("gbpl: threshold must be >= 1");
  }
}

}  // namespace

double log_poisson_pmf(std::int64_t k, double rate) {
  if (k < 0) return kNegInf;
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("log_poisson_pmf: rate must be nonnegative");
  }
  if (rate == 0.0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(rate) - rate -
         std::lgamma(static_cast<double>(k) + 1.0);
}

double log_poisson_cdf(double rate, std::int64_t k) {
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("log_poisson_cdf: rate must be nonnegative");
  }
  if (k < 0) return kNegInf;
  if (rate == 0.0) return 0.0;
  // Sum the k+1 leading masses in log space, anchored at the largest term.
  // k is a small truncation threshold here, so the direct sum is exact enough
  // and avoids incomplete-gamma continued fractions.
  const double log_rate = std::log(rate);
  double max_log = kNegInf;
  double lg = 0.0;  // log v!
  for (std::int64_t v = 0; v <= k; ++v) {
    if (v > 0) lg += std::log(static_cast<double>(v));
    const double lt = v * log_rate - lg;
    if (lt > max_log) max_log = lt;
  }
  double sum = 0.0;
  lg = 0.0;
  for (std::int64_t v = 0; v <= k; ++v) {
    if (v > 0) lg += std::log(static_cast<double>(v));
    sum += std::exp(v * log_rate - lg - max_log);
  }
  const double out = max_log - rate + std::log(sum);
  return out > 0.0 ? 0.0 : out;
}

double log_poisson_sf(double rate, std::int64_t k) {
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("log_poisson_sf: rate must be nonnegative");
  }
  if (k <= 0) return 0.0;
  if (rate == 0.0) return kNegInf;
  const double log_cdf = log_poisson_cdf(rate, k - 1);
  if (log_cdf > -1e-10) {
    // CDF at k-1 is numerically one, which forces k well above the rate: sum
    // the upper tail directly instead of cancelling log(1 - exp(log_cdf)).
    // The tail is dominated by its first term and the ratios rate/v stay
    // below one, so the scaled sum converges quickly.
    const double first = k * std::log(rate) - std::lgamma(static_cast<double>(k) + 1.0);
    const std::int64_t cap =
        k + static_cast<std::int64_t>(60.0 * std::sqrt(rate + 1.0)) + 400;
    double term = 1.0;
    double sum = 1.0;
    for (std::int64_t v = k + 1; v <= cap; ++v) {
      term *= rate / static_cast<double>(v);
      sum += term;
      if (term < sum * 1e-18) break;
    }
    const double out = first - rate + std::log(sum);
    return out > 0.0 ? 0.0 : out;
  }
  // log(1 - exp(log_cdf)) without cancellation.
  return std::log(-std::expm1(log_cdf));
}

double marginal_prob_one(double rate, int threshold) {
  check_threshold(threshold);
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("marginal_prob_one: rate must be nonnegative");
  }
  if (rate == 0.0) return 0.0;
  const double v = std::exp(log_poisson_sf(rate, threshold));
  return v > 1.0 ? 1.0 : v;
}

double prob_below_threshold(double rate, int threshold) {
  check_threshold(threshold);
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("prob_below_threshold: rate must be nonnegative");
  }
  const double v = std::exp(log_poisson_cdf(rate, threshold - 1));
  return v > 1.0 ? 1.0 : v;
}

std::int64_t sample_count_given_edge(int edge, double rate, int threshold, RngStream& rng) {
  check_threshold(threshold);
  if (!(rate > 0.0)) {
    throw std::invalid_argument("sample_count_given_edge: rate must be positive");
  }
  if (edge != 0 && edge != 1) {
    throw std::invalid_argument("sample_count_given_edge: edge must be 0 or 1");
  }
  if (edge == 1) {
    return sample_left_truncated_poisson(rate, threshold, rng);
  }
  return sample_categorical_poisson_tail(rate, threshold, rng);
}

}  // namespace pfgcg
