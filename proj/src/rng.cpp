#include "rng.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gbpl.hpp"

namespace pfgcg {

namespace {

// Smallest positive normal double; used as a positivity floor so downstream
// rates and scales never collapse to exactly zero.
constexpr double kTinyPositive = DBL_MIN;

// Tail mass below this is treated as numerically extinct.
const double kLogExtinct = std::log(1e-300);

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double RngStream::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

double sample_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("sample_gamma: shape and scale must be positive");
  }
  double g;
  if (shape < 1.0) {
    std::gamma_distribution<double> dist(shape + 1.0, 1.0);
    g = dist(rng.engine());
    // exp(log(u)/shape) instead of pow(u, 1/shape): the exponent can exceed
    // 1e4 for tiny shapes and pow loses the underflow-to-zero distinction.
    g *= std::exp(std::log(rng.uniform_pos()) / shape);
  } else {
    std::gamma_distribution<double> dist(shape, 1.0);
    g = dist(rng.engine());
  }
  g *= scale;
  return g < kTinyPositive ? kTinyPositive : g;
}

double sample_normal(double mean, double variance, RngStream& rng) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("sample_normal: variance must be positive");
  }
  std::normal_distribution<double> dist(0.0, 1.0);
  return mean + std::sqrt(variance) * dist(rng.engine());
}

std::int64_t sample_poisson(double rate, RngStream& rng) {
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("sample_poisson: rate must be nonnegative");
  }
  if (rate == 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(rate);
  return dist(rng.engine());
}

std::int64_t sample_left_truncated_poisson(double rate, int threshold, RngStream& rng) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("sample_left_truncated_poisson: rate must be positive");
  }
  if (threshold < 1) {
    throw std::invalid_argument("sample_left_truncated_poisson: threshold must be >= 1");
  }
  const double log_sf = log_poisson_sf(rate, threshold);
  if (log_sf < kLogExtinct) {
    // P(X >= threshold) underflows: conditioned on the event, essentially all
    // mass sits at the threshold itself, so saturate there.
    return threshold;
  }
  const double sf = std::exp(log_sf);
  if (sf > 0.999999) {
    // Truncation removes almost nothing; rejection is cheap and exact.
    for (;;) {
      const std::int64_t m = sample_poisson(rate, rng);
      if (m >= threshold) return m;
    }
  }
  // Inverse CDF on the renormalised tail: draw u in [0,1) and walk the masses
  // pmf(threshold)/sf, pmf(threshold+1)/sf, ... until the running sum passes u.
  // Equivalent to drawing u' uniform on [P(X < threshold), 1) and inverting the
  // full CDF, without the cancellation of forming u' explicitly.
  const double u = rng.uniform();
  double term = std::exp(log_poisson_pmf(threshold, rate) - log_sf);
  double cum = term;
  std::int64_t m = threshold;
  const std::int64_t cap =
      threshold + static_cast<std::int64_t>(rate + 60.0 * std::sqrt(rate + 1.0) + 120.0);
  while (u > cum && m < cap) {
    ++m;
    term *= rate / static_cast<double>(m);
    cum += term;
  }
  return m;
}

int sample_categorical_poisson_tail(double rate, int threshold, RngStream& rng) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("sample_categorical_poisson_tail: rate must be positive");
  }
  if (threshold < 1) {
    throw std::invalid_argument("sample_categorical_poisson_tail: threshold must be >= 1");
  }
  if (threshold == 1) return 0;
  // Normalise the masses of {0, ..., threshold-1} in log space; threshold is
  // small in practice so the O(threshold) walk is fine.
  const double log_rate = std::log(rate);
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(static_cast<std::size_t>(threshold));
  double lg = 0.0;  // log v! accumulated incrementally
  for (int v = 0; v < threshold; ++v) {
    if (v > 0) lg += std::log(static_cast<double>(v));
    logs[v] = v * log_rate - lg;
    max_log = std::max(max_log, logs[v]);
  }
  double total = 0.0;
  for (int v = 0; v < threshold; ++v) {
    logs[v] = std::exp(logs[v] - max_log);
    total += logs[v];
  }
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (int v = 0; v < threshold; ++v) {
    cum += logs[v];
    if (u < cum) return v;
  }
  return threshold - 1;
}

void sample_multinomial(std::int64_t total, std::span<const double> probs,
                        std::span<std::int64_t> out, RngStream& rng) {
  if (total < 0) {
    throw std::invalid_argument("sample_multinomial: total must be nonnegative");
  }
  if (probs.size() != out.size() || probs.empty()) {
    throw std::invalid_argument("sample_multinomial: probs/out size mismatch");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw std::invalid_argument("sample_multinomial: probabilities must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("sample_multinomial: probabilities must sum to one");
  }
  std::fill(out.begin(), out.end(), 0);
  if (total == 0) return;

  const std::size_t k = probs.size();
  if (total < 32) {
    // Repeated categorical draws; cheaper than binomial splitting here.
    for (std::int64_t n = 0; n < total; ++n) {
      const double u = rng.uniform() * sum;
      double cum = 0.0;
      std::size_t cell = k - 1;
      for (std::size_t j = 0; j < k; ++j) {
        cum += probs[j];
        if (u < cum) {
          cell = j;
          break;
        }
      }
      ++out[cell];
    }
    return;
  }
  // Sequential binomial splitting: cell j gets Binomial(remaining, p_j / tail).
  std::int64_t remaining = total;
  double tail = sum;
  for (std::size_t j = 0; j + 1 < k && remaining > 0; ++j) {
    double p = probs[j] / tail;
    p = std::clamp(p, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> dist(remaining, p);
    const std::int64_t n = dist(rng.engine());
    out[j] = n;
    remaining -= n;
    tail -= probs[j];
    if (tail <= 0.0) break;
  }
  out[k - 1] += remaining;
}

std::int64_t sample_crt(std::int64_t count, double concentration, RngStream& rng) {
  if (count < 0) {
    throw std::invalid_argument("sample_crt: count must be nonnegative");
  }
  if (!(concentration > 0.0)) {
    throw std::invalid_argument("sample_crt: concentration must be positive");
  }
  std::int64_t tables = 0;
  for (std::int64_t i = 1; i <= count; ++i) {
    const double p = concentration / (concentration + static_cast<double>(i - 1));
    if (rng.uniform() < p) ++tables;
  }
  return tables;
}

int sample_bernoulli(double p, RngStream& rng) {
  if (!(p >= -1e-9) || !(p <= 1.0 + 1e-9)) {
    throw std::invalid_argument("sample_bernoulli: probability out of [0, 1]");
  }
  p = std::clamp(p, 0.0, 1.0);
  return rng.uniform() < p ? 1 : 0;
}

}  // namespace pfgcg
