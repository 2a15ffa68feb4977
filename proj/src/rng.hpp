#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace pfgcg {

// Every gamma draw and gamma density in this codebase uses the shape/scale
// parameterisation: Gamma(shape, scale) has mean shape*scale and variance
// shape*scale^2. Rates are always converted to scales at the call site.

// Deterministic random stream. A (seed, stream_id) pair fully determines the
// sequence of draws, and distinct stream_ids give independent streams, so
// chains and replicates can be seeded reproducibly without sharing state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1); never returns exactly zero.
  double uniform_pos();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Gamma(shape, scale) draw, strictly positive. Shapes below one are handled
// with the boost identity Gamma(shape) ~ Gamma(shape+1) * U^(1/shape), which
// stays accurate where naive rejection samplers return zero.
double sample_gamma(double shape, double scale, RngStream& rng);

// Normal draw parameterised by mean and variance (variance > 0).
double sample_normal(double mean, double variance, RngStream& rng);

// Poisson draw; rate may be zero (returns zero).
std::int64_t sample_poisson(double rate, RngStream& rng);

// Poisson draw conditioned on the value being >= threshold (threshold >= 1,
// rate > 0). Uses inverse-CDF on the renormalised tail; when the truncation
// removes almost no mass it falls back to rejection from the plain Poisson.
// If the tail mass underflows entirely the draw saturates at the threshold,
// which is the overwhelming-probability value in that regime.
std::int64_t sample_left_truncated_poisson(double rate, int threshold, RngStream& rng);

// Draw from {0, ..., threshold-1} with probabilities proportional to the
// Poisson(rate) masses of those values (rate > 0, threshold >= 1). This is
// the conditional law of a Poisson count given that it lies below threshold.
int sample_categorical_poisson_tail(double rate, int threshold, RngStream& rng);

// Multinomial draw: distributes `total` among probs.size() cells. Probabilities
// must be nonnegative and sum to one within 1e-9. Small totals use repeated
// categorical draws; large totals use sequential binomial splitting.
void sample_multinomial(std::int64_t total, std::span<const double> probs,
                        std::span<std::int64_t> out, RngStream& rng);

// Chinese-restaurant-table count: number of occupied tables after seating
// `count` customers with concentration `concentration` (> 0). Returns 0 when
// count == 0 and at least 1 otherwise.
std::int64_t sample_crt(std::int64_t count, double concentration, RngStream& rng);

// Bernoulli draw; p must lie in [0, 1] up to 1e-9 slack (clamped).
int sample_bernoulli(double p, RngStream& rng);

}  // namespace pfgcg
