#pragma once

#include <cstdint>

#include "rng.hpp"

namespace pfgcg {

// Thresholded-Poisson edge link: a latent count M ~ Poisson(rate) induces the
// edge indicator G = 1(M >= threshold). The helpers below evaluate the exact
// marginal edge law and draw M from its conditional given G, all in log space
// so extreme rates stay finite.

// log Poisson(rate) probability mass at k (k >= 0, rate >= 0).
double log_poisson_pmf(std::int64_t k, double rate);

// log P(X <= k) for X ~ Poisson(rate); k >= -1 (k = -1 gives -inf).
double log_poisson_cdf(double rate, std::int64_t k);

// log P(X >= k) for X ~ Poisson(rate); k >= 0.
double log_poisson_sf(double rate, std::int64_t k);

// P(G = 1) = P(Poisson(rate) >= threshold); rate >= 0, threshold >= 1.
// With threshold = 1 this reduces to 1 - exp(-rate).
double marginal_prob_one(double rate, int threshold);

// P(G = 0) = P(Poisson(rate) < threshold); the complement of the above.
double prob_below_threshold(double rate, int threshold);

// Draw the latent count M given the edge indicator: edge = 1 conditions the
// Poisson on M >= threshold, edge = 0 on M < threshold. rate > 0 required.
std::int64_t sample_count_given_edge(int edge, double rate, int threshold, RngStream& rng);

}  // namespace pfgcg
