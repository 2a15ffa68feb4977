#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "rng.hpp"

namespace pfgcg {

// Error taxonomy mirrored by the C API status codes and CLI exit codes:
// configuration/domain problems, malformed or inconsistent data, and
// numerical breakdown during inference.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimensions and fixed hyperparameters of one model instance.
struct ModelConfig {
  int num_vars = 0;     // N: series in the panel
  int num_steps = 0;    // T: timestamps available for fitting
  int max_lag = 1;      // number of lag matrices
  int num_factors = 50; // K: truncation level of the factorised edge-rate prior
  int threshold = 1;    // V: latent-count level at which an edge switches on
  bool fixed_dense_graph = false;  // ablation: freeze the graph at all-ones
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-domain values. Thresholds above 3 are legal
  // but unusual; they get a one-line stderr note rather than an error.
  void validate() const;

  int effective_steps() const { return num_steps - max_lag; }
};

// Per-lag factorisation of the edge-rate matrix: rate(i,j) = sum_k
// theta(i,k) * r(k) * phi(j,k), plus its gamma hyperparameters and the
// latent counts attached to this lag.
struct LagFactorState {
  Mat2<double> theta;      // N x K, child weights shaping incoming edges
  Mat2<double> phi;        // N x K, parent weights shaping outgoing edges
  std::vector<double> r;   // K, factor weights; shrinkage drives unused ones to zero
  std::vector<double> a;   // N, gamma shape hypers for theta rows
  std::vector<double> b;   // N, gamma shape hypers for phi rows
  std::vector<double> d;   // K, gamma rate hypers for theta columns
  std::vector<double> e;   // K, gamma rate hypers for phi columns
  double c = 1.0;          // gamma rate hyper shared by all factor weights
  Mat2<std::int64_t> m;    // N x N latent edge counts
  Ten3<std::int64_t> mk;   // N x N x K split of m across factors

  // rate(i,j) for this lag, floored at the smallest positive double so the
  // Poisson machinery never sees an exact zero.
  double edge_rate(int i, int j) const;
};

// Full sampler state: lag coefficient matrices, binary graphs, precisions,
// and one factor block per lag.
struct PFGCGState {
  ModelConfig config;
  std::vector<Mat2<double>> coeff;        // per lag, N x N (kept dense even off-graph)
  std::vector<Mat2<std::uint8_t>> graph;  // per lag, N x N edge indicators
  std::vector<Mat2<double>> psi;          // per lag, N x N per-entry coefficient precisions
  std::vector<double> lambda;             // N, observation noise precisions
  std::vector<LagFactorState> factor;     // per lag

  double prior_edge_rate(int lag, int i, int j) const {
    return factor[static_cast<std::size_t>(lag)].edge_rate(i, j);
  }

  // True if any continuous field is non-finite (inference blow-up detector).
  bool has_non_finite() const;
};

// Starting state: hyperparameters, precisions, loadings, and coefficients
// drawn from their priors, but the graph set to all-ones (so early sweeps are
// data-driven instead of trapped near-empty) with latent counts redrawn
// consistently with that graph.
PFGCGState init_state(const ModelConfig& config, RngStream& rng);

// Ancestral draw of the full state from the prior; unlike init_state the
// graph is thresholded from the Poisson latent counts.
PFGCGState prior_draw(const ModelConfig& config, RngStream& rng);

// Simulates observations into x (num_vars x num_steps) given the state's
// coefficients, graphs, and noise precisions. Columns before max_lag are left
// untouched and serve as the initial condition.
void simulate_observations(const PFGCGState& state, Mat2<double>& x, RngStream& rng);

// Binary checkpoint of a full state (versioned header, little-endian).
void save_state(const PFGCGState& state, const std::string& path);
PFGCGState load_state(const std::string& path);

}  // namespace pfgcg
