#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "grid.hpp"
#include "model.hpp"

namespace pfgcg {

// A panel of series: X(i, t) is variable i at timestamp t.
struct TimeSeriesData {
  Mat2<double> x;          // N x T
  double train_frac = 0.8; // contiguous prefix used for fitting
  std::string name;

  int num_vars() const { return x.rows(); }
  int num_steps() const { return x.cols(); }
};

// Aggregated causal ground truth: entry (i, j) = 1 iff variable j drives
// variable i at any lag.
struct GroundTruthGraph {
  Mat2<std::uint8_t> adj;
};

struct Lorenz96Params {
  int num_vars = 10;
  int num_steps = 500;
  double forcing = 40.0;
  double dt = 0.01;
  int subsample = 5;        // record every subsample-th integration step
  int transient_steps = 500;  // integration steps dropped before recording
  double init_sd = 0.01;    // sd of the perturbation around the equilibrium
  double noise_sd = 0.1;    // observation noise added after integration
  std::uint64_t seed = 0;
};

// Cyclic-coupling chaotic benchmark: dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1}
// - x_i + F, integrated with classic fourth-order Runge-Kutta from a
// perturbed equilibrium. Ground truth row i has ones at columns
// {i-2, i-1, i, i+1} mod N.
std::pair<TimeSeriesData, GroundTruthGraph> gen_lorenz96(const Lorenz96Params& params);

// One RK4 step of the dynamics above (exposed for the order-of-accuracy
// refinement test). x and out have the same length (>= 4); aliasing allowed.
void lorenz96_step(std::span<const double> x, double forcing, double dt,
                   std::span<double> out);

struct LotkaVolterraParams {
  int pairs = 2;            // N = 2 * pairs: prey block then predator block
  int num_steps = 500;
  double alpha = 1.1;       // prey growth rate
  double beta = 0.4;        // predation rate on prey
  double gamma = 0.4;       // predator death rate
  double delta = 0.1;       // predator growth per consumed prey
  int window = 1;           // coupling window: prey i interacts with predators i..i+window-1 (mod pairs)
  double dt = 0.01;
  int subsample = 10;
  int transient_steps = 0;
  double init_value = 10.0; // starting population of every species
  double init_sd = 0.01;    // lognormal jitter on the start
  double noise_sd = 0.1;    // observation noise added after the log transform
  std::uint64_t seed = 0;
};

// Windowed multi-pair predator-prey system, RK4-integrated; series are
// log-transformed before observation noise. Ground truth couples each
// species to itself and to the opposite block inside its window.
std::pair<TimeSeriesData, GroundTruthGraph> gen_lotka_volterra(
    const LotkaVolterraParams& params);

// Reads a rectangular numeric CSV (T rows x N columns, timestamps as rows).
// A single non-numeric first row is treated as a header and skipped.
TimeSeriesData load_csv(const std::string& path);

struct SplitIndices {
  int train_steps;
  int test_steps;
};

// Contiguous prefix/suffix split at floor(train_frac * T). Either side
// shorter than two timestamps is rejected as degenerate.
SplitIndices split_train_test(const TimeSeriesData& data);

}  // namespace pfgcg
