#include "data.hpp"

#include <cmath>
#include <vector>

#include "io.hpp"
#include "rng.hpp"

namespace pfgcg {

namespace {

void lorenz96_rhs(std::span<const double> x, double forcing, std::span<double> out) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const double xp1 = x[static_cast<std::size_t>((i + 1) % n)];
    const double xm2 = x[static_cast<std::size_t>((i - 2 + n) % n)];
    const double xm1 = x[static_cast<std::size_t>((i - 1 + n) % n)];
    out[static_cast<std::size_t>(i)] =
        (xp1 - xm2) * xm1 - x[static_cast<std::size_t>(i)] + forcing;
  }
}

// Generic RK4 step for a fixed-form right-hand side.
template <typename Rhs>
void rk4_step(std::vector<double>& x, double dt, Rhs&& rhs) {
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  rhs(std::span<const double>(x), std::span<double>(k1));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  rhs(std::span<const double>(tmp), std::span<double>(k2));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  rhs(std::span<const double>(tmp), std::span<double>(k3));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  rhs(std::span<const double>(tmp), std::span<double>(k4));
  for (std::size_t i = 0; i < n; ++i) {
    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace

void lorenz96_step(std::span<const double> x, double forcing, double dt,
                   std::span<double> out) {
  if (x.size() < 4) throw ConfigError("lorenz96_step: need at least 4 variables");
  std::vector<double> state(x.begin(), x.end());
  rk4_step(state, dt,
           [forcing](std::span<const double> in, std::span<double> o) {
             lorenz96_rhs(in, forcing, o);
           });
  for (std::size_t i = 0; i < state.size(); ++i) out[i] = state[i];
}

std::pair<TimeSeriesData, GroundTruthGraph> gen_lorenz96(const Lorenz96Params& params) {
  const int n = params.num_vars;
  if (n < 4) throw ConfigError("gen_lorenz96: num_vars must be >= 4");
  if (params.num_steps < 2) throw ConfigError("gen_lorenz96: num_steps must be >= 2");
  if (!(params.dt > 0.0)) throw ConfigError("gen_lorenz96: dt must be positive");
  if (params.subsample < 1) throw ConfigError("gen_lorenz96: subsample must be >= 1");
  if (params.transient_steps < 0) throw ConfigError("gen_lorenz96: negative transient");

  RngStream rng(params.seed, 0);
  std::vector<double> state(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    state[static_cast<std::size_t>(i)] =
        params.forcing + (params.init_sd > 0.0
                              ? sample_normal(0.0, params.init_sd * params.init_sd, rng)
                              : 0.0);
  }
  auto rhs = [&params](std::span<const double> in, std::span<double> o) {
    lorenz96_rhs(in, params.forcing, o);
  };
  for (int s = 0; s < params.transient_steps; ++s) rk4_step(state, params.dt, rhs);

  TimeSeriesData data;
  data.x = Mat2<double>(n, params.num_steps, 0.0);
  data.name = "lorenz96";
  for (int t = 0; t < params.num_steps; ++t) {
    if (t > 0) {
      for (int s = 0; s < params.subsample; ++s) rk4_step(state, params.dt, rhs);
    }
    for (int i = 0; i < n; ++i) data.x(i, t) = state[static_cast<std::size_t>(i)];
  }
  if (params.noise_sd > 0.0) {
    const double var = params.noise_sd * params.noise_sd;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < params.num_steps; ++t) {
        data.x(i, t) += sample_normal(0.0, var, rng);
      }
    }
  }

  GroundTruthGraph truth;
  truth.adj = Mat2<std::uint8_t>(n, n, 0);
  for (int i = 0; i < n; ++i) {
    for (int off : {-2, -1, 0, 1}) {
      truth.adj(i, ((i + off) % n + n) % n) = 1;
    }
  }
  return {std::move(data), std::move(truth)};
}

std::pair<TimeSeriesData, GroundTruthGraph> gen_lotka_volterra(
    const LotkaVolterraParams& params) {
  const int p = params.pairs;
  if (p < 1) throw ConfigError("gen_lotka_volterra: pairs must be >= 1");
  if (params.num_steps < 2) throw ConfigError("gen_lotka_volterra: num_steps must be >= 2");
  if (!(params.dt > 0.0)) throw ConfigError("gen_lotka_volterra: dt must be positive");
  if (params.subsample < 1) throw ConfigError("gen_lotka_volterra: subsample must be >= 1");
  if (!(params.alpha > 0.0) || !(params.beta >= 0.0) || !(params.gamma > 0.0) ||
      !(params.delta >= 0.0)) {
    throw ConfigError("gen_lotka_volterra: rates must be positive (couplings nonnegative)");
  }
  if (params.window < 1 || params.window > p) {
    throw ConfigError("gen_lotka_volterra: window must be in [1, pairs]");
  }
  if (!(params.init_value > 0.0)) {
    throw ConfigError("gen_lotka_volterra: init_value must be positive");
  }

  const int n = 2 * p;
  RngStream rng(params.seed, 0);
  // Layout: prey 0..p-1, predators p..2p-1; prey i interacts with predators
  // i..i+window-1 (mod p), giving a banded coupling structure.
  std::vector<double> state(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double jitter =
        params.init_sd > 0.0 ? sample_normal(0.0, params.init_sd * params.init_sd, rng) : 0.0;
    state[static_cast<std::size_t>(i)] = params.init_value * std::exp(jitter);
  }
  auto rhs = [&](std::span<const double> in, std::span<double> o) {
    for (int i = 0; i < p; ++i) {
      double pred_sum = 0.0;
      for (int wdx = 0; wdx < params.window; ++wdx) {
        pred_sum += in[static_cast<std::size_t>(p + (i + wdx) % p)];
      }
      const double prey = in[static_cast<std::size_t>(i)];
      o[static_cast<std::size_t>(i)] = params.alpha * prey - params.beta * prey * pred_sum;
    }
    for (int i = 0; i < p; ++i) {
      double prey_sum = 0.0;
      for (int wdx = 0; wdx < params.window; ++wdx) {
        prey_sum += in[static_cast<std::size_t>((i - wdx + p) % p)];
      }
      const double pred = in[static_cast<std::size_t>(p + i)];
      o[static_cast<std::size_t>(p + i)] =
          params.delta * pred * prey_sum - params.gamma * pred;
    }
  };
  for (int s = 0; s < params.transient_steps; ++s) rk4_step(state, params.dt, rhs);

  TimeSeriesData data;
  data.x = Mat2<double>(n, params.num_steps, 0.0);
  data.name = "lotka_volterra";
  for (int t = 0; t < params.num_steps; ++t) {
    if (t > 0) {
      for (int s = 0; s < params.subsample; ++s) rk4_step(state, params.dt, rhs);
    }
    for (int i = 0; i < n; ++i) {
      const double v = state[static_cast<std::size_t>(i)];
      if (!(v > 0.0)) {
        throw NumericError("gen_lotka_volterra: population left the positive orthant; reduce dt");
      }
      data.x(i, t) = std::log(v);
    }
  }
  if (params.noise_sd > 0.0) {
    const double var = params.noise_sd * params.noise_sd;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < params.num_steps; ++t) {
        data.x(i, t) += sample_normal(0.0, var, rng);
      }
    }
  }

  GroundTruthGraph truth;
  truth.adj = Mat2<std::uint8_t>(n, n, 0);
  const bool prey_coupled = params.beta > 0.0;
  const bool pred_coupled = params.delta > 0.0;
  for (int i = 0; i < n; ++i) truth.adj(i, i) = 1;
  for (int i = 0; i < p; ++i) {
    for (int wdx = 0; wdx < params.window; ++wdx) {
      if (prey_coupled) truth.adj(i, p + (i + wdx) % p) = 1;       // predator eats prey i
      if (pred_coupled) truth.adj(p + i, (i - wdx + p) % p) = 1;   // prey feeds predator i
    }
  }
  return {std::move(data), std::move(truth)};
}

TimeSeriesData load_csv(const std::string& path) {
  TimeSeriesData data;
  const Mat2<double> table = io::read_matrix_csv(path);  // rows = timestamps
  if (table.rows() < 2) throw DataError("load_csv: need at least 2 timestamps in " + path);
  data.x = Mat2<double>(table.cols(), table.rows(), 0.0);
  for (int t = 0; t < table.rows(); ++t) {
    for (int i = 0; i < table.cols(); ++i) data.x(i, t) = table(t, i);
  }
  data.name = path;
  return data;
}

SplitIndices split_train_test(const TimeSeriesData& data) {
  const int t_total = data.num_steps();
  if (t_total < 5) throw DataError("split: need at least 5 timestamps");
  if (!(data.train_frac > 0.0) || !(data.train_frac < 1.0)) {
    throw DataError("split: train_frac must lie in (0, 1)");
  }
  const int train = static_cast<int>(std::floor(data.train_frac * t_total));
  const int test = t_total - train;
  if (train < 2 || test < 2) {
    throw DataError("split: degenerate split (one side has fewer than 2 timestamps)");
  }
  return {train, test};
}

}  // namespace pfgcg
