#include "model.hpp"

#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>

#include "gbpl.hpp"

namespace pfgcg {

void ModelConfig::validate() const {
  if (num_vars < 1) throw ConfigError("config: num_vars must be >= 1");
  if (max_lag < 1) throw ConfigError("config: max_lag must be >= 1");
  if (num_steps <= max_lag) throw ConfigError("config: num_steps must exceed max_lag");
  if (num_factors < 1) throw ConfigError("config: num_factors must be >= 1");
  if (threshold < 1) throw ConfigError("config: threshold must be >= 1");
  if (threshold > 3) {
    std::cerr << "note: threshold " << threshold
              << " is outside the usual {1,2,3} range; proceeding anyway\n";
  }
}

double LagFactorState::edge_rate(int i, int j) const {
  const int k_count = theta.cols();
  double q = 0.0;
  for (int k = 0; k < k_count; ++k) {
    q += theta(i, k) * r[static_cast<std::size_t>(k)] * phi(j, k);
  }
  return q < DBL_MIN ? DBL_MIN : q;
}

namespace {

// Allocates all containers for one lag at the right sizes.
LagFactorState make_lag_block(int n, int k) {
  LagFactorState f;
  f.theta = Mat2<double>(n, k, 1.0);
  f.phi = Mat2<double>(n, k, 1.0);
  f.r.assign(static_cast<std::size_t>(k), 1.0);
  f.a.assign(static_cast<std::size_t>(n), 1.0);
  f.b.assign(static_cast<std::size_t>(n), 1.0);
  f.d.assign(static_cast<std::size_t>(k), 1.0);
  f.e.assign(static_cast<std::size_t>(k), 1.0);
  f.c = 1.0;
  f.m = Mat2<std::int64_t>(n, n, 0);
  f.mk = Ten3<std::int64_t>(n, n, k, 0);
  return f;
}

// Draws the gamma hierarchy of one lag from its prior (counts not included).
void draw_lag_hierarchy(LagFactorState& f, int n, int k, RngStream& rng) {
  f.c = sample_gamma(1.0, 1.0, rng);
  for (int i = 0; i < n; ++i) {
    f.a[static_cast<std::size_t>(i)] = sample_gamma(1.0, 1.0, rng);
    f.b[static_cast<std::size_t>(i)] = sample_gamma(1.0, 1.0, rng);
  }
  for (int kk = 0; kk < k; ++kk) {
    f.d[static_cast<std::size_t>(kk)] = sample_gamma(1.0, 1.0, rng);
    f.e[static_cast<std::size_t>(kk)] = sample_gamma(1.0, 1.0, rng);
    f.r[static_cast<std::size_t>(kk)] = sample_gamma(1.0 / k, 1.0 / f.c, rng);
  }
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      f.theta(i, kk) =
          sample_gamma(f.a[static_cast<std::size_t>(i)], 1.0 / f.d[static_cast<std::size_t>(kk)], rng);
      f.phi(i, kk) =
          sample_gamma(f.b[static_cast<std::size_t>(i)], 1.0 / f.e[static_cast<std::size_t>(kk)], rng);
    }
  }
}

// Splits the latent count m(i,j) across factors proportionally to their
// rate contributions theta(i,k) r_k phi(j,k).
void thin_entry(LagFactorState& f, int i, int j, RngStream& rng) {
  const int k_count = f.theta.cols();
  const std::int64_t total = f.m(i, j);
  std::vector<double> probs(static_cast<std::size_t>(k_count));
  std::vector<std::int64_t> out(static_cast<std::size_t>(k_count));
  double q = 0.0;
  for (int k = 0; k < k_count; ++k) {
    probs[static_cast<std::size_t>(k)] =
        f.theta(i, k) * f.r[static_cast<std::size_t>(k)] * f.phi(j, k);
    q += probs[static_cast<std::size_t>(k)];
  }
  if (q <= 0.0) {
    // Every product underflowed; in the q -> 0 limit the split concentrates
    // on the factor with the largest log rate.
    int best = 0;
    double best_log = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_count; ++k) {
      const double lv = std::log(f.theta(i, k)) +
                        std::log(f.r[static_cast<std::size_t>(k)]) +
                        std::log(f.phi(j, k));
      if (lv > best_log) {
        best_log = lv;
        best = k;
      }
    }
    for (int k = 0; k < k_count; ++k) f.mk(i, j, k) = k == best ? total : 0;
    return;
  }
  for (double& p : probs) p /= q;
  // Renormalisation can leave the sum off by a few ulps; fold the slack into
  // the largest cell so the simplex check in sample_multinomial passes.
  double s = 0.0;
  for (double p : probs) s += p;
  std::size_t arg_max = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[arg_max]) arg_max = k;
  }
  probs[arg_max] += 1.0 - s;
  if (probs[arg_max] < 0.0) probs[arg_max] = 0.0;
  sample_multinomial(total, probs, out, rng);
  for (int k = 0; k < k_count; ++k) f.mk(i, j, k) = out[static_cast<std::size_t>(k)];
}

PFGCGState allocate_state(const ModelConfig& config) {
  PFGCGState s;
  s.config = config;
  const int n = config.num_vars;
  const std::size_t lags = static_cast<std::size_t>(config.max_lag);
  s.coeff.assign(lags, Mat2<double>(n, n, 0.0));
  s.graph.assign(lags, Mat2<std::uint8_t>(n, n, 1));
  s.psi.assign(lags, Mat2<double>(n, n, 1.0));
  s.lambda.assign(static_cast<std::size_t>(n), 1.0);
  s.factor.reserve(lags);
  for (std::size_t l = 0; l < lags; ++l) {
    s.factor.push_back(make_lag_block(n, config.num_factors));
  }
  return s;
}

}  // namespace

PFGCGState init_state(const ModelConfig& config, RngStream& rng) {
  config.validate();
  PFGCGState s = allocate_state(config);
  const int n = config.num_vars;
  const int k = config.num_factors;
  for (int i = 0; i < n; ++i) {
    s.lambda[static_cast<std::size_t>(i)] = sample_gamma(1.0, 1.0, rng);
  }
  for (int lag = 0; lag < config.max_lag; ++lag) {
    auto& f = s.factor[static_cast<std::size_t>(lag)];
    draw_lag_hierarchy(f, n, k, rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s.psi[static_cast<std::size_t>(lag)](i, j) = sample_gamma(1.0, 1.0, rng);
        s.coeff[static_cast<std::size_t>(lag)](i, j) =
            sample_normal(0.0, 1.0 / s.psi[static_cast<std::size_t>(lag)](i, j), rng);
        // Graph starts all-ones; draw counts conditional on that edge so the
        // count/graph consistency invariant holds from the first sweep.
        s.graph[static_cast<std::size_t>(lag)](i, j) = 1;
        const double q = f.edge_rate(i, j);
        f.m(i, j) = sample_count_given_edge(1, q, config.threshold, rng);
        thin_entry(f, i, j, rng);
      }
    }
  }
  return s;
}

PFGCGState prior_draw(const ModelConfig& config, RngStream& rng) {
  config.validate();
  PFGCGState s = allocate_state(config);
  const int n = config.num_vars;
  const int k = config.num_factors;
  for (int i = 0; i < n; ++i) {
    s.lambda[static_cast<std::size_t>(i)] = sample_gamma(1.0, 1.0, rng);
  }
  for (int lag = 0; lag < config.max_lag; ++lag) {
    auto& f = s.factor[static_cast<std::size_t>(lag)];
    draw_lag_hierarchy(f, n, k, rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s.psi[static_cast<std::size_t>(lag)](i, j) = sample_gamma(1.0, 1.0, rng);
        s.coeff[static_cast<std::size_t>(lag)](i, j) =
            sample_normal(0.0, 1.0 / s.psi[static_cast<std::size_t>(lag)](i, j), rng);
        const double q = f.edge_rate(i, j);
        f.m(i, j) = sample_poisson(q, rng);
        s.graph[static_cast<std::size_t>(lag)](i, j) =
            config.fixed_dense_graph ? 1 : (f.m(i, j) >= config.threshold ? 1 : 0);
        thin_entry(f, i, j, rng);
      }
    }
  }
  return s;
}

void simulate_observations(const PFGCGState& state, Mat2<double>& x, RngStream& rng) {
  const int n = state.config.num_vars;
  const int t_total = x.cols();
  if (x.rows() != n) throw DataError("simulate_observations: row count mismatch");
  if (t_total < state.config.max_lag + 1) {
    throw DataError("simulate_observations: series shorter than max_lag + 1");
  }
  for (int t = state.config.max_lag; t < t_total; ++t) {
    for (int i = 0; i < n; ++i) {
      double mean = 0.0;
      for (int lag = 0; lag < state.config.max_lag; ++lag) {
        const auto& a = state.coeff[static_cast<std::size_t>(lag)];
        const auto& g = state.graph[static_cast<std::size_t>(lag)];
        for (int j = 0; j < n; ++j) {
          if (g(i, j)) mean += a(i, j) * x(j, t - lag - 1);
        }
      }
      x(i, t) = sample_normal(mean, 1.0 / state.lambda[static_cast<std::size_t>(i)], rng);
    }
  }
}

bool PFGCGState::has_non_finite() const {
  auto bad = [](double v) { return !std::isfinite(v); };
  for (double v : lambda) {
    if (bad(v)) return true;
  }
  for (int lag = 0; lag < config.max_lag; ++lag) {
    const auto& f = factor[static_cast<std::size_t>(lag)];
    for (std::size_t idx = 0; idx < coeff[static_cast<std::size_t>(lag)].size(); ++idx) {
      if (bad(coeff[static_cast<std::size_t>(lag)].data()[idx])) return true;
      if (bad(psi[static_cast<std::size_t>(lag)].data()[idx])) return true;
    }
    for (std::size_t idx = 0; idx < f.theta.size(); ++idx) {
      if (bad(f.theta.data()[idx]) || bad(f.phi.data()[idx])) return true;
    }
    for (double v : f.r) {
      if (bad(v)) return true;
    }
    for (double v : f.d) {
      if (bad(v)) return true;
    }
    for (double v : f.e) {
      if (bad(v)) return true;
    }
    for (double v : f.a) {
      if (bad(v)) return true;
    }
    for (double v : f.b) {
      if (bad(v)) return true;
    }
    if (bad(f.c)) return true;
  }
  return false;
}

namespace {

constexpr char kStateMagic[8] = {'P', 'F', 'G', 'S', 'T', 'A', 'T', 'E'};
constexpr std::uint32_t kStateVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

template <typename T>
void write_span(std::ofstream& out, const T* p, std::size_t count) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_span(std::ifstream& in, T* p, std::size_t count) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(T)));
}

}  // namespace

void save_state(const PFGCGState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_state: cannot open " + path);
  out.write(kStateMagic, sizeof(kStateMagic));
  write_pod(out, kStateVersion);
  write_pod(out, static_cast<std::int32_t>(state.config.num_vars));
  write_pod(out, static_cast<std::int32_t>(state.config.num_steps));
  write_pod(out, static_cast<std::int32_t>(state.config.max_lag));
  write_pod(out, static_cast<std::int32_t>(state.config.num_factors));
  write_pod(out, static_cast<std::int32_t>(state.config.threshold));
  write_pod(out, static_cast<std::int32_t>(state.config.fixed_dense_graph ? 1 : 0));
  write_pod(out, state.config.seed);
  write_span(out, state.lambda.data(), state.lambda.size());
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    const auto& f = state.factor[static_cast<std::size_t>(lag)];
    write_span(out, state.coeff[static_cast<std::size_t>(lag)].data(),
               state.coeff[static_cast<std::size_t>(lag)].size());
    write_span(out, state.graph[static_cast<std::size_t>(lag)].data(),
               state.graph[static_cast<std::size_t>(lag)].size());
    write_span(out, state.psi[static_cast<std::size_t>(lag)].data(),
               state.psi[static_cast<std::size_t>(lag)].size());
    write_span(out, f.theta.data(), f.theta.size());
    write_span(out, f.phi.data(), f.phi.size());
    write_span(out, f.r.data(), f.r.size());
    write_span(out, f.a.data(), f.a.size());
    write_span(out, f.b.data(), f.b.size());
    write_span(out, f.d.data(), f.d.size());
    write_span(out, f.e.data(), f.e.size());
    write_pod(out, f.c);
    write_span(out, f.m.data(), f.m.size());
    write_span(out, f.mk.data(), f.mk.size());
  }
  if (!out) throw DataError("save_state: write failed for " + path);
}

PFGCGState load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_state: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kStateMagic, sizeof(magic)) != 0) {
    throw DataError("load_state: bad magic in " + path);
  }
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kStateVersion) {
    throw DataError("load_state: unsupported checkpoint version in " + path);
  }
  ModelConfig config;
  std::int32_t iv = 0;
  read_pod(in, iv);
  config.num_vars = iv;
  read_pod(in, iv);
  config.num_steps = iv;
  read_pod(in, iv);
  config.max_lag = iv;
  read_pod(in, iv);
  config.num_factors = iv;
  read_pod(in, iv);
  config.threshold = iv;
  read_pod(in, iv);
  config.fixed_dense_graph = iv != 0;
  read_pod(in, config.seed);
  config.validate();
  PFGCGState s = allocate_state(config);
  read_span(in, s.lambda.data(), s.lambda.size());
  for (int lag = 0; lag < config.max_lag; ++lag) {
    auto& f = s.factor[static_cast<std::size_t>(lag)];
    read_span(in, s.coeff[static_cast<std::size_t>(lag)].data(),
              s.coeff[static_cast<std::size_t>(lag)].size());
    read_span(in, s.graph[static_cast<std::size_t>(lag)].data(),
              s.graph[static_cast<std::size_t>(lag)].size());
    read_span(in, s.psi[static_cast<std::size_t>(lag)].data(),
              s.psi[static_cast<std::size_t>(lag)].size());
    read_span(in, f.theta.data(), f.theta.size());
    read_span(in, f.phi.data(), f.phi.size());
    read_span(in, f.r.data(), f.r.size());
    read_span(in, f.a.data(), f.a.size());
    read_span(in, f.b.data(), f.b.size());
    read_span(in, f.d.data(), f.d.size());
    read_span(in, f.e.data(), f.e.size());
    read_pod(in, f.c);
    read_span(in, f.m.data(), f.m.size());
    read_span(in, f.mk.data(), f.mk.size());
  }
  if (!in) throw DataError("load_state: truncated checkpoint " + path);
  return s;
}

}  // namespace pfgcg
