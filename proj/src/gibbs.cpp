#include "gibbs.hpp"

#include <cfloat>
#include <cmath>
#include <iostream>
#include <limits>
#include <vector>

#include "gbpl.hpp"

namespace pfgcg {

void SweepStats::rebuild(const PFGCGState& state, const Mat2<double>& x) {
  const ModelConfig& cfg = state.config;
  if (x.rows() != cfg.num_vars) throw DataError("sweep stats: data row count mismatch");
  n_ = cfg.num_vars;
  lags_ = cfg.max_lag;
  t_eff_ = x.cols() - cfg.max_lag;
  if (t_eff_ < 1) throw DataError("sweep stats: no effective timestamps after lag cut");
  x_ = &x;
  const int big_l = lags_;

  resid_ = Mat2<double>(n_, t_eff_, 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int s = 0; s < t_eff_; ++s) {
      const int t = s + big_l;
      double r = x(i, t);
      for (int lag = 0; lag < big_l; ++lag) {
        const auto& a = state.coeff[static_cast<std::size_t>(lag)];
        const auto& g = state.graph[static_cast<std::size_t>(lag)];
        for (int j = 0; j < n_; ++j) {
          if (g(i, j)) r -= a(i, j) * x(j, t - lag - 1);
        }
      }
      resid_(i, s) = r;
    }
  }

  const int un = big_l * n_;
  gram_ = Mat2<double>(un, un, 0.0);
  u_.assign(static_cast<std::size_t>(un), 0.0);
  for (int u1 = 0; u1 < un; ++u1) {
    const int lag1 = u1 / n_;
    const int j1 = u1 % n_;
    for (int u2 = u1; u2 < un; ++u2) {
      const int lag2 = u2 / n_;
      const int j2 = u2 % n_;
      double dot = 0.0;
      for (int s = 0; s < t_eff_; ++s) {
        dot += x(j1, s + big_l - lag1 - 1) * x(j2, s + big_l - lag2 - 1);
      }
      gram_(u1, u2) = dot;
      gram_(u2, u1) = dot;
    }
    u_[static_cast<std::size_t>(u1)] = gram_(u1, u1);
  }

  resid_dot_ = Mat2<double>(n_, un, 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int u1 = 0; u1 < un; ++u1) {
      const int lag1 = u1 / n_;
      const int j1 = u1 % n_;
      double dot = 0.0;
      for (int s = 0; s < t_eff_; ++s) {
        dot += resid_(i, s) * x(j1, s + big_l - lag1 - 1);
      }
      resid_dot_(i, u1) = dot;
    }
  }

  edge_probs_.assign(static_cast<std::size_t>(big_l), Mat2<double>(n_, n_, 1.0));
  ++counters_.rebuilds;
}

double SweepStats::resid_sq_row(int i) const {
  double s = 0.0;
  for (double v : resid_.row(i)) s += v * v;
  return s;
}

void SweepStats::apply_coeff_change(int lag, int i, int j, double delta) {
  if (delta == 0.0) return;
  const Mat2<double>& x = *x_;
  double* rrow = resid_.row(i).data();
  const double* xrow = x.row(j).data() + (lags_ - lag - 1);
  for (int s = 0; s < t_eff_; ++s) rrow[s] -= delta * xrow[s];
  double* drow = resid_dot_.row(i).data();
  const double* grow = gram_.row(static_cast<int>(flat(lag, j))).data();
  const int un = lags_ * n_;
  for (int u = 0; u < un; ++u) drow[u] -= delta * grow[u];
  counters_.update_work += t_eff_ + un;
}

// ---- Conditional-parameter kernels ----

NormalSpec coeff_conditional(const PFGCGState& state, const SweepStats& stats,
                             int lag, int i, int j) {
  const double lam = state.lambda[static_cast<std::size_t>(i)];
  const double u = stats.lag_sq(lag, j);
  const double psi = state.psi[static_cast<std::size_t>(lag)](i, j);
  const double b = state.graph[static_cast<std::size_t>(lag)](i, j)
                       ? state.coeff[static_cast<std::size_t>(lag)](i, j)
                       : 0.0;
  const double w = stats.w_stat(lag, i, j, b);
  const double variance = 1.0 / (lam * u + psi);
  return {variance * lam * w, variance};
}

GammaSpec coeff_prec_conditional(double coeff_value) {
  return {1.5, 1.0 / (coeff_value * coeff_value / 2.0 + 1.0)};
}

GammaSpec noise_prec_conditional(int effective_steps, double resid_sq_sum) {
  return {1.0 + effective_steps / 2.0, 1.0 / (1.0 + 0.5 * resid_sq_sum)};
}

GammaSpec theta_conditional(const LagFactorState& f, int i, int k) {
  const int n = f.theta.rows();
  std::int64_t row_count = 0;
  double phi_col = 0.0;
  for (int j = 0; j < n; ++j) {
    row_count += f.mk(i, j, k);
    phi_col += f.phi(j, k);
  }
  const std::size_t sk = static_cast<std::size_t>(k);
  return {f.a[static_cast<std::size_t>(i)] + static_cast<double>(row_count),
          1.0 / (f.d[sk] + f.r[sk] * phi_col)};
}

GammaSpec phi_conditional(const LagFactorState& f, int j, int k) {
  const int n = f.theta.rows();
  std::int64_t col_count = 0;
  double theta_col = 0.0;
  for (int i = 0; i < n; ++i) {
    col_count += f.mk(i, j, k);
    theta_col += f.theta(i, k);
  }
  const std::size_t sk = static_cast<std::size_t>(k);
  return {f.b[static_cast<std::size_t>(j)] + static_cast<double>(col_count),
          1.0 / (f.e[sk] + f.r[sk] * theta_col)};
}

GammaSpec r_conditional(const LagFactorState& f, int k) {
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  std::int64_t total = 0;
  double theta_col = 0.0;
  double phi_col = 0.0;
  for (int i = 0; i < n; ++i) {
    theta_col += f.theta(i, k);
    phi_col += f.phi(i, k);
    for (int j = 0; j < n; ++j) total += f.mk(i, j, k);
  }
  return {1.0 / kc + static_cast<double>(total),
          1.0 / (f.c + theta_col * phi_col)};
}

GammaSpec a_conditional(const LagFactorState& f, int i, std::int64_t crt_total) {
  (void)i;
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  double denom = 1.0;
  for (int k = 0; k < kc; ++k) {
    double phi_col = 0.0;
    for (int j = 0; j < n; ++j) phi_col += f.phi(j, k);
    const std::size_t sk = static_cast<std::size_t>(k);
    denom += std::log1p(f.r[sk] * phi_col / f.d[sk]);
  }
  return {1.0 + static_cast<double>(crt_total), 1.0 / denom};
}

GammaSpec b_conditional(const LagFactorState& f, int j, std::int64_t crt_total) {
  (void)j;
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  double denom = 1.0;
  for (int k = 0; k < kc; ++k) {
    double theta_col = 0.0;
    for (int i = 0; i < n; ++i) theta_col += f.theta(i, k);
    const std::size_t sk = static_cast<std::size_t>(k);
    denom += std::log1p(f.r[sk] * theta_col / f.e[sk]);
  }
  return {1.0 + static_cast<double>(crt_total), 1.0 / denom};
}

GammaSpec d_conditional(const LagFactorState& f, int k) {
  const int n = f.theta.rows();
  double a_sum = 0.0;
  double theta_col = 0.0;
  for (int i = 0; i < n; ++i) {
    a_sum += f.a[static_cast<std::size_t>(i)];
    theta_col += f.theta(i, k);
  }
  return {a_sum + 1.0, 1.0 / (theta_col + 1.0)};
}

GammaSpec e_conditional(const LagFactorState& f, int k) {
  const int n = f.theta.rows();
  double b_sum = 0.0;
  double phi_col = 0.0;
  for (int j = 0; j < n; ++j) {
    b_sum += f.b[static_cast<std::size_t>(j)];
    phi_col += f.phi(j, k);
  }
  return {b_sum + 1.0, 1.0 / (phi_col + 1.0)};
}

GammaSpec c_conditional(const LagFactorState& f) {
  // K weights each contribute shape 1/K on top of the unit prior shape, so
  // the posterior shape is exactly 2 regardless of K.
  double r_sum = 0.0;
  for (double v : f.r) r_sum += v;
  return {2.0, 1.0 / (r_sum + 1.0)};
}

double edge_conditional_prob(const PFGCGState& state, const SweepStats& stats,
                             int lag, int i, int j, bool* degenerate) {
  if (degenerate) *degenerate = false;
  const int threshold = state.config.threshold;
  const double q = state.prior_edge_rate(lag, i, j);
  const double log_s0 = log_poisson_cdf(q, threshold - 1);
  const double log_prior1 = log_poisson_sf(q, threshold);
  const double lam = state.lambda[static_cast<std::size_t>(i)];
  const double a = state.coeff[static_cast<std::size_t>(lag)](i, j);
  const double u = stats.lag_sq(lag, j);
  const double b = state.graph[static_cast<std::size_t>(lag)](i, j) ? a : 0.0;
  const double w = stats.w_stat(lag, i, j, b);
  // Gaussian likelihood ratio of switching the edge on, in log space:
  // -(lambda/2) * (a^2 U - 2 a W).
  const double loglik1 = lam * a * (w - 0.5 * a * u);
  const double log_s1 = loglik1 + log_prior1;
  if (std::isnan(log_s1) || (std::isinf(log_s0) && std::isinf(log_s1) &&
                             log_s0 < 0.0 && log_s1 < 0.0)) {
    if (degenerate) *degenerate = true;
    return marginal_prob_one(q, threshold);
  }
  if (std::isinf(log_s1) && log_s1 > 0.0) return 1.0;
  const double m = std::max(log_s0, log_s1);
  const double w1 = std::exp(log_s1 - m);
  const double w0 = std::exp(log_s0 - m);
  return w1 / (w0 + w1);
}

// ---- Per-lag update passes ----

namespace {

// Latent count of every entry for one lag, conditioned on the current graph.
void counts_lag(PFGCGState& st, int lag, RngStream& rng) {
  auto& f = st.factor[static_cast<std::size_t>(lag)];
  const auto& g = st.graph[static_cast<std::size_t>(lag)];
  const int n = st.config.num_vars;
  const int threshold = st.config.threshold;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double q = f.edge_rate(i, j);
      f.m(i, j) = sample_count_given_edge(g(i, j), q, threshold, rng);
    }
  }
}

// Multinomial split of every latent count across factors for one lag.
void thin_lag(PFGCGState& st, int lag, RngStream& rng) {
  auto& f = st.factor[static_cast<std::size_t>(lag)];
  const int n = st.config.num_vars;
  const int kc = st.config.num_factors;
  std::vector<double> probs(static_cast<std::size_t>(kc));
  std::vector<std::int64_t> out(static_cast<std::size_t>(kc));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::int64_t total = f.m(i, j);
      if (total == 0) {
        for (int k = 0; k < kc; ++k) f.mk(i, j, k) = 0;
        continue;
      }
      double q = 0.0;
      for (int k = 0; k < kc; ++k) {
        probs[static_cast<std::size_t>(k)] =
            f.theta(i, k) * f.r[static_cast<std::size_t>(k)] * f.phi(j, k);
        q += probs[static_cast<std::size_t>(k)];
      }
      if (q <= 0.0) {
        // Every product underflowed; in the q -> 0 limit the split
        // concentrates on the factor with the largest log rate.
        int best = 0;
        double best_log = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < kc; ++k) {
          const double lv = std::log(f.theta(i, k)) +
                            std::log(f.r[static_cast<std::size_t>(k)]) +
                            std::log(f.phi(j, k));
          if (lv > best_log) {
            best_log = lv;
            best = k;
          }
        }
        for (int k = 0; k < kc; ++k) f.mk(i, j, k) = k == best ? total : 0;
        continue;
      }
      double s = 0.0;
      for (double& p : probs) {
        p /= q;
        s += p;
      }
      // Fold rounding slack into the largest cell to keep an exact simplex.
      std::size_t arg_max = 0;
      for (std::size_t k = 1; k < probs.size(); ++k) {
        if (probs[k] > probs[arg_max]) arg_max = k;
      }
      probs[arg_max] += 1.0 - s;
      if (probs[arg_max] < 0.0) probs[arg_max] = 0.0;
      sample_multinomial(total, probs, out, rng);
      for (int k = 0; k < kc; ++k) f.mk(i, j, k) = out[static_cast<std::size_t>(k)];
    }
  }
}

void c_lag(LagFactorState& f, RngStream& rng) {
  const GammaSpec spec = c_conditional(f);
  f.c = sample_gamma(spec.shape, spec.scale, rng);
}

void a_lag(LagFactorState& f, RngStream& rng) {
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  for (int i = 0; i < n; ++i) {
    std::int64_t tables = 0;
    for (int k = 0; k < kc; ++k) {
      std::int64_t row_count = 0;
      for (int j = 0; j < n; ++j) row_count += f.mk(i, j, k);
      tables += sample_crt(row_count, f.a[static_cast<std::size_t>(i)], rng);
    }
    const GammaSpec spec = a_conditional(f, i, tables);
    f.a[static_cast<std::size_t>(i)] = sample_gamma(spec.shape, spec.scale, rng);
  }
}

void b_lag(LagFactorState& f, RngStream& rng) {
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  for (int j = 0; j < n; ++j) {
    std::int64_t tables = 0;
    for (int k = 0; k < kc; ++k) {
      std::int64_t col_count = 0;
      for (int i = 0; i < n; ++i) col_count += f.mk(i, j, k);
      tables += sample_crt(col_count, f.b[static_cast<std::size_t>(j)], rng);
    }
    const GammaSpec spec = b_conditional(f, j, tables);
    f.b[static_cast<std::size_t>(j)] = sample_gamma(spec.shape, spec.scale, rng);
  }
}

void d_lag(LagFactorState& f, RngStream& rng) {
  const int kc = f.theta.cols();
  for (int k = 0; k < kc; ++k) {
    const GammaSpec spec = d_conditional(f, k);
    f.d[static_cast<std::size_t>(k)] = sample_gamma(spec.shape, spec.scale, rng);
  }
}

void e_lag(LagFactorState& f, RngStream& rng) {
  const int kc = f.theta.cols();
  for (int k = 0; k < kc; ++k) {
    const GammaSpec spec = e_conditional(f, k);
    f.e[static_cast<std::size_t>(k)] = sample_gamma(spec.shape, spec.scale, rng);
  }
}

void r_lag(LagFactorState& f, RngStream& rng) {
  const int kc = f.theta.cols();
  for (int k = 0; k < kc; ++k) {
    const GammaSpec spec = r_conditional(f, k);
    f.r[static_cast<std::size_t>(k)] = sample_gamma(spec.shape, spec.scale, rng);
  }
}

// Draw order is row-major (i outer, k inner); the kernel-equivalence tests
// rely on this ordering.
void theta_lag(LagFactorState& f, RngStream& rng) {
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kc; ++k) {
      const GammaSpec spec = theta_conditional(f, i, k);
      f.theta(i, k) = sample_gamma(spec.shape, spec.scale, rng);
    }
  }
}

void phi_lag(LagFactorState& f, RngStream& rng) {
  const int n = f.theta.rows();
  const int kc = f.theta.cols();
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < kc; ++k) {
      const GammaSpec spec = phi_conditional(f, j, k);
      f.phi(j, k) = sample_gamma(spec.shape, spec.scale, rng);
    }
  }
}

void update_coeff_entry(PFGCGState& st, SweepStats& stats, int lag, int i, int j,
                        RngStream& rng) {
  auto& a_mat = st.coeff[static_cast<std::size_t>(lag)];
  const int g = st.graph[static_cast<std::size_t>(lag)](i, j);
  const double a_old = a_mat(i, j);
  double a_new;
  if (g) {
    const NormalSpec spec = coeff_conditional(st, stats, lag, i, j);
    a_new = sample_normal(spec.mean, spec.variance, rng);
  } else {
    // Off-graph coefficients revert to their prior; they do not enter the
    // likelihood, so no statistics change.
    a_new = sample_normal(0.0, 1.0 / st.psi[static_cast<std::size_t>(lag)](i, j), rng);
  }
  a_mat(i, j) = a_new;
  ++stats.counters().coeff_entries;
  if (g && a_new != a_old) {
    stats.apply_coeff_change(lag, i, j, a_new - a_old);
    ++stats.counters().coeff_changes;
  }
}

void update_psi_entry(PFGCGState& st, int lag, int i, int j, RngStream& rng) {
  const GammaSpec spec =
      coeff_prec_conditional(st.coeff[static_cast<std::size_t>(lag)](i, j));
  st.psi[static_cast<std::size_t>(lag)](i, j) = sample_gamma(spec.shape, spec.scale, rng);
}

void update_graph_entry(PFGCGState& st, SweepStats& stats, int lag, int i, int j,
                        RngStream& rng) {
  bool degenerate = false;
  const double p = edge_conditional_prob(st, stats, lag, i, j, &degenerate);
  if (degenerate) {
    ++stats.counters().degenerate_edges;
    std::cerr << "warning: edge weights underflowed at lag " << lag << " entry (" << i
              << "," << j << "); resampled from the prior marginal\n";
  }
  stats.set_edge_prob(lag, i, j, p);
  const int g_new = sample_bernoulli(p, rng);
  auto& g_mat = st.graph[static_cast<std::size_t>(lag)];
  ++stats.counters().graph_entries;
  if (g_new != static_cast<int>(g_mat(i, j))) {
    const double delta = (g_new - static_cast<int>(g_mat(i, j))) *
                         st.coeff[static_cast<std::size_t>(lag)](i, j);
    g_mat(i, j) = static_cast<std::uint8_t>(g_new);
    stats.apply_coeff_change(lag, i, j, delta);
    ++stats.counters().graph_flips;
  }
}

template <typename Fn>
void for_each_entry(int n, ScanOrder order, Fn&& fn) {
  if (order == ScanOrder::kRowMajor) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) fn(i, j);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) fn(i, j);
    }
  }
}

}  // namespace

// ---- Standalone conditional passes ----

void sample_noise_precisions(PFGCGState& state, const SweepStats& stats, RngStream& rng) {
  const int n = state.config.num_vars;
  for (int i = 0; i < n; ++i) {
    const GammaSpec spec =
        noise_prec_conditional(stats.effective_steps(), stats.resid_sq_row(i));
    state.lambda[static_cast<std::size_t>(i)] = sample_gamma(spec.shape, spec.scale, rng);
  }
}

void sample_coefficients(PFGCGState& state, SweepStats& stats, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    for_each_entry(state.config.num_vars, ScanOrder::kRowMajor,
                   [&](int i, int j) { update_coeff_entry(state, stats, lag, i, j, rng); });
  }
}

void sample_coefficient_precisions(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    for_each_entry(state.config.num_vars, ScanOrder::kRowMajor,
                   [&](int i, int j) { update_psi_entry(state, lag, i, j, rng); });
  }
}

void sample_graphs(PFGCGState& state, SweepStats& stats, RngStream& rng, ScanOrder order) {
  if (state.config.fixed_dense_graph) return;
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    for_each_entry(state.config.num_vars, order,
                   [&](int i, int j) { update_graph_entry(state, stats, lag, i, j, rng); });
  }
}

void sample_latent_counts(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) counts_lag(state, lag, rng);
}

void thin_counts(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) thin_lag(state, lag, rng);
}

void sample_factor_loadings(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    auto& f = state.factor[static_cast<std::size_t>(lag)];
    theta_lag(f, rng);
    phi_lag(f, rng);
  }
}

void sample_factor_weights(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    r_lag(state.factor[static_cast<std::size_t>(lag)], rng);
  }
}

void sample_hyper_a_b(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    auto& f = state.factor[static_cast<std::size_t>(lag)];
    a_lag(f, rng);
    b_lag(f, rng);
  }
}

void sample_hyper_d_e_c(PFGCGState& state, RngStream& rng) {
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    auto& f = state.factor[static_cast<std::size_t>(lag)];
    d_lag(f, rng);
    e_lag(f, rng);
    c_lag(f, rng);
  }
}

void gibbs_sweep(PFGCGState& state, const Mat2<double>& x, SweepStats& stats,
                 RngStream& rng, const SweepOptions& options) {
  if (!stats.built_for(x)) stats.rebuild(state, x);
  sample_noise_precisions(state, stats, rng);
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    auto& f = state.factor[static_cast<std::size_t>(lag)];
    counts_lag(state, lag, rng);
    thin_lag(state, lag, rng);
    if (options.factor_order == FactorOrder::kGrouped) {
      c_lag(f, rng);
      a_lag(f, rng);
      b_lag(f, rng);
      d_lag(f, rng);
      e_lag(f, rng);
      r_lag(f, rng);
      theta_lag(f, rng);
      phi_lag(f, rng);
    } else {
      a_lag(f, rng);
      theta_lag(f, rng);
      b_lag(f, rng);
      phi_lag(f, rng);
      d_lag(f, rng);
      e_lag(f, rng);
      r_lag(f, rng);
      c_lag(f, rng);
    }
  }
  const bool dense = state.config.fixed_dense_graph;
  for (int lag = 0; lag < state.config.max_lag; ++lag) {
    for_each_entry(state.config.num_vars, options.scan_order, [&](int i, int j) {
      update_coeff_entry(state, stats, lag, i, j, rng);
      update_psi_entry(state, lag, i, j, rng);
      if (!dense) update_graph_entry(state, stats, lag, i, j, rng);
    });
  }
  stats.bump_sweep();
}

}  // namespace pfgcg
