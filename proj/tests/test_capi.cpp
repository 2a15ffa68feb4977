#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "pfgcg.h"

namespace {

struct TempPath {
  std::string path;
  TempPath() {
    char buf[] = "/tmp/pfgcg_capi_XXXXXX";
    const int fd = mkstemp(buf);
    REQUIRE(fd >= 0);
    close(fd);
    path = buf;
  }
  ~TempPath() { std::remove(path.c_str()); }
};

// Stable two-neighbour VAR(1) panel laid out variable-major.
std::vector<double> stable_panel(int n, int t, unsigned seed) {
  std::vector<double> x(static_cast<std::size_t>(n) * t, 0.0);
  unsigned state = seed * 2654435761u + 1u;
  auto noise = [&state]() {
    double acc = 0.0;
    for (int r = 0; r < 4; ++r) {
      state = state * 1664525u + 1013904223u;
      acc += static_cast<double>(state) / 4294967296.0 - 0.5;
    }
    return acc * 0.8;  // roughly unit-variance, symmetric
  };
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * t] = noise();
  for (int s = 1; s < t; ++s) {
    for (int i = 0; i < n; ++i) {
      const double prev = x[static_cast<std::size_t>(i) * t + s - 1];
      const double neigh = x[static_cast<std::size_t>((i + 1) % n) * t + s - 1];
      x[static_cast<std::size_t>(i) * t + s] = 0.6 * prev + 0.25 * neigh + 0.5 * noise();
    }
  }
  return x;
}

struct TraceTally {
  int calls = 0;
  int32_t last_iteration = 0;
  int32_t max_lag = 0;
};

void count_trace(void* user, int32_t iteration, double test_mse,
                 const double* edge_density, const int32_t* active_factors,
                 int32_t max_lag) {
  auto* tally = static_cast<TraceTally*>(user);
  ++tally->calls;
  tally->last_iteration = iteration;
  tally->max_lag = max_lag;
  // CHECK (not REQUIRE): no exceptions may cross the C boundary.
  CHECK(edge_density != nullptr);
  CHECK(active_factors != nullptr);
  CHECK(std::isfinite(test_mse));
  for (int32_t lag = 0; lag < max_lag; ++lag) {
    CHECK(edge_density[lag] >= 0.0);
    CHECK(edge_density[lag] <= 1.0);
    CHECK(active_factors[lag] >= 0);
  }
}

pfgcg_fit_options small_fit_options() {
  pfgcg_fit_options opts;
  pfgcg_fit_options_init(&opts);
  opts.max_lag = 1;
  opts.num_factors = 4;
  opts.total_iters = 100;
  opts.burn_in = 50;
  opts.thin = 5;
  opts.seed = 11;
  return opts;
}

}  // namespace

TEST_CASE("version and default options") {
  const char* version = pfgcg_version();
  REQUIRE(version != nullptr);
  CHECK(std::string(version).find('.') != std::string::npos);

  pfgcg_lorenz96_options lz;
  pfgcg_lorenz96_options_init(&lz);
  CHECK(lz.num_vars == 10);
  CHECK(lz.num_steps == 500);
  CHECK(lz.forcing == 40.0);
  CHECK(lz.dt == 0.01);
  CHECK(lz.subsample == 5);
  CHECK(lz.transient_steps == 500);
  CHECK(lz.noise_sd == 0.1);
  CHECK(lz.train_frac == 0.8);

  pfgcg_lotka_volterra_options lv;
  pfgcg_lotka_volterra_options_init(&lv);
  CHECK(lv.num_pairs == 2);
  CHECK(lv.alpha == 1.1);
  CHECK(lv.beta == 0.4);
  CHECK(lv.gamma == 0.4);
  CHECK(lv.delta == 0.1);
  CHECK(lv.window == 1);
  CHECK(lv.subsample == 10);

  pfgcg_fit_options fit;
  pfgcg_fit_options_init(&fit);
  CHECK(fit.max_lag == 1);
  CHECK(fit.num_factors == 50);
  CHECK(fit.threshold == 1);
  CHECK(fit.fixed_dense_graph == 0);
  CHECK(fit.total_iters == 10000);
  CHECK(fit.burn_in == 5000);
  CHECK(fit.thin == 10);
  CHECK(fit.chains == 1);
}

TEST_CASE("generated datasets expose values and truth") {
  pfgcg_lorenz96_options opts;
  pfgcg_lorenz96_options_init(&opts);
  opts.num_vars = 6;
  opts.num_steps = 80;
  opts.seed = 3;

  pfgcg_dataset* ds = nullptr;
  REQUIRE(pfgcg_dataset_lorenz96(&opts, &ds) == PFGCG_OK);
  REQUIRE(ds != nullptr);
  CHECK(pfgcg_dataset_num_vars(ds) == 6);
  CHECK(pfgcg_dataset_num_steps(ds) == 80);
  CHECK(pfgcg_dataset_has_truth(ds) == 1);

  std::vector<double> values(6 * 80, 0.0);
  REQUIRE(pfgcg_dataset_values(ds, values.data()) == PFGCG_OK);
  for (const double v : values) CHECK(std::isfinite(v));

  std::vector<int32_t> truth(36, -1);
  REQUIRE(pfgcg_dataset_truth(ds, truth.data()) == PFGCG_OK);
  for (int i = 0; i < 6; ++i) {
    int ones = 0;
    for (int j = 0; j < 6; ++j) ones += truth[static_cast<std::size_t>(i) * 6 + j];
    CHECK(ones == 4);
  }

  // Same options give byte-identical data.
  pfgcg_dataset* again = nullptr;
  REQUIRE(pfgcg_dataset_lorenz96(&opts, &again) == PFGCG_OK);
  std::vector<double> values2(6 * 80, 0.0);
  REQUIRE(pfgcg_dataset_values(again, values2.data()) == PFGCG_OK);
  CHECK(values == values2);
  pfgcg_dataset_free(again);

  TempPath csv, truth_csv;
  REQUIRE(pfgcg_dataset_save_csv(ds, csv.path.c_str()) == PFGCG_OK);
  REQUIRE(pfgcg_dataset_save_truth_csv(ds, truth_csv.path.c_str()) == PFGCG_OK);

  pfgcg_dataset* loaded = nullptr;
  REQUIRE(pfgcg_dataset_from_csv(csv.path.c_str(), 0.8, &loaded) == PFGCG_OK);
  CHECK(pfgcg_dataset_num_vars(loaded) == 6);
  CHECK(pfgcg_dataset_num_steps(loaded) == 80);
  CHECK(pfgcg_dataset_has_truth(loaded) == 0);
  std::vector<int32_t> no_truth(36, 0);
  CHECK(pfgcg_dataset_truth(loaded, no_truth.data()) == PFGCG_ERR_DATA);
  std::vector<double> reloaded(6 * 80, 0.0);
  REQUIRE(pfgcg_dataset_values(loaded, reloaded.data()) == PFGCG_OK);
  CHECK(reloaded == values);
  pfgcg_dataset_free(loaded);

  pfgcg_lotka_volterra_options lv;
  pfgcg_lotka_volterra_options_init(&lv);
  lv.num_steps = 60;
  pfgcg_dataset* pp = nullptr;
  REQUIRE(pfgcg_dataset_lotka_volterra(&lv, &pp) == PFGCG_OK);
  CHECK(pfgcg_dataset_num_vars(pp) == 4);
  pfgcg_dataset_free(pp);

  pfgcg_dataset_free(ds);
}

TEST_CASE("fit exposes posterior summaries through accessors") {
  const std::vector<double> panel = stable_panel(3, 60, 5);
  pfgcg_dataset* ds = nullptr;
  REQUIRE(pfgcg_dataset_from_values(panel.data(), 3, 60, 0.8, &ds) == PFGCG_OK);

  const pfgcg_fit_options opts = small_fit_options();
  TraceTally tally;
  pfgcg_result* res = nullptr;
  REQUIRE(pfgcg_fit(ds, &opts, count_trace, &tally, &res) == PFGCG_OK);
  REQUIRE(res != nullptr);

  CHECK(tally.calls == 100);
  CHECK(tally.last_iteration == 100);
  CHECK(tally.max_lag == 1);

  CHECK(pfgcg_result_num_vars(res) == 3);
  CHECK(pfgcg_result_max_lag(res) == 1);
  CHECK(pfgcg_result_num_factors(res) == 4);
  CHECK(pfgcg_result_collections(res) == 10);
  CHECK(pfgcg_result_train_steps(res) == 48);
  CHECK(pfgcg_result_test_steps(res) == 12);
  CHECK(pfgcg_result_degenerate_edges(res) == 0);
  CHECK(std::isfinite(pfgcg_result_test_mse(res)));
  CHECK(pfgcg_result_test_mse(res) > 0.0);

  std::vector<double> scores(9, -1.0);
  REQUIRE(pfgcg_result_scores(res, scores.data()) == PFGCG_OK);
  for (const double s : scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }

  std::vector<double> edges(9, -1.0), coeffs(9, 0.0);
  REQUIRE(pfgcg_result_edge_mean(res, 0, edges.data()) == PFGCG_OK);
  REQUIRE(pfgcg_result_coeff_mean(res, 0, coeffs.data()) == PFGCG_OK);
  for (int idx = 0; idx < 9; ++idx) {
    CHECK(edges[static_cast<std::size_t>(idx)] >= 0.0);
    CHECK(edges[static_cast<std::size_t>(idx)] <= 1.0);
    CHECK(std::isfinite(coeffs[static_cast<std::size_t>(idx)]));
    // One lag: aggregated scores equal the per-lag means.
    CHECK(scores[static_cast<std::size_t>(idx)] ==
          doctest::Approx(edges[static_cast<std::size_t>(idx)]).epsilon(1e-12));
  }
  CHECK(pfgcg_result_edge_mean(res, 1, edges.data()) == PFGCG_ERR_CONFIG);
  CHECK(pfgcg_result_coeff_mean(res, -1, coeffs.data()) == PFGCG_ERR_CONFIG);

  std::vector<double> factors(4, -1.0);
  REQUIRE(pfgcg_result_factor_mean(res, factors.data()) == PFGCG_OK);
  for (const double f : factors) CHECK(f > 0.0);

  int32_t active = -1;
  REQUIRE(pfgcg_result_active_factors(res, 0.01, &active) == PFGCG_OK);
  CHECK(active >= 0);
  CHECK(active <= 4);

  REQUIRE(pfgcg_result_mse_trace_len(res) == 100);
  std::vector<double> trace_values(100, -1.0);
  REQUIRE(pfgcg_result_mse_trace(res, trace_values.data()) == PFGCG_OK);
  for (const double m : trace_values) CHECK(std::isfinite(m));

  TempPath state;
  REQUIRE(pfgcg_result_save_state(res, state.path.c_str()) == PFGCG_OK);
  std::FILE* f = std::fopen(state.path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::fseek(f, 0, SEEK_END);
  CHECK(std::ftell(f) > 0);
  std::fclose(f);

  // Refits with the same options reproduce the scores bit-for-bit.
  pfgcg_result* res2 = nullptr;
  REQUIRE(pfgcg_fit(ds, &opts, nullptr, nullptr, &res2) == PFGCG_OK);
  std::vector<double> scores2(9, -2.0);
  REQUIRE(pfgcg_result_scores(res2, scores2.data()) == PFGCG_OK);
  CHECK(scores == scores2);
  pfgcg_result_free(res2);

  pfgcg_result_free(res);
  pfgcg_dataset_free(ds);
}

TEST_CASE("error paths set status codes and messages") {
  CHECK(pfgcg_dataset_lorenz96(nullptr, nullptr) == PFGCG_ERR_CONFIG);
  CHECK(std::strlen(pfgcg_last_error()) > 0);

  pfgcg_dataset* ds = nullptr;
  CHECK(pfgcg_dataset_from_csv("/nonexistent/pfgcg.csv", 0.8, &ds) ==
        PFGCG_ERR_DATA);
  CHECK(ds == nullptr);

  CHECK(pfgcg_dataset_num_vars(nullptr) == -1);
  CHECK(pfgcg_dataset_has_truth(nullptr) == 0);

  // Invalid generator option.
  pfgcg_lorenz96_options lz;
  pfgcg_lorenz96_options_init(&lz);
  lz.num_vars = 2;
  CHECK(pfgcg_dataset_lorenz96(&lz, &ds) == PFGCG_ERR_CONFIG);

  // Fit rejects null and non-finite input with typed codes.
  const std::vector<double> panel = stable_panel(3, 60, 6);
  REQUIRE(pfgcg_dataset_from_values(panel.data(), 3, 60, 0.8, &ds) == PFGCG_OK);
  const pfgcg_fit_options opts = small_fit_options();
  pfgcg_result* res = nullptr;
  CHECK(pfgcg_fit(nullptr, &opts, nullptr, nullptr, &res) == PFGCG_ERR_CONFIG);
  CHECK(pfgcg_fit(ds, nullptr, nullptr, nullptr, &res) == PFGCG_ERR_CONFIG);

  pfgcg_fit_options bad = opts;
  bad.burn_in = bad.total_iters;
  CHECK(pfgcg_fit(ds, &bad, nullptr, nullptr, &res) == PFGCG_ERR_CONFIG);
  CHECK(res == nullptr);
  pfgcg_dataset_free(ds);

  std::vector<double> poisoned = stable_panel(3, 60, 7);
  poisoned[40] = std::numeric_limits<double>::quiet_NaN();
  REQUIRE(pfgcg_dataset_from_values(poisoned.data(), 3, 60, 0.8, &ds) == PFGCG_OK);
  CHECK(pfgcg_fit(ds, &opts, nullptr, nullptr, &res) == PFGCG_ERR_NUMERIC);
  CHECK(res == nullptr);
  CHECK(std::string(pfgcg_last_error()).find("non-finite") != std::string::npos);
  pfgcg_dataset_free(ds);

  // Degenerate split.
  const std::vector<double> tiny = stable_panel(2, 4, 8);
  CHECK(pfgcg_dataset_from_values(tiny.data(), 2, 4, 0.8, &ds) == PFGCG_OK);
  CHECK(pfgcg_fit(ds, &opts, nullptr, nullptr, &res) == PFGCG_ERR_DATA);
  pfgcg_dataset_free(ds);
}

TEST_CASE("metric entry points mirror the library results") {
  const double scores[] = {0.9, 0.8, 0.1, 0.4};
  const int32_t truth[] = {1, 1, 0, 0};
  double out = -1.0;
  REQUIRE(pfgcg_auroc(scores, truth, 2, &out) == PFGCG_OK);
  CHECK(out == 1.0);
  REQUIRE(pfgcg_auprc(scores, truth, 2, &out) == PFGCG_OK);
  CHECK(out == 1.0);

  const double mixed[] = {0.9, 0.8, 0.1, 0.0};
  const int32_t mixed_truth[] = {1, 0, 1, 0};
  REQUIRE(pfgcg_auprc(mixed, mixed_truth, 2, &out) == PFGCG_OK);
  CHECK(out == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  const int32_t single[] = {1, 1, 1, 1};
  CHECK(pfgcg_auroc(scores, single, 2, &out) == PFGCG_ERR_DATA);
  const int32_t not_binary[] = {1, 0, 2, 0};
  CHECK(pfgcg_auroc(scores, not_binary, 2, &out) == PFGCG_ERR_DATA);

  const int32_t pred[] = {1, 0, 0, 1};
  int64_t dist = -1;
  REQUIRE(pfgcg_shd(pred, truth, 2, &dist) == PFGCG_OK);
  CHECK(dist == 2);

  const double certain[] = {1.0, 0.0, 0.0, 1.0};
  int32_t graph[4] = {-1, -1, -1, -1};
  REQUIRE(pfgcg_sample_binary_graph(certain, 2, 42, graph) == PFGCG_OK);
  CHECK(graph[0] == 1);
  CHECK(graph[1] == 0);
  CHECK(graph[2] == 0);
  CHECK(graph[3] == 1);
  int32_t graph2[4];
  const double halves[] = {0.5, 0.5, 0.5, 0.5};
  REQUIRE(pfgcg_sample_binary_graph(halves, 2, 42, graph) == PFGCG_OK);
  REQUIRE(pfgcg_sample_binary_graph(halves, 2, 42, graph2) == PFGCG_OK);
  CHECK(std::memcmp(graph, graph2, sizeof(graph)) == 0);
  const double bad_scores[] = {1.5, 0.0, 0.0, 1.0};
  CHECK(pfgcg_sample_binary_graph(bad_scores, 2, 42, graph) == PFGCG_ERR_CONFIG);

  const int32_t levels[] = {3, 1, 2};
  const double mses[] = {0.2, 0.5, 0.2};
  int32_t pick = -1;
  REQUIRE(pfgcg_select_min_mse(levels, mses, 3, &pick) == PFGCG_OK);
  CHECK(pick == 2);  // tie at 0.2 resolves to the smaller level, 2
  CHECK(pfgcg_select_min_mse(levels, mses, 0, &pick) == PFGCG_ERR_CONFIG);
}

TEST_CASE("matrix csv helpers round-trip") {
  TempPath file;
  const double values[] = {1.5, -2.0, 0.25, 1e-3, 3.0, 4.5};
  REQUIRE(pfgcg_matrix_write_csv(file.path.c_str(), values, 2, 3) == PFGCG_OK);

  double* back = nullptr;
  int32_t rows = 0, cols = 0;
  REQUIRE(pfgcg_matrix_read_csv(file.path.c_str(), &back, &rows, &cols) == PFGCG_OK);
  REQUIRE(back != nullptr);
  CHECK(rows == 2);
  CHECK(cols == 3);
  for (int idx = 0; idx < 6; ++idx) CHECK(back[idx] == values[idx]);
  pfgcg_free(back);

  CHECK(pfgcg_matrix_read_csv("/nonexistent/pfgcg.csv", &back, &rows, &cols) ==
        PFGCG_ERR_DATA);
  CHECK(pfgcg_matrix_write_csv(nullptr, values, 2, 3) == PFGCG_ERR_CONFIG);
}
