#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "data.hpp"
#include "doctest.h"
#include "fit.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace pfgcg;

namespace {

// Stable two-neighbour VAR(1) panel with moderate noise.
TimeSeriesData stable_panel(int n, int t, std::uint64_t seed) {
  TimeSeriesData data;
  data.x = Mat2<double>(n, t, 0.0);
  RngStream rng(seed);
  for (int i = 0; i < n; ++i) data.x(i, 0) = sample_normal(0.0, 1.0, rng);
  for (int s = 1; s < t; ++s) {
    for (int i = 0; i < n; ++i) {
      const double prev = data.x(i, s - 1);
      const double neigh = data.x((i + 1) % n, s - 1);
      data.x(i, s) = 0.6 * prev + 0.25 * neigh + sample_normal(0.0, 0.25, rng);
    }
  }
  data.name = "stable_panel";
  return data;
}

FitConfig small_config() {
  FitConfig config;
  config.max_lag = 2;
  config.num_factors = 4;
  config.threshold = 1;
  config.schedule.total_iters = 200;
  config.schedule.burn_in = 100;
  config.schedule.thin = 10;
  config.seed = 17;
  return config;
}

}  // namespace

TEST_CASE("fit produces consistently shaped posterior summaries") {
  const TimeSeriesData data = stable_panel(4, 60, 2);
  const FitConfig config = small_config();

  int trace_calls = 0;
  std::vector<double> traced_mse;
  const FitResult result = run_fit(data, config, [&](const TraceRecord& rec) {
    ++trace_calls;
    CHECK(rec.iteration == trace_calls);
    CHECK(rec.edge_density.size() == 2);
    CHECK(rec.active_factors.size() == 2);
    for (const double density : rec.edge_density) {
      CHECK(density >= 0.0);
      CHECK(density <= 1.0);
    }
    for (const int active : rec.active_factors) {
      CHECK(active >= 0);
      CHECK(active <= 4);
    }
    traced_mse.push_back(rec.test_mse);
  });

  CHECK(trace_calls == 200);
  CHECK(result.acc.collected() == 10);
  CHECK(result.acc.capacity() == 10);
  REQUIRE(result.acc.mse_trace().size() == 200);
  for (int it = 0; it < 200; ++it) {
    CHECK(result.acc.mse_trace()[static_cast<std::size_t>(it)] ==
          traced_mse[static_cast<std::size_t>(it)]);
  }

  CHECK(result.train_steps == 48);
  CHECK(result.test_steps == 12);
  REQUIRE(result.scores.rows() == 4);
  REQUIRE(result.scores.cols() == 4);
  REQUIRE(result.edge_mean.size() == 2);
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    const double s = result.scores.data()[i];
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  for (const auto& lag : result.edge_mean) {
    for (std::size_t i = 0; i < lag.size(); ++i) {
      CHECK(lag.data()[i] >= 0.0);
      CHECK(lag.data()[i] <= 1.0);
    }
  }
  CHECK(std::isfinite(result.final_test_mse));
  CHECK(result.final_test_mse > 0.0);
  CHECK(!result.last_state.has_non_finite());

  // Lag aggregation dominates every per-lag mean.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (const auto& lag : result.edge_mean) {
        CHECK(result.scores(i, j) >= lag(i, j) - 1e-9);
      }
    }
  }

  // Sweep counters reflect the full run: 200 sweeps of a 4-var 2-lag model.
  CHECK(result.counters.graph_entries == 200LL * 2 * 16);
  CHECK(result.counters.coeff_entries == 200LL * 2 * 16);
  CHECK(result.counters.rebuilds == 1);
}

TEST_CASE("fits are deterministic in the seed") {
  const TimeSeriesData data = stable_panel(3, 50, 4);
  FitConfig config = small_config();
  config.max_lag = 1;

  const FitResult a = run_fit(data, config);
  const FitResult b = run_fit(data, config);
  CHECK(a.scores == b.scores);
  CHECK(a.acc.mse_trace() == b.acc.mse_trace());
  CHECK(a.final_test_mse == b.final_test_mse);
  CHECK(a.last_state.coeff == b.last_state.coeff);
  CHECK(a.last_state.graph == b.last_state.graph);

  config.seed = 18;
  const FitResult c = run_fit(data, config);
  CHECK(!(a.scores == c.scores));
}

TEST_CASE("multiple chains merge their collections") {
  const TimeSeriesData data = stable_panel(3, 50, 6);
  FitConfig config = small_config();
  config.max_lag = 1;
  config.chains = 2;

  const FitResult result = run_fit(data, config);
  CHECK(result.acc.collected() == 20);
  CHECK(result.acc.capacity() == 20);
  CHECK(result.acc.mse_trace().size() == 200);
  CHECK(result.counters.rebuilds == 2);
  CHECK(result.counters.graph_entries == 2LL * 200 * 1 * 9);

  // A merged run differs from its first chain alone (second chain moved it).
  config.chains = 1;
  const FitResult single = run_fit(data, config);
  CHECK(!(single.scores == result.scores));
}

TEST_CASE("dense ablation returns certain scores") {
  const TimeSeriesData data = stable_panel(3, 50, 7);
  FitConfig config = small_config();
  config.max_lag = 1;
  config.fixed_dense_graph = true;

  const FitResult result = run_fit(data, config);
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    CHECK(result.scores.data()[i] == 1.0);
  }
  for (std::size_t i = 0; i < result.last_state.graph[0].size(); ++i) {
    CHECK(result.last_state.graph[0].data()[i] == 1);
  }
  CHECK(result.counters.graph_entries == 0);
}

TEST_CASE("invalid configurations and data are rejected up front") {
  const TimeSeriesData data = stable_panel(3, 50, 8);
  FitConfig config = small_config();

  config.max_lag = 0;
  CHECK_THROWS_AS(run_fit(data, config), ConfigError);
  config = small_config();
  config.num_factors = 0;
  CHECK_THROWS_AS(run_fit(data, config), ConfigError);
  config = small_config();
  config.threshold = 0;
  CHECK_THROWS_AS(run_fit(data, config), ConfigError);
  config = small_config();
  config.chains = 0;
  CHECK_THROWS_AS(run_fit(data, config), ConfigError);
  config = small_config();
  config.schedule.burn_in = 200;
  CHECK_THROWS_AS(run_fit(data, config), ConfigError);

  config = small_config();
  TimeSeriesData short_data = stable_panel(3, 4, 8);
  CHECK_THROWS_AS(run_fit(short_data, config), DataError);

  // Training prefix must leave more steps than the model's lag depth.
  TimeSeriesData tiny = stable_panel(3, 6, 8);
  config.max_lag = 4;  // train prefix has 4 steps -> no usable regression rows
  CHECK_THROWS_AS(run_fit(tiny, config), DataError);
}

TEST_CASE("non-finite data aborts with a numerical error") {
  TimeSeriesData data = stable_panel(3, 50, 9);
  data.x(1, 10) = std::numeric_limits<double>::quiet_NaN();
  const FitConfig config = small_config();
  bool threw = false;
  try {
    run_fit(data, config);
  } catch (const NumericError& err) {
    threw = true;
    CHECK(std::string(err.what()).find("non-finite") != std::string::npos);
  }
  CHECK(threw);

  data = stable_panel(3, 50, 9);
  data.x(2, 3) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(run_fit(data, config), NumericError);
}
