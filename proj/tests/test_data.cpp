#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "data.hpp"
#include "doctest.h"
#include "model.hpp"

using namespace pfgcg;

namespace {

double max_abs(const Mat2<double>& m) {
  double out = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) out = std::max(out, std::abs(m.data()[i]));
  return out;
}

bool all_finite(const Mat2<double>& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i])) return false;
  }
  return true;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    char buf[] = "/tmp/pfgcg_data_XXXXXX";
    const int fd = mkstemp(buf);
    REQUIRE(fd >= 0);
    close(fd);
    path = buf;
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("unforced system decays to the origin") {
  Lorenz96Params p;
  p.num_vars = 6;
  p.forcing = 0.0;
  p.noise_sd = 0.0;
  p.seed = 3;
  auto [data, truth] = gen_lorenz96(p);
  (void)truth;
  CHECK(data.num_vars() == 6);
  CHECK(data.num_steps() == 500);
  // Column 0 is recorded after 500 transient steps (t = 5): the linearised
  // dynamics are pure unit-rate decay, so the 0.01-sd start has shrunk by e^-5.
  double col0 = 0.0, last = 0.0;
  for (int i = 0; i < 6; ++i) {
    col0 = std::max(col0, std::abs(data.x(i, 0)));
    last = std::max(last, std::abs(data.x(i, 499)));
  }
  CHECK(col0 < 1e-3);
  CHECK(col0 > 0.0);
  CHECK(last < 1e-10);

  p.init_sd = 0.0;  // exact equilibrium stays put forever
  auto [flat, flat_truth] = gen_lorenz96(p);
  (void)flat_truth;
  CHECK(max_abs(flat.x) == 0.0);
}

TEST_CASE("cyclic truth has ones at offsets -2,-1,0,+1") {
  Lorenz96Params p;
  p.num_vars = 5;
  p.num_steps = 2;
  auto [data, truth] = gen_lorenz96(p);
  REQUIRE(truth.adj.rows() == 5);
  for (int i = 0; i < 5; ++i) {
    int ones = 0;
    for (int j = 0; j < 5; ++j) ones += truth.adj(i, j);
    CHECK(ones == 4);
    for (int off : {-2, -1, 0, 1}) {
      CHECK(truth.adj(i, ((i + off) % 5 + 5) % 5) == 1);
    }
    CHECK(truth.adj(i, (i + 2) % 5) == 0);
  }
}

TEST_CASE("strongly forced trajectories stay bounded and active") {
  Lorenz96Params p;  // defaults: N=10, F=40, T=500
  p.seed = 1;
  auto [data, truth] = gen_lorenz96(p);
  (void)truth;
  CHECK(all_finite(data.x));
  CHECK(max_abs(data.x) < 400.0);
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < data.x.size(); ++i) mean += data.x.data()[i];
  mean /= static_cast<double>(data.x.size());
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double d = data.x.data()[i] - mean;
    sq += d * d;
  }
  CHECK(std::sqrt(sq / static_cast<double>(data.x.size())) > 1.0);
}

TEST_CASE("integrator step shows fourth-order refinement") {
  const std::vector<double> x0 = {1.2, 0.3, -0.8, 2.1, 0.5};
  const double forcing = 8.0, dt = 0.05;
  const int n = 5;

  std::vector<double> coarse(x0), half(x0), ref(x0);
  lorenz96_step(coarse, forcing, dt, coarse);
  lorenz96_step(half, forcing, dt / 2, half);
  lorenz96_step(half, forcing, dt / 2, half);
  for (int s = 0; s < 256; ++s) lorenz96_step(ref, forcing, dt / 256, ref);

  double err_coarse = 0.0, err_half = 0.0;
  for (int i = 0; i < n; ++i) {
    err_coarse = std::max(err_coarse, std::abs(coarse[static_cast<std::size_t>(i)] -
                                               ref[static_cast<std::size_t>(i)]));
    err_half = std::max(err_half, std::abs(half[static_cast<std::size_t>(i)] -
                                           ref[static_cast<std::size_t>(i)]));
  }
  CHECK(err_coarse > 0.0);
  const double ratio = err_coarse / err_half;
  // Halving the step should cut the one-interval error by about 2^4.
  CHECK(ratio > 10.0);
  CHECK(ratio < 24.0);

  std::vector<double> tiny = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(lorenz96_step(tiny, forcing, dt, tiny), ConfigError);
}

TEST_CASE("generation is seed-deterministic, truth is not seed-dependent") {
  Lorenz96Params p;
  p.num_steps = 50;
  p.seed = 11;
  auto [a, ta] = gen_lorenz96(p);
  auto [b, tb] = gen_lorenz96(p);
  (void)tb;
  CHECK(a.x == b.x);
  p.seed = 12;
  auto [c, tc] = gen_lorenz96(p);
  CHECK(!(a.x == c.x));
  CHECK(ta.adj == tc.adj);

  LotkaVolterraParams q;
  q.num_steps = 50;
  q.seed = 11;
  auto [d, td] = gen_lotka_volterra(q);
  auto [e, te] = gen_lotka_volterra(q);
  (void)te;
  CHECK(d.x == e.x);
  q.seed = 12;
  auto [f, tf] = gen_lotka_volterra(q);
  CHECK(!(d.x == f.x));
  CHECK(td.adj == tf.adj);
}

TEST_CASE("lorenz parameter validation") {
  Lorenz96Params p;
  p.num_vars = 3;
  CHECK_THROWS_AS(gen_lorenz96(p), ConfigError);
  p = {};
  p.num_steps = 1;
  CHECK_THROWS_AS(gen_lorenz96(p), ConfigError);
  p = {};
  p.dt = 0.0;
  CHECK_THROWS_AS(gen_lorenz96(p), ConfigError);
  p = {};
  p.subsample = 0;
  CHECK_THROWS_AS(gen_lorenz96(p), ConfigError);
  p = {};
  p.transient_steps = -1;
  CHECK_THROWS_AS(gen_lorenz96(p), ConfigError);
}

TEST_CASE("predator-prey series are log-populations with block truth") {
  LotkaVolterraParams p;  // pairs=2, window=1
  p.noise_sd = 0.0;
  p.seed = 4;
  auto [data, truth] = gen_lotka_volterra(p);
  CHECK(data.num_vars() == 4);
  CHECK(data.num_steps() == 500);
  CHECK(all_finite(data.x));
  CHECK(max_abs(data.x) < 10.0);  // populations stay within e^{+-10} of unity

  // Diagonal plus one cross-block edge per species: prey i is eaten by
  // predator 2+i, predator 2+i is fed by prey i.
  REQUIRE(truth.adj.rows() == 4);
  Mat2<std::uint8_t> want(4, 4, 0);
  for (int i = 0; i < 4; ++i) want(i, i) = 1;
  want(0, 2) = 1;
  want(1, 3) = 1;
  want(2, 0) = 1;
  want(3, 1) = 1;
  CHECK(truth.adj == want);

  // A full window couples every prey to every predator and vice versa.
  p.window = 2;
  auto [dw, tw] = gen_lotka_volterra(p);
  (void)dw;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(tw.adj(i, 2 + j) == 1);
      CHECK(tw.adj(2 + i, j) == 1);
    }
  }
}

TEST_CASE("uncoupled predator-prey truth is diagonal") {
  LotkaVolterraParams p;
  p.beta = 0.0;
  p.delta = 0.0;
  p.num_steps = 50;
  p.noise_sd = 0.0;
  auto [data, truth] = gen_lotka_volterra(p);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(truth.adj(i, j) == (i == j ? 1 : 0));
    }
  }
  // Decoupled prey grow exponentially: log-population is linear in time.
  const double d1 = data.x(0, 10) - data.x(0, 0);
  const double d2 = data.x(0, 20) - data.x(0, 10);
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-6));
  // alpha times the elapsed time between columns 0 and 10 (10 * 10 * 0.01).
  CHECK(d1 == doctest::Approx(1.1).epsilon(1e-6));
}

TEST_CASE("predator-prey parameter validation and blow-up detection") {
  LotkaVolterraParams p;
  p.pairs = 0;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.num_steps = 1;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.dt = -0.1;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.subsample = 0;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.alpha = 0.0;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.beta = -0.1;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.window = 0;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.window = 3;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);
  p = {};
  p.init_value = 0.0;
  CHECK_THROWS_AS(gen_lotka_volterra(p), ConfigError);

  // A coarse step on a stiff configuration drives a population negative.
  p = {};
  p.pairs = 1;
  p.window = 1;
  p.delta = 1000.0;
  p.dt = 0.1;
  p.subsample = 1;
  p.num_steps = 5;
  p.noise_sd = 0.0;
  CHECK_THROWS_AS(gen_lotka_volterra(p), NumericError);
}

TEST_CASE("csv loading transposes timestamps into columns") {
  TempFile file("1.5,2.5\n3.5,4.5\n5.5,6.5\n");
  const TimeSeriesData data = load_csv(file.path);
  CHECK(data.num_vars() == 2);
  CHECK(data.num_steps() == 3);
  CHECK(data.x(0, 0) == 1.5);
  CHECK(data.x(1, 0) == 2.5);
  CHECK(data.x(0, 2) == 5.5);
  CHECK(data.x(1, 2) == 6.5);
  CHECK(data.train_frac == 0.8);

  TempFile with_header("a,b\n1,2\n3,4\n");
  const TimeSeriesData skipped = load_csv(with_header.path);
  CHECK(skipped.num_vars() == 2);
  CHECK(skipped.num_steps() == 2);
  CHECK(skipped.x(0, 0) == 1.0);

  TempFile one_row("1,2\n");
  CHECK_THROWS_AS(load_csv(one_row.path), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/pfgcg.csv"), DataError);
}

TEST_CASE("train/test split takes the floor of the prefix fraction") {
  TimeSeriesData data;
  data.x = Mat2<double>(2, 10, 0.0);
  SplitIndices s = split_train_test(data);
  CHECK(s.train_steps == 8);
  CHECK(s.test_steps == 2);

  data.x = Mat2<double>(2, 500, 0.0);
  s = split_train_test(data);
  CHECK(s.train_steps == 400);
  CHECK(s.test_steps == 100);

  data.x = Mat2<double>(2, 10, 0.0);
  data.train_frac = 0.999;  // floor gives 9/1: degenerate test side
  CHECK_THROWS_AS(split_train_test(data), DataError);
  data.train_frac = 1.0;
  CHECK_THROWS_AS(split_train_test(data), DataError);
  data.train_frac = 0.8;
  data.x = Mat2<double>(2, 4, 0.0);
  CHECK_THROWS_AS(split_train_test(data), DataError);
}
