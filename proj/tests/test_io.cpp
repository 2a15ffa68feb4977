#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "io.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace pfgcg;

namespace {

struct TempPath {
  std::string path;
  TempPath() {
    char buf[] = "/tmp/pfgcg_io_XXXXXX";
    const int fd = mkstemp(buf);
    REQUIRE(fd >= 0);
    close(fd);
    path = buf;
  }
  ~TempPath() { std::remove(path.c_str()); }

  void fill(const std::string& contents) const {
    std::ofstream out(path);
    out << contents;
  }
};

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  const double cases[] = {0.0,
                          1.0,
                          -1.0,
                          0.1,
                          1.0 / 3.0,
                          1e-300,
                          -2.5e300,
                          3.141592653589793,
                          std::numeric_limits<double>::min(),
                          std::numeric_limits<double>::denorm_min(),
                          std::numeric_limits<double>::max()};
  for (const double v : cases) {
    const std::string s = io::format_double(v);
    CHECK(std::stod(s) == v);
  }
  RngStream rng(3);
  for (int rep = 0; rep < 1000; ++rep) {
    const double v = sample_normal(0.0, 1e6, rng);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  // Short decimals stay short rather than expanding to 17 digits.
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("matrix csv round-trips bit-exactly") {
  TempPath file;
  RngStream rng(9);
  Mat2<double> m(3, 4, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = sample_normal(0.0, 1.0, rng);
  m(0, 0) = 0.1;
  m(2, 3) = -1e-300;
  io::write_matrix_csv(file.path, m);
  const Mat2<double> back = io::read_matrix_csv(file.path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  CHECK(back == m);

  Mat2<std::uint8_t> g(2, 2, 0);
  g(0, 1) = 1;
  io::write_matrix_csv(file.path, g);
  const Mat2<double> gb = io::read_matrix_csv(file.path);
  CHECK(gb(0, 0) == 0.0);
  CHECK(gb(0, 1) == 1.0);
}

TEST_CASE("csv reader skips one header and reports bad lines by number") {
  TempPath file;
  file.fill("alpha,beta\n1,2\n3,4\n");
  const Mat2<double> m = io::read_matrix_csv(file.path);
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 4.0);

  file.fill("1,2\n3\n");
  CHECK_THROWS_WITH_AS(io::read_matrix_csv(file.path),
                       doctest::Contains("line 2"), DataError);

  file.fill("1,2\n3,oops\n");
  CHECK_THROWS_WITH_AS(io::read_matrix_csv(file.path),
                       doctest::Contains("line 2"), DataError);

  file.fill("header,only\n");
  CHECK_THROWS_AS(io::read_matrix_csv(file.path), DataError);
  file.fill("");
  CHECK_THROWS_AS(io::read_matrix_csv(file.path), DataError);
  CHECK_THROWS_AS(io::read_matrix_csv("/nonexistent/pfgcg.csv"), DataError);
}

TEST_CASE("key-value files round-trip and tolerate comments") {
  TempPath file;
  io::write_key_value(file.path, {{"alpha", "1.5"}, {"name", "run_1"}});
  auto kv = io::read_key_value(file.path);
  REQUIRE(kv.size() == 2);
  CHECK(kv.at("alpha") == "1.5");
  CHECK(kv.at("name") == "run_1");

  file.fill("# leading comment\n  spaced_key   =   spaced value  \n\nx=1\n");
  kv = io::read_key_value(file.path);
  REQUIRE(kv.size() == 2);
  CHECK(kv.at("spaced_key") == "spaced value");
  CHECK(kv.at("x") == "1");

  file.fill("broken line without equals\n");
  CHECK_THROWS_WITH_AS(io::read_key_value(file.path),
                       doctest::Contains("line 1"), ConfigError);
  file.fill("= no key\n");
  CHECK_THROWS_AS(io::read_key_value(file.path), ConfigError);
  CHECK_THROWS_AS(io::read_key_value("/nonexistent/pfgcg.cfg"), ConfigError);
  CHECK_THROWS_AS(io::write_key_value("/nonexistent/dir/pfgcg.cfg", {}), DataError);
  CHECK_THROWS_AS(
      io::write_matrix_csv("/nonexistent/dir/m.csv", Mat2<double>(1, 1, 0.0)),
      DataError);
}
