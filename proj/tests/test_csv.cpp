#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tpqi/csv.hpp"
#include "tpqi/errors.hpp"

using namespace tpqi;

namespace {

std::filesystem::path temp(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("tpqi_csv_") + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("csv") {

TEST_CASE("formatting") {
  CHECK(io::format_real(0.0) == "0");
  CHECK(io::format_real(-0.0) == "0");
  CHECK(io::format_real(1.0 / 3.0) == "0.333333333");
  CHECK(io::format_real(-2560.128) == "-2560.128");
  CHECK(io::format_real(1.23456789012e-7) == "1.23456789e-07");
}

TEST_CASE("exact decimal scaling") {
  double v = 0.0;
  CHECK(io::parse_scaled("12", -9, v));
  CHECK(v == 12e-9);
  CHECK(io::parse_scaled("2.56", -6, v));
  CHECK(v == 2.56e-6);
  CHECK(io::parse_scaled("1.5e3", -12, v));
  CHECK(v == 1.5e-9);
  CHECK(io::parse_scaled("+7", 0, v));
  CHECK(v == 7.0);
  CHECK_FALSE(io::parse_scaled("", 0, v));
  CHECK_FALSE(io::parse_scaled("1.2.3", 0, v));
  CHECK_FALSE(io::parse_scaled("12 ns", 0, v));
  CHECK_FALSE(io::parse_scaled("1e400", 0, v));
}

TEST_CASE("empty histogram writes a header only") {
  const auto p = temp("empty.csv");
  io::write_csv(Histogram{}, p);
  CHECK(slurp(p) == "tau_ns,value,sigma\n");
  CHECK(io::read_histogram_csv(p) == Histogram{});
  std::filesystem::remove(p);
}

TEST_CASE("histogram layout") {
  Histogram h(BinGrid::make(512e-12, 256e-12));
  h.counts = {0, 4, 9, 1};
  CHECK(io::render_csv(h) == "tau_ns,value,sigma\n-0.384,0,1\n-0.128,4,2\n0.128,9,3\n0.384,1,1\n");
}

TEST_CASE("histogram round trip") {
  std::mt19937_64 rng(1);
  const auto p = temp("round.csv");
  for (int t = 0; t < 20; ++t) {
    const int bw_ps = 1 + static_cast<int>(rng() % 1000);
    const int half = 1 + static_cast<int>(rng() % 500);
    const int offset_ps = static_cast<int>(rng() % 2001) - 1000;
    Histogram h(BinGrid::make(half * bw_ps * 1e-12, bw_ps * 1e-12, offset_ps * 1e-12));
    for (auto& c : h.counts) c = rng() % 100000;
    io::write_csv(h, p);
    const auto back = io::read_histogram_csv(p);
    CHECK(back.counts == h.counts);
    CHECK(back.grid.matches(h.grid));
    CHECK(io::render_csv(back) == io::render_csv(h));
  }
  std::filesystem::remove(p);
}

TEST_CASE("curve round trip keeps 9 digits") {
  CoincidenceCurve c(BinGrid::make(1.024e-9, 256e-12));
  c.values = {0.1, 1.0 / 3.0, 2e-12, 12345.6789, 0, 5, 6, 7};
  const auto p = temp("curve.csv");
  io::write_csv(c, p);
  const auto back = io::read_curve_csv(p);
  for (std::size_t i = 0; i < 8; ++i) CHECK(back.values[i] == doctest::Approx(c.values[i]).epsilon(1e-9));
  std::filesystem::remove(p);
}

TEST_CASE("malformed files") {
  const auto p = temp("bad.csv");
  io::write_text("time,value\n1,2\n", p);
  CHECK_THROWS_AS(io::read_histogram_csv(p), InputError);
  io::write_text("tau_ns,value,sigma\n-0.128,1.5,1\n0.128,2,1\n", p);
  CHECK_THROWS_AS(io::read_histogram_csv(p), InputError);
  io::write_text("tau_ns,value,sigma\n-0.128,1\n", p);
  CHECK_THROWS_AS(io::read_histogram_csv(p), InputError);
  std::filesystem::remove(p);
  CHECK_THROWS_AS(io::read_histogram_csv(temp("missing.csv")), IoError);
  CHECK_THROWS_AS(io::write_text("x", "/nonexistent-dir/x.csv"), IoError);
}

}  // TEST_SUITE
