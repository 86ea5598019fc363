#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tpqi/errors.hpp"
#include "tpqi/stats.hpp"

using namespace tpqi;
using namespace tpqi::stats;

namespace {

BinGrid grid8() { return BinGrid::make(1.024e-9, 256e-12); }

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("poisson errors") {
  Histogram h(grid8());
  h.counts = {0, 1, 4, 9, 16, 0, 100, 2};
  const auto e = poisson_errors(h);
  CHECK(e == std::vector<double>{1, 1, 2, 3, 4, 1, 10, std::sqrt(2.0)});
}

TEST_CASE("chi-square with pooling against a hand computation") {
  Histogram h(grid8());
  CoincidenceCurve m(grid8());
  m.values = {2, 3, 6, 1, 1, 1, 2, 4};
  h.counts = {4, 3, 5, 0, 2, 3, 1, 2};
  // Groups: {2+3}=5 vs 7, {6} vs 5, {1+1+1+2}=5 vs 6, remainder {4} vs 2 joins the last -> 9 vs 8.
  const double x = (7 - 5.0) * (7 - 5.0) / 5 + (5 - 6.0) * (5 - 6.0) / 6 + (8 - 9.0) * (8 - 9.0) / 9;
  const auto r = chi_square(h, m);
  CHECK(r.dof == 3);
  CHECK(r.statistic == doctest::Approx(x).epsilon(1e-14));
  // dof 3 is odd; compare against dof 2 and 4 closed forms bracketing it.
  CHECK(r.p_value < oracle::chi2_sf_even_dof(x, 4));
  CHECK(r.p_value > oracle::chi2_sf_even_dof(x, 2));

  m.values = {5, 5, 5, 5, 5, 5, 5, 5};
  h.counts = {7, 3, 5, 5, 9, 1, 5, 5};
  const auto r2 = chi_square(h, m);
  const double x2 = (4 + 4 + 0 + 0 + 16 + 16 + 0 + 0) / 5.0;
  CHECK(r2.dof == 8);
  CHECK(r2.p_value == doctest::Approx(oracle::chi2_sf_even_dof(x2, 8)).epsilon(1e-10));
}

TEST_CASE("chi-square edge cases") {
  Histogram h(grid8());
  CoincidenceCurve m(grid8());
  auto r = chi_square(h, m);
  CHECK(r.statistic == 0.0);
  CHECK(r.dof == 0);
  CHECK(r.p_value == 1.0);
  h.counts[3] = 2;
  r = chi_square(h, m);
  CHECK(std::isinf(r.statistic));
  CHECK(r.p_value == 0.0);
  CoincidenceCurve wrong(BinGrid::make(2.048e-9, 256e-12));
  CHECK_THROWS_AS(chi_square(h, wrong), GeometryError);
}

TEST_CASE("chi-square p-values are uniform under the model") {
  std::mt19937_64 rng(99);
  CoincidenceCurve m(BinGrid::make(25.6e-9, 256e-12));
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = 20.0 + 10.0 * std::sin(0.1 * i);
  int below = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    Histogram h(m.grid);
    for (std::size_t i = 0; i < m.values.size(); ++i) h.counts[i] = std::poisson_distribution<int>(m.values[i])(rng);
    below += chi_square(h, m).p_value < 0.1;
  }
  // Binomial(400, 0.1): mean 40, sd 6.
  CHECK(std::abs(below - 40) < 24);
}

TEST_CASE("central bins") {
  const auto g = BinGrid::make(2.56e-9, 256e-12);
  CHECK(central_bins(g, 410e-12) == std::vector<std::size_t>{9, 10});
  CHECK(central_bins(g, 512e-12) == std::vector<std::size_t>{8, 9, 10, 11});
  CHECK(central_bins(g, 100e-12) == std::vector<std::size_t>{9, 10});
}

TEST_CASE("windowed contrast") {
  Histogram h(grid8());
  CoincidenceCurve ref(grid8());
  ref.values = {50, 50, 50, 50, 50, 50, 50, 50};
  h.counts = {50, 50, 50, 17, 17, 50, 50, 50};
  const auto c = contrast_at_zero(h, ref, 256e-12);
  CHECK(c.contrast == doctest::Approx(0.66));
  CHECK(c.std_error == doctest::Approx(0.1));
  CHECK(c.window_used == doctest::Approx(256e-12));
  ref.values[3] = 0.0;
  CHECK_THROWS_AS(contrast_at_zero(h, ref, 256e-12), UndefinedContrastError);
}

TEST_CASE("model contrast and fitted amplitude") {
  CoincidenceCurve ref(grid8()), model(grid8());
  ref.values = {100, 100, 100, 100, 100, 100, 100, 100};
  model.values = {100, 95, 70, 40, 40, 70, 95, 100};
  CHECK(expected_contrast_at_zero(model, ref, 256e-12) == doctest::Approx(0.6));
  Histogram exact(grid8());
  for (std::size_t i = 0; i < 8; ++i) exact.counts[i] = static_cast<std::uint64_t>(model.values[i]);
  const auto fit = fitted_contrast_at_zero(exact, ref, model, 1.024e-9, 0.65);
  CHECK(fit.contrast == doctest::Approx(0.65).epsilon(1e-12));
  CHECK_THROWS_AS(fitted_contrast_at_zero(exact, ref, ref, 1.024e-9, 0.65), UndefinedContrastError);
}

}  // TEST_SUITE
