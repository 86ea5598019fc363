#include "tpqi/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "tpqi/errors.hpp"

namespace tpqi::stats {

namespace {

void require_same_grid(const BinGrid& a, std::size_t na, const BinGrid& b, std::size_t nb) {
  if (!a.matches(b) || na != nb) throw GeometryError("histogram and model grids differ");
}

}  // namespace

std::vector<double> poisson_errors(const Histogram& h) {
  std::vector<double> out(h.counts.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(static_cast<double>(std::max<std::uint64_t>(h.counts[i], 1)));
  }
  return out;
}

ChiSquareResult chi_square(const Histogram& h, const CoincidenceCurve& model, double min_expected) {
  require_same_grid(h.grid, h.counts.size(), model.grid, model.values.size());
  struct Group {
    double observed = 0.0;
    double expected = 0.0;
  };
  std::vector<Group> groups;
  Group open;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    open.observed += static_cast<double>(h.counts[i]);
    open.expected += model.values[i];
    if (open.expected >= min_expected) {
      groups.push_back(open);
      open = {};
    }
  }
  if (open.observed > 0.0 || open.expected > 0.0) {
    if (groups.empty()) {
      groups.push_back(open);
    } else {
      groups.back().observed += open.observed;
      groups.back().expected += open.expected;
    }
  }

  ChiSquareResult r;
  for (const auto& g : groups) {
    if (g.expected <= 0.0) {
      if (g.observed > 0.0) r.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    const double d = g.observed - g.expected;
    r.statistic += d * d / g.expected;
    ++r.dof;
  }
  if (std::isinf(r.statistic)) {
    r.p_value = 0.0;
  } else if (r.dof == 0) {
    r.p_value = 1.0;
  } else {
    r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  }
  return r;
}

std::vector<std::size_t> central_bins(const BinGrid& grid, double half_window) {
  std::vector<std::size_t> out;
  const double eps = 1e-9 * grid.bin_width;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lo = grid.lower_edge(i);
    const double hi = lo + grid.bin_width;
    if (lo >= -half_window - eps && hi <= half_window + eps) out.push_back(i);
  }
  if (out.empty()) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double lo = grid.lower_edge(i);
      const double hi = lo + grid.bin_width;
      if (lo <= eps && hi >= -eps) out.push_back(i);
    }
  }
  return out;
}

ContrastEstimate contrast_at_zero(const Histogram& parallel, const CoincidenceCurve& reference,
                                  double half_window) {
  require_same_grid(parallel.grid, parallel.counts.size(), reference.grid, reference.values.size());
  if (!(half_window >= 0.0)) throw ParameterError("half_window must be >= 0");
  const auto bins = central_bins(parallel.grid, half_window);
  double observed = 0.0;
  double expected = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto i : bins) {
    if (!(reference.values[i] > 0.0)) {
      throw UndefinedContrastError("reference vanishes inside the central window");
    }
    observed += static_cast<double>(parallel.counts[i]);
    expected += reference.values[i];
    lo = std::min(lo, parallel.grid.lower_edge(i));
    hi = std::max(hi, parallel.grid.lower_edge(i) + parallel.grid.bin_width);
  }
  if (bins.empty() || !(expected > 0.0)) {
    throw UndefinedContrastError("no reference expectation in the central window");
  }
  ContrastEstimate c;
  c.contrast = 1.0 - observed / expected;
  c.std_error = 1.0 / std::sqrt(expected);
  c.window_used = std::max(std::abs(lo), std::abs(hi));
  return c;
}

double expected_contrast_at_zero(const CoincidenceCurve& model, const CoincidenceCurve& reference,
                                 double half_window) {
  require_same_grid(model.grid, model.values.size(), reference.grid, reference.values.size());
  if (!(half_window >= 0.0)) throw ParameterError("half_window must be >= 0");
  double m = 0.0;
  double r = 0.0;
  for (auto i : central_bins(model.grid, half_window)) {
    m += model.values[i];
    r += reference.values[i];
  }
  if (!(r > 0.0)) throw UndefinedContrastError("no reference expectation in the central window");
  return 1.0 - m / r;
}

ContrastEstimate fitted_contrast_at_zero(const Histogram& parallel, const CoincidenceCurve& reference,
                                         const CoincidenceCurve& model, double fit_half_window,
                                         double model_visibility) {
  require_same_grid(parallel.grid, parallel.counts.size(), reference.grid, reference.values.size());
  require_same_grid(model.grid, model.values.size(), reference.grid, reference.values.size());
  // Least squares for data = reference - a * profile with Poisson weights 1/model.
  double num = 0.0;
  double den = 0.0;
  for (auto i : central_bins(parallel.grid, fit_half_window)) {
    const double ref = reference.values[i];
    const double profile = ref - model.values[i];
    const double var = std::max(model.values[i], 1e-12);
    num += (ref - static_cast<double>(parallel.counts[i])) * profile / var;
    den += profile * profile / var;
  }
  if (!(den > 0.0)) throw UndefinedContrastError("model has no dip inside the fit window");
  ContrastEstimate c;
  const double amplitude = num / den;
  c.contrast = amplitude * model_visibility;
  c.std_error = model_visibility / std::sqrt(den);
  c.window_used = fit_half_window;
  return c;
}

}  // namespace tpqi::stats
