#pragma once

#include <cstddef>
#include <vector>

#include "tpqi/core.hpp"

namespace tpqi::stats {

struct ContrastEstimate {
  double contrast = 0.0;
  double std_error = 0.0;
  double window_used = 0.0;  ///< half-width actually covered by the selected bins [s]
};

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// sqrt(max(n, 1)) per bin.
std::vector<double> poisson_errors(const Histogram& h);

/// Pearson chi-square of counts against a parameter-free model. Adjacent bins
/// are pooled until each group expects at least `min_expected` counts; a
/// short remainder joins the last group.
ChiSquareResult chi_square(const Histogram& h, const CoincidenceCurve& model, double min_expected = 5.0);

/// Indices of the bins lying entirely inside [-half_window, half_window]. When
/// no bin fits, the bin(s) touching tau = 0 are used.
std::vector<std::size_t> central_bins(const BinGrid& grid, double half_window);

/// 1 - observed / expected over the central bins, with the reference
/// expectation as the Poisson variance of the observed count.
ContrastEstimate contrast_at_zero(const Histogram& parallel, const CoincidenceCurve& reference,
                                  double half_window);

/// 1 - model / reference summed over the same central bins contrast_at_zero uses.
double expected_contrast_at_zero(const CoincidenceCurve& model, const CoincidenceCurve& reference,
                                 double half_window);

/// Amplitude fit of the expected dip profile (reference - model) to the data
/// within +-fit_half_window, scaled to the model's zero-delay visibility.
ContrastEstimate fitted_contrast_at_zero(const Histogram& parallel, const CoincidenceCurve& reference,
                                         const CoincidenceCurve& model, double fit_half_window,
                                         double model_visibility);

}  // namespace tpqi::stats
