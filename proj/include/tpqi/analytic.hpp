#pragma once

// Closed-form expected coincidences for two exponentially decaying emitters
// with Gaussian frequency noise, meeting on a 50:50 beamsplitter.

#include <span>

#include "tpqi/core.hpp"

namespace tpqi::analytic {

/// Parameters of the same-pulse pair density. Both emitters share one lifetime.
struct PairDensityParams {
  double gamma = 1.0 / (12.0 * units::ns);  ///< 1/lifetime [s^-1]
  double mean_detuning = 0.0;               ///< |nu_A - nu_B| [Hz]
  double detuning_sigma = 0.0;              ///< rms of the relative detuning [Hz]
  double interference_factor = 1.0;         ///< (1 - b_A)(1 - b_B)

  void validate() const;
  /// Extracts the pair parameters; throws ParameterError for unequal lifetimes.
  static PairDensityParams from_config(const ExperimentConfig& cfg);
};

/// Density [s^-1] of the detection-time difference tau for a same-pulse pair
/// that exits through opposite ports.
///
/// orthogonal: (G/4) exp(-G|tau|)
/// parallel:   (G/4) exp(-G|tau|) [1 - V0 exp(-(2 pi s)^2 tau^2 / 2) cos(2 pi D tau)]
double pair_coincidence_density(double tau, Polarization mode, const PairDensityParams& p);

/// 1 - (parallel / orthogonal) of the jitter-convolved pair densities at tau = 0.
double visibility_at_zero(const PairDensityParams& p, double jitter_rms_diff);

/// Gaussian convolution along tau on the curve's own grid. The kernel is the
/// bin-integrated Gaussian truncated at +-6 sigma and renormalized, so the area
/// is preserved for curves whose support lies 6 sigma inside the grid.
CoincidenceCurve convolve_detector(const CoincidenceCurve& curve, double jitter_rms_diff);

/// Expected counts per bin: central interference peak, side peaks at n/rate,
/// dark-count floor, all convolved with the difference jitter.
CoincidenceCurve expected_histogram(const ExperimentConfig& cfg, const BlinkingParams& blinking = {});

/// expected_histogram with the interference term removed (V0 = 0).
CoincidenceCurve no_interference_model(const ExperimentConfig& cfg,
                                       const BlinkingParams& blinking = {});

/// Sum of expected histograms for records with fixed detuning `detunings[i]`
/// (no spectral diffusion inside a record) and duration `weights[i]` seconds.
CoincidenceCurve postselected_sum(std::span<const double> detunings, std::span<const double> weights,
                                  const ExperimentConfig& cfg);

}  // namespace tpqi::analytic
